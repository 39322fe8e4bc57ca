#pragma once
#include <cstddef>

#include "delecho/linalg.hpp"
#include "delecho/spin_system.hpp"

namespace delecho {

// Electron (+1, 0, -1) x nitrogen (+1, 0, -1) system driven by a microwave
// field on the electron and rf tones on the nitrogen, simulated in the lab
// frame with sampled cosine drives.
struct NitrogenSwapOptions {
  double B_z = 0.467;
  double mw_pi_duration = 12.5e-9;
  double rf_amplitude = 15.53e-4;  // T
  int steps_per_period = 100;
  bool include_flip_flop = true;       // transverse hyperfine term
  bool rf_drives_electron = true;      // rf field also couples to the electron
  bool ac_shift_compensation = true;   // composite-z correction after each nitrogen block
};

struct NitrogenSwapResult {
  Mat gate9;   // realized operator in the dressed local frame
  Mat gate4;   // block on (+1,+1), (+1,0), (0,+1), (0,0)
  double fidelity = 0.0;
  double duration = 0.0;
  double ac_phase = 0.0;  // electron phase picked up during one nitrogen pi/2 block
  std::size_t steps = 0;
};

// 9x9 static Hamiltonian (rad/s), basis index (1 - m_s) * 3 + (1 - m_N).
Mat nitrogen_hamiltonian(double B_z, bool include_flip_flop = true,
                         const PhysicalConstants& c = default_constants());
// Coupling of a field along x to the same basis (multiply by B_x(t)).
Mat nitrogen_drive_operator(bool rf_drives_electron = true, const PhysicalConstants& c = default_constants());

NitrogenSwapResult simulate_nitrogen_swap(const NitrogenSwapOptions& opt = {},
                                          const PhysicalConstants& c = default_constants());

}  // namespace delecho
