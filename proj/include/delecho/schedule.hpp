#pragma once
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "delecho/spin_system.hpp"

namespace delecho {

enum class PulseTarget { Electron, Nuclear };

struct InstantPulse {
  PulseTarget target = PulseTarget::Electron;
  double phase = 0.0;  // rotation axis azimuth
  double angle = 0.0;
  // Nuclear pulses act on every spin of `species`, or on `spins` if given.
  Species species = Species::C13;
  std::vector<std::size_t> spins;
};

struct RfDrive {
  double frequency = 0.0;  // rad/s
  double amplitude = 0.0;  // T
  double phase = 0.0;
  double t0 = 0.0, t1 = 0.0;
  Species species = Species::C13;  // addressed species (rotating-wave mode)
};

struct LGField {
  double delta = 0.0;      // detuning from the bare Larmor frequency, rad/s
  double amplitude = 0.0;  // T; tan(angle) = sqrt(2) when built by build_lg
  double t0 = 0.0, t1 = 0.0;
  Species species = Species::C13;
  bool always_on_capable = true;
  bool suppression_regime = false;
};

struct SpinLock {
  double rabi = 0.0;  // rad/s
  double phase = 0.0;
  double t0 = 0.0, t1 = 0.0;
};

struct ManifoldTransfer {
  int new_down = 0;
};

struct SwapGate {
  std::size_t memory = 0;  // index of the memory spin in the simulated system
  bool explicit_realization = false;
  bool retrieve = false;   // leaving the delay window
};

struct Illumination {
  std::string rates_id = "default";
  double t0 = 0.0, t1 = 0.0;
};

using EventBody =
    std::variant<InstantPulse, RfDrive, LGField, SpinLock, ManifoldTransfer, SwapGate, Illumination>;

// Ordering of coincident instantaneous events.
enum class Priority : int { Retrieve = 0, Transfer = 1, Pulse = 2, Store = 3, WindowEdge = 4 };

struct ControlEvent {
  double time = 0.0;  // start time for windowed events
  EventBody body;

  bool instantaneous() const;
  double end_time() const;
  Priority priority() const;
  std::string kind_name() const;
};

struct Window {
  double t0 = 0.0, t1 = 0.0;
  double length() const { return t1 - t0; }
};

struct ControlSchedule {
  std::vector<ControlEvent> events;
  double total_duration = 0.0;
  std::string protocol;  // "fragment", "delayed_echo", ...
  int initial_down = 0;
  std::vector<Window> interaction_windows;
  std::optional<Window> delay_window;
  std::vector<double> echo_pulse_times;
  // Periodic fragments (DD trains) declare their period.
  double period = 0.0;
  double period_origin = 0.0;

  void add(double time, EventBody body);
  void sort();
  void validate() const;
  void append(const ControlSchedule& other, double offset);
  std::size_t count_electron_pi() const;
};

ControlSchedule build_cp(int n_pulses, double tau_cp, double start = 0.0, double phase = 0.0);
double dd_frequency(double tau_cp);

// AXY: 5-pulse composite pi blocks, elementary pulses at c + {-2x,-x,0,x,2x}
// around centres c = T/4, 3T/4 (symmetric) or 0, T/2 (anti-symmetric).
struct AxyLayout {
  double period = 0.0;
  double spacing = 0.0;  // x
  double coefficient = 0.0;
};
AxyLayout solve_axy(int k_dd, double target_f, double period);
ControlSchedule build_axy(int k_dd, double target_f, bool symmetric, int periods, double period,
                          double start = 0.0, bool composite_phases = true);
inline constexpr double kAxyPhases[5] = {0.5235987755982988, 0.0, 1.5707963267948966, 0.0,
                                         0.5235987755982988};

int modulation_function(const ControlSchedule& s, double t);

struct FourierPair {
  double fs = 0.0;
  double fa = 0.0;
};
FourierPair fourier_coefficients(const ControlSchedule& s, int k);

enum class DelayKind { DdProtectedRf, MemorySwap, MemorySwapIllumination, DdWindows };
std::string delay_kind_name(DelayKind k);
DelayKind parse_delay_kind(const std::string& s);

struct DelaySpec {
  DelayKind kind = DelayKind::DdProtectedRf;
  double duration = 1e-3;
  int cp_pulses = 100;           // electron CP inside the delay (DD-protected rf)
  std::size_t memory = 0;        // memory spin index (swap kinds)
  bool explicit_swap = false;
  double relax_wait = 2e-6;      // after illumination
  int window_cp_pulses = 0;      // DD inside interaction windows (DdWindows)
  Species nuclear_species = Species::C13;  // two-pulse nuclear CP (DdWindows)
};

struct RfTarget {
  double frequency = 0.0;  // rad/s
  double theta = 0.0;
  double phase = 0.0;
  Species species = Species::C13;
};

struct ManifoldPlan {
  int window_down = 0;  // electron down level during interaction windows
  int delay_down = 0;   // during the delay window
};

struct EchoSpec {
  double tau = 10e-6;
  DelaySpec delay;
  std::vector<RfTarget> rf;
  ManifoldPlan manifold;
  bool final_pi = true;
  std::optional<LGField> lg;  // applied over the whole protocol when set
};

ControlSchedule build_delayed_entanglement_echo(const EchoSpec& spec,
                                                const PhysicalConstants& c = default_constants());

LGField build_lg(double delta_lg, Window w, Species species = Species::C13,
                 double coupling_for_regime = 0.0, const PhysicalConstants& c = default_constants());

double rf_rotation_angle(double amplitude, double gamma_n, double t_rf);
double rf_amplitude_for_angle(double theta, double gamma_n, double t_rf);

void serialize_schedule(std::ostream& os, const ControlSchedule& s);
ControlSchedule parse_schedule(std::istream& is);

}  // namespace delecho
