#pragma once
#include <vector>

#include "delecho/linalg.hpp"

namespace delecho {

struct SignalParams {
  double A_parallel = 0.0;  // rad/s
  double eta = 0.5;
  double tau = 0.0;         // s
  double theta_rf = 0.0;
  int p = 1;                // spins sharing the precession frequency
  void validate() const;
};

double single_spin_coherence(const SignalParams& s);
// Product over spins; each entry contributes its single-spin value p times.
double multi_spin_coherence(const std::vector<SignalParams>& spins);

struct ConditionalRotations {
  Mat u_plus, u_minus;  // exp(-+ 2 i eta tau A I_z)
};
ConditionalRotations entangling_gate_phase(double A_parallel, double eta, double tau);

double type_h_pair_population(double A_parallel, double eta, double tau);

struct TypeDPrediction {
  double omega_low = 0.0, omega_high = 0.0;  // rad/s
  double splitting = 0.0;
  double flip_time = 0.0;         // collective triplet transition
  double single_flip_time = 0.0;  // one isolated spin
  double population = 0.0;
};
TypeDPrediction type_d_pair_predictions(double d_jk, double gamma_n, double B_x, double A_parallel, double eta,
                                        double tau, double omega_n);

// Two-qubit gates on electron (first) x nuclear qubit, basis |0>=up, |1>=down.
struct TwoQubitGates {
  Mat u_zx, u_zy, u_zz, u_xx, u_yy, iswap, swap;
};
TwoQubitGates ideal_two_qubit_gates();

enum class DdMode { Pulsed, Continuous };

struct DdCoupling {
  DdMode mode = DdMode::Pulsed;
  double strength = 0.0;  // rad/s, prefactor of sigma_z I_x (pulsed) or sigma_z I_x + sigma_y I_y
  Mat operator_form() const;
  // Secular addressing holds when the detuning from other spins dominates the coupling.
  bool valid_against(double detuning, double margin = 10.0) const;
  double gate_time() const;  // 2 pi / (f A_perp) for the pulsed form
  double f_times_A = 0.0;
};
DdCoupling dd_addressing_hamiltonian(double A_perp, double f_k, double eta, DdMode mode);

double cp_coefficient(int k);  // 4 / (k pi) sin(k pi / 2)

}  // namespace delecho
