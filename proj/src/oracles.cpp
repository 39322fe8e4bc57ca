#include "delecho/oracles.hpp"

#include <cmath>

#include "delecho/errors.hpp"

namespace delecho {

void SignalParams::validate() const {
  if (tau < 0.0) throw DomainError("signal: tau must be non-negative");
  if (p < 1) throw DomainError("signal: multiplicity must be >= 1");
}

double single_spin_coherence(const SignalParams& s) {
  s.validate();
  const double c = std::cos(s.theta_rf);
  return 0.5 * ((1.0 - c) * std::cos(2.0 * s.eta * s.A_parallel * s.tau) + 1.0 + c);
}

double multi_spin_coherence(const std::vector<SignalParams>& spins) {
  double L = 1.0;
  for (const auto& s : spins) L *= std::pow(single_spin_coherence(s), s.p);
  return L;
}

ConditionalRotations entangling_gate_phase(double A, double eta, double tau) {
  if (tau < 0.0) throw DomainError("entangling_gate_phase: tau must be non-negative");
  const double phi = 2.0 * eta * tau * A;
  ConditionalRotations r;
  r.u_plus = Mat::Zero(2, 2);
  r.u_minus = Mat::Zero(2, 2);
  // I_z = diag(1/2, -1/2)
  r.u_plus(0, 0) = std::exp(cplx(0.0, -phi / 2));
  r.u_plus(1, 1) = std::exp(cplx(0.0, phi / 2));
  r.u_minus(0, 0) = std::exp(cplx(0.0, phi / 2));
  r.u_minus(1, 1) = std::exp(cplx(0.0, -phi / 2));
  return r;
}

double type_h_pair_population(double A, double eta, double tau) {
  if (tau < 0.0) throw DomainError("type_h_pair_population: tau must be non-negative");
  return 0.5 + 0.25 * (1.0 + std::cos(2.0 * eta * A * tau));
}

TypeDPrediction type_d_pair_predictions(double d, double gamma_n, double B_x, double A, double eta, double tau,
                                        double omega_n) {
  if (!(B_x > 0.0)) throw DomainError("type_d_pair_predictions: drive amplitude must be positive");
  TypeDPrediction p;
  p.omega_low = omega_n - 0.75 * d;
  p.omega_high = omega_n + 0.75 * d;
  p.splitting = 1.5 * d;
  p.single_flip_time = 2.0 * M_PI / std::abs(gamma_n * B_x);
  p.flip_time = std::sqrt(2.0) * M_PI / std::abs(gamma_n * B_x);
  p.population = 0.5 + 0.25 * (std::cos(2.0 * eta * A * tau) + 1.0);
  return p;
}

namespace {
Mat pauli(char a) {
  Mat m = Mat::Zero(2, 2);
  switch (a) {
    case 'x': m(0, 1) = m(1, 0) = 1.0; break;
    case 'y': m(0, 1) = cplx(0, -1); m(1, 0) = cplx(0, 1); break;
    case 'z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: m = Mat::Identity(2, 2);
  }
  return m;
}
// exp(i pi/4 sigma_a (x) sigma_b): the generator squares to one.
Mat quarter(char a, char b) {
  const Mat g = kron(pauli(a), pauli(b));
  return std::cos(M_PI / 4) * Mat::Identity(4, 4) + kI * std::sin(M_PI / 4) * g;
}
}  // namespace

TwoQubitGates ideal_two_qubit_gates() {
  TwoQubitGates g;
  g.u_zx = quarter('z', 'x');
  g.u_zy = quarter('z', 'y');
  g.u_zz = quarter('z', 'z');
  g.u_xx = quarter('x', 'x');
  g.u_yy = quarter('y', 'y');
  g.iswap = g.u_yy * g.u_xx;
  g.swap = std::exp(cplx(0.0, -M_PI / 4)) * g.u_zz * g.iswap;
  return g;
}

Mat DdCoupling::operator_form() const {
  const Mat ix = 0.5 * pauli('x'), iy = 0.5 * pauli('y');
  Mat h = strength * kron(pauli('z'), ix);
  if (mode == DdMode::Continuous) h += strength * kron(pauli('y'), iy);
  return h;
}

bool DdCoupling::valid_against(double detuning, double margin) const {
  return std::abs(detuning) >= margin * std::abs(f_times_A);
}

double DdCoupling::gate_time() const {
  if (f_times_A == 0.0) throw DomainError("dd coupling: zero coupling has no gate time");
  return 2.0 * M_PI / std::abs(f_times_A);
}

DdCoupling dd_addressing_hamiltonian(double A_perp, double f_k, double eta, DdMode mode) {
  DdCoupling c;
  c.mode = mode;
  const double f = mode == DdMode::Pulsed ? f_k : 1.0;
  c.strength = 0.5 * eta * f * A_perp;
  c.f_times_A = f * A_perp;
  return c;
}

double cp_coefficient(int k) { return 4.0 / (k * M_PI) * std::sin(k * M_PI / 2.0); }

}  // namespace delecho
