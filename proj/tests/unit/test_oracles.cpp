#include <doctest.h>

#include <cmath>
#include <sstream>

#include "delecho/errors.hpp"
#include "delecho/oracle_check.hpp"
#include "delecho/oracles.hpp"
#include "delecho/rng.hpp"

using namespace delecho;

namespace {
constexpr double kHz = kTwoPi * 1e3;

Mat pauli_x() {
  Mat m = Mat::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return m;
}
Mat pauli_y() {
  Mat m = Mat::Zero(2, 2);
  m(0, 1) = cplx(0, -1);
  m(1, 0) = cplx(0, 1);
  return m;
}
Mat pauli_z() {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

// Phase kick, rf rotation about x, opposite kick: overlap of the two branches.
double echo_overlap(double phi, double theta) {
  const Mat kick = expm_hermitian(0.5 * pauli_z(), phi);
  const Mat rot = expm_hermitian(0.5 * pauli_x(), theta);
  return (0.5 * (rot.adjoint() * kick * rot * kick.adjoint()).trace()).real();
}
}  // namespace

TEST_CASE("single-spin coherence against a two-level calculation") {
  Rng r(3);
  for (int i = 0; i < 300; ++i) {
    SignalParams s{r.uniform(-30, 30) * kHz, i % 2 ? 1.0 : 0.5, r.uniform(0, 100e-6), r.uniform(-4, 4), 1};
    const double phi = 2.0 * s.eta * s.A_parallel * s.tau;
    CHECK(single_spin_coherence(s) == doctest::Approx(echo_overlap(phi, s.theta_rf)).epsilon(1e-12));
  }
  CHECK(single_spin_coherence({5 * kHz, 0.5, 20e-6, 0.0, 1}) == doctest::Approx(1.0));
  CHECK(single_spin_coherence({5 * kHz, 0.5, 20e-6, M_PI, 1}) == doctest::Approx(std::cos(5 * kHz * 20e-6)));
  CHECK_THROWS_AS(single_spin_coherence({1.0, 0.5, -1.0, 0.0, 1}), DomainError);
  CHECK_THROWS_AS(single_spin_coherence({1.0, 0.5, 1.0, 0.0, 0}), DomainError);
}

TEST_CASE("multi-spin product") {
  const SignalParams a{4 * kHz, 0.5, 30e-6, 1.0, 1}, b{-9 * kHz, 0.5, 30e-6, 2.0, 3};
  const double want = single_spin_coherence(a) * std::pow(single_spin_coherence({-9 * kHz, 0.5, 30e-6, 2.0, 1}), 3);
  CHECK(multi_spin_coherence({a, b}) == doctest::Approx(want).epsilon(1e-14));
  CHECK(multi_spin_coherence({}) == 1.0);
  // Two equal spins at the phase-pi point cancel the signal at theta = pi / 2.
  const double A = 10 * kHz, tau = M_PI / (A * 1.0 * 2.0 * 0.5) / 1.0;
  CHECK(std::abs(multi_spin_coherence({{A, 0.5, tau, M_PI / 2.0, 2}})) < 1e-12);
  CHECK(multi_spin_coherence({{A, 0.5, tau, M_PI, 1}}) == doctest::Approx(-1.0));
}

TEST_CASE("conditional rotations") {
  const auto g = entangling_gate_phase(6 * kHz, 0.5, 40e-6);
  const double phi = 2.0 * 0.5 * 40e-6 * 6 * kHz;
  CHECK(max_abs(g.u_plus - expm_hermitian(0.5 * pauli_z(), phi)) < 1e-14);
  CHECK(max_abs(g.u_minus - g.u_plus.adjoint()) < 1e-14);
  CHECK(unitarity_defect(g.u_plus) < 1e-14);
  CHECK_THROWS_AS(entangling_gate_phase(1.0, 0.5, -1.0), DomainError);
}

TEST_CASE("type-h pair population") {
  CHECK(type_h_pair_population(20 * kHz, 1.0, 0.0) == doctest::Approx(1.0));
  const double tau = M_PI / (2.0 * 20 * kHz);
  CHECK(type_h_pair_population(20 * kHz, 1.0, tau) == doctest::Approx(0.5));
  Rng r(5);
  for (int i = 0; i < 100; ++i) {
    const double P = type_h_pair_population(r.uniform(-50, 50) * kHz, 1.0, r.uniform(0, 1e-4));
    CHECK(P >= 0.5);
    CHECK(P <= 1.0);
  }
}

TEST_CASE("type-d pair lines from the two-spin Hamiltonian") {
  const double d = 1.37 * kHz, wn = kTwoPi * 5e6;
  // Secular like-spin coupling plus Zeeman term on |aa>, |ab>, |ba>, |bb>.
  const Mat ix = 0.5 * pauli_x(), iy = 0.5 * pauli_y(), iz = 0.5 * pauli_z(), id = Mat::Identity(2, 2);
  const Mat h = wn * (kron(iz, id) + kron(id, iz)) +
                d * (kron(iz, iz) - 0.5 * (kron(ix, ix) + kron(iy, iy)));
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const auto& e = es.eigenvalues();  // bb, singlet, triplet zero, aa
  const double t0 = -0.5 * d;
  const double up_line = e(3) - t0, down_line = t0 - e(0);
  const double g = default_constants().gamma_of(Species::C13), Bx = 2e-4;
  const auto p = type_d_pair_predictions(d, g, Bx, 3 * kHz, 1.0, 10e-6, wn);
  CHECK(std::max(up_line, down_line) == doctest::Approx(p.omega_high).epsilon(1e-12));
  CHECK(std::min(up_line, down_line) == doctest::Approx(p.omega_low).epsilon(1e-12));
  CHECK(p.splitting == doctest::Approx(1.5 * d));
  // Collective matrix element is sqrt(2) times the single-spin one.
  Vec aa = Vec::Zero(4), tz = Vec::Zero(4);
  aa(0) = 1.0;
  tz(1) = tz(2) = 1.0 / std::sqrt(2.0);
  const Mat drive = 0.5 * g * Bx * (kron(ix, id) + kron(id, ix));
  const double rabi_pair = 2.0 * std::abs(tz.dot(drive * aa));
  const double rabi_single = g * Bx / 2.0;
  CHECK(M_PI / rabi_pair == doctest::Approx(p.flip_time).epsilon(1e-12));
  CHECK(M_PI / rabi_single == doctest::Approx(p.single_flip_time).epsilon(1e-12));
  CHECK(p.flip_time / p.single_flip_time == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(type_d_pair_predictions(d, g, 0.0, 0, 1, 0, wn), DomainError);
}

TEST_CASE("ideal two-qubit gates") {
  const auto g = ideal_two_qubit_gates();
  Mat swap = Mat::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 1.0;
  CHECK(max_abs(g.swap - swap) < 1e-14);
  Mat iswap = swap;
  iswap(1, 2) = iswap(2, 1) = kI;
  CHECK(max_abs(g.iswap - iswap) < 1e-14);
  const Mat zz = kron(pauli_z(), pauli_z());
  CHECK(max_abs(g.u_zz - expm_hermitian(zz, -M_PI / 4)) < 1e-14);
  const Mat zx = kron(pauli_z(), pauli_x());
  CHECK(max_abs(g.u_zx - expm_hermitian(zx, -M_PI / 4)) < 1e-14);
  for (const Mat* m : {&g.u_zx, &g.u_zy, &g.u_zz, &g.u_xx, &g.u_yy}) CHECK(unitarity_defect(*m) < 1e-14);
}

TEST_CASE("DD addressing coupling") {
  const double Aperp = 12 * kHz;
  const auto p = dd_addressing_hamiltonian(Aperp, cp_coefficient(1), 0.5, DdMode::Pulsed);
  CHECK(p.strength == doctest::Approx(0.5 * 0.5 * (4.0 / M_PI) * Aperp));
  CHECK(p.gate_time() == doctest::Approx(kTwoPi / (4.0 / M_PI * Aperp)));
  const Mat h = p.operator_form();
  CHECK(max_abs(h - p.strength * kron(pauli_z(), 0.5 * pauli_x())) < 1e-9);
  CHECK(p.valid_against(20 * p.f_times_A));
  CHECK_FALSE(p.valid_against(2 * p.f_times_A));
  const auto c = dd_addressing_hamiltonian(Aperp, 0.3, 1.0, DdMode::Continuous);
  CHECK(c.f_times_A == Aperp);
  CHECK(max_abs(c.operator_form() - c.strength * (kron(pauli_z(), 0.5 * pauli_x()) + kron(pauli_y(), 0.5 * pauli_y()))) < 1e-9);
  CHECK_THROWS_AS(dd_addressing_hamiltonian(0.0, 1.0, 0.5, DdMode::Pulsed).gate_time(), DomainError);
  for (int k = 1; k <= 9; ++k) CHECK(cp_coefficient(k) == doctest::Approx(4.0 / (k * M_PI) * std::sin(k * M_PI / 2)));
}

TEST_CASE("level precession") {
  const Vec3 A(3 * kHz, 0, 8 * kHz);
  const double g = default_constants().gamma_of(Species::C13), B = 0.467;
  CHECK(level_precession(A, B, 0, FrameMode::Lab) == doctest::Approx(g * B));
  CHECK(level_precession(A, B, 1, FrameMode::Rwa) == doctest::Approx(g * B - 8 * kHz));
  CHECK(level_precession(A, B, -1, FrameMode::Lab) == doctest::Approx((Vec3(0, 0, g * B) + A).norm()));
}

TEST_CASE("oracle table passes and the sign mutation is caught") {
  const auto rows = run_oracle_check();
  for (const auto& r : rows) {
    INFO(r.name);
    CHECK(r.pass);
  }
  OracleCheckOptions o;
  o.flip_A_sign = true;
  const auto bad = run_oracle_check(o);
  bool single_failed = false;
  for (const auto& r : bad)
    if (r.name == "single_spin") single_failed = !r.pass;
  CHECK(single_failed);
  std::ostringstream os;
  print_oracle_table(os, rows);
  CHECK(os.str().find("PASS") != std::string::npos);
}
