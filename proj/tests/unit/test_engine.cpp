#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "delecho/engine.hpp"
#include "delecho/errors.hpp"
#include "delecho/rng.hpp"

using namespace delecho;

namespace {
constexpr double kHz = kTwoPi * 1e3;

ControlSchedule hahn(double tau) {
  ControlSchedule s = build_cp(1, 2.0 * tau);
  s.period = 0.0;
  return s;
}

ControlSchedule free_run(double t) {
  ControlSchedule s;
  s.total_duration = t;
  return s;
}

// Two-axis echo modulation for one spin-1/2 in the (+1, 0) manifold.
double hahn_oracle(const Vec3& w0, const Vec3& w1, double tau) {
  const double k = w0.cross(w1).squaredNorm() / (w0.squaredNorm() * w1.squaredNorm());
  const double a = std::sin(w0.norm() * tau / 2.0), b = std::sin(w1.norm() * tau / 2.0);
  return 1.0 - 2.0 * k * a * a * b * b;
}

SpinCluster random_cluster(Rng& r, int n) {
  SpinCluster c;
  for (int i = 0; i < n; ++i) {
    const Vec3 A(r.uniform(-20, 20) * kHz, r.uniform(-20, 20) * kHz, r.uniform(-40, 40) * kHz);
    const Vec3 pos(r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1));
    c.add(Species::C13, A, pos.normalized() * (0.4 + 0.1 * i));
  }
  return c;
}
}  // namespace

TEST_CASE("bare electron keeps full coherence") {
  SpinCluster none;
  for (FrameMode m : {FrameMode::Rwa, FrameMode::Lab}) {
    EngineOptions o;
    o.mode = m;
    const auto r = evolve(none, hahn(10e-6), o);
    CHECK(std::abs(coherence(r.state, r.down_level).c) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(r.report.failed);
  }
}

TEST_CASE("static evolution matches the closed form") {
  const double Az = 7.3 * kHz;
  SpinCluster c;
  c.add(Species::C13, Vec3(0, 0, Az));
  for (double t : {1e-6, 37e-6, 123e-6}) {
    const auto r = evolve(c, free_run(t));
    CHECK(coherence(r.state, 0).c.real() == doctest::Approx(std::cos(Az * t / 2.0)).epsilon(1e-10));
    CHECK(std::abs(coherence(r.state, 0).c.imag()) < 1e-10);
  }
  // Polarized nucleus picks up a one-sided phase.
  c.polarization[0] = 1.0;
  const double t = 50e-6;
  const auto r = evolve(c, free_run(t));
  CHECK(std::abs(coherence(r.state, 0).c) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(std::arg(coherence(r.state, 0).c)) == doctest::Approx(std::abs(Az * t / 2.0)).epsilon(1e-9));
}

TEST_CASE("level Hamiltonian splittings") {
  const Vec3 A(3.0 * kHz, -2.0 * kHz, 11.0 * kHz);
  SpinCluster c;
  c.add(Species::C13, A);
  EngineOptions o;
  o.mode = FrameMode::Lab;
  const double g = o.constants.gamma_of(Species::C13);
  const Mat h = build_hamiltonian(c, {1, 0}, {}, 0.0, {}, o);
  REQUIRE(h.rows() == 4);
  Eigen::SelfAdjointEigenSolver<Mat> up(h.block(0, 0, 2, 2)), dn(h.block(2, 2, 2, 2));
  const Vec3 w1 = Vec3(0, 0, -g * c.B_z) + A;
  CHECK(up.eigenvalues()(1) == doctest::Approx(w1.norm() / 2.0).epsilon(1e-12));
  CHECK(dn.eigenvalues()(1) == doctest::Approx(g * c.B_z / 2.0).epsilon(1e-12));
  CHECK(max_abs(h.block(0, 2, 2, 2)) == 0.0);
  CHECK(max_abs(h - h.adjoint()) < 1e-9);
  // The rotating-wave block keeps only the secular part.
  o.mode = FrameMode::Rwa;
  const Mat hr = level_hamiltonian(c, 1, {}, 0.0, {}, o);
  CHECK(std::abs(hr(0, 1)) == 0.0);
  CHECK((hr(0, 0) - hr(1, 1)).real() == doctest::Approx(-g * c.B_z + A.z()));
}

TEST_CASE("lab-frame Hahn echo matches the two-axis formula") {
  for (const Vec3 A : {Vec3(20 * kHz, 0, 15 * kHz), Vec3(-5 * kHz, 8 * kHz, -30 * kHz), Vec3(60 * kHz, 10 * kHz, 2 * kHz)}) {
    SpinCluster c;
    c.add(Species::C13, A);
    EngineOptions o;
    o.mode = FrameMode::Lab;
    const double g = o.constants.gamma_of(Species::C13);
    const Vec3 w0(0, 0, -g * c.B_z), w1 = w0 + A;
    for (double tau : {3e-6, 10.1e-6, 47e-6}) {
      const auto r = evolve(c, hahn(tau), o);
      CHECK(std::abs(coherence(r.state, 0).c) == doctest::Approx(std::abs(hahn_oracle(w0, w1, tau))).epsilon(1e-9));
    }
  }
}

TEST_CASE("rotating-wave Hahn echo refocuses static shifts") {
  Rng r(5);
  for (int i = 0; i < 20; ++i) {
    SpinCluster c = random_cluster(r, 3);
    EngineOptions o;
    o.nuclear_couplings = false;
    const auto res = evolve(c, hahn(r.uniform(1e-6, 200e-6)), o);
    CHECK(std::abs(coherence(res.state, 0).c) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("uncoupled spins multiply") {
  Rng r(9);
  EngineOptions o;
  o.mode = FrameMode::Lab;
  o.nuclear_couplings = false;
  for (int i = 0; i < 5; ++i) {
    SpinCluster c = random_cluster(r, 3);
    const double tau = r.uniform(2e-6, 40e-6);
    const auto all = evolve(c, hahn(tau), o);
    cplx prod{1.0, 0.0};
    for (std::size_t j = 0; j < c.size(); ++j) prod *= coherence(evolve(subsystem(c, {j}), hahn(tau), o).state, 0).c;
    CHECK(std::abs(coherence(all.state, 0).c - prod) < 1e-10);
  }
}

TEST_CASE("entangled electron carries no qubit coherence") {
  SpinCluster c;
  c.add(Species::C13, Vec3(0, 0, kHz));
  Vec bell = Vec::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);  // |up,a> + |down,b>
  const auto st = QuantumState::pure(bell, {2, 2}, {1, 0});
  CHECK(std::abs(coherence(st, 0).c) < 1e-15);
  Vec prod = Vec::Zero(4);
  prod(0) = prod(2) = 1.0 / std::sqrt(2.0);
  CHECK(coherence(QuantumState::pure(prod, {2, 2}, {1, 0}), 0).c.real() == doctest::Approx(1.0));
}

TEST_CASE("pure and mixed representations agree") {
  SpinCluster c;
  c.add(Species::C13, Vec3(4 * kHz, 1 * kHz, 9 * kHz), Vec3(0.5, 0, 0));
  c.add(Species::C13, Vec3(-3 * kHz, 2 * kHz, -6 * kHz), Vec3(0, 0.45, 0.1));
  c.polarization = {1.0, 1.0};
  EngineOptions o;
  o.mode = FrameMode::Lab;
  const auto mixed = evolve(c, hahn(20e-6), o);
  Vec psi = Vec::Zero(8);
  psi(0) = psi(4) = 1.0 / std::sqrt(2.0);
  const auto pure = evolve(QuantumState::pure(psi, {2, 2, 2}, {1, 0}), c, hahn(20e-6), o);
  CHECK(std::abs(coherence(mixed.state, 0).c - coherence(pure.state, 0).c) < 1e-10);
  CHECK(pure.report.norm_defect < 1e-10);
}

TEST_CASE("relabelling spins leaves the signal unchanged") {
  Rng r(21);
  EngineOptions o;
  o.mode = FrameMode::Lab;
  for (int i = 0; i < 6; ++i) {
    SpinCluster c = random_cluster(r, 3);
    const auto s = hahn(r.uniform(5e-6, 80e-6));
    std::vector<std::size_t> perm{2, 0, 1};
    const cplx a = coherence(evolve(c, s, o).state, 0).c;
    const cplx b = coherence(evolve(subsystem(c, perm), s, o).state, 0).c;
    CHECK(std::abs(a - b) < 1e-10);
  }
}

TEST_CASE("ideal swap exchanges electron and memory") {
  const std::vector<int> dims{2, 2};
  const Mat u = ideal_swap_operator(dims, {1, 0}, 0, 0);
  CHECK(max_abs(u * u - Mat::Identity(4, 4)) < 1e-15);
  Vec in = Vec::Zero(4);
  in(0) = in(2) = 1.0 / std::sqrt(2.0);  // electron superposition, memory in its first level
  Vec out = u * in;
  CHECK(std::abs(out(0) - in(0)) < 1e-15);
  CHECK(std::abs(out(1) - in(2)) < 1e-15);
  CHECK(std::abs(coherence(QuantumState::pure(out, dims, {1, 0}), 0).c) < 1e-15);
  CHECK_THROWS_AS(ideal_swap_operator(dims, {1, 0}, 0, 3), ValidationError);
}

TEST_CASE("gate fidelity") {
  const Mat id = Mat::Identity(4, 4);
  CHECK(gate_fidelity(id, id) == doctest::Approx(1.0));
  CHECK(gate_fidelity(id, std::exp(kI * 0.7) * id) == doctest::Approx(1.0));
  Mat x = Mat::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1.0;
  CHECK(gate_fidelity(Mat::Identity(2, 2), x) == doctest::Approx(0.0));
  CHECK_THROWS_AS(gate_fidelity(id, x), ValidationError);
  CHECK_THROWS_AS(gate_fidelity(Mat::Zero(2, 2), x), DomainError);
}

TEST_CASE("engine input checks") {
  SpinCluster c;
  c.add(Species::C13, Vec3(0, 0, kHz));
  EngineOptions o;
  o.steps_per_period = 0;
  CHECK_THROWS_AS(evolve(c, hahn(1e-6), o), ValidationError);
  Vec psi = Vec::Zero(2);
  psi(0) = 1.0;
  CHECK_THROWS_AS(evolve(QuantumState::pure(psi, {2}, {1, 0}), c, hahn(1e-6)), ValidationError);
  ControlSchedule swap = free_run(1e-6);
  swap.add(0.0, SwapGate{4, false, false});
  CHECK_THROWS_AS(evolve(c, swap), ValidationError);
  SpinCluster bad = c;
  bad.polarization[0] = 1.5;
  CHECK_THROWS_AS(evolve(bad, hahn(1e-6)), ValidationError);
  EngineOptions lv;
  lv.electron_levels = 4;
  CHECK_THROWS_AS(evolve(c, hahn(1e-6), lv), ValidationError);
}

TEST_CASE("signed coherence projects on the reference phase") {
  CHECK(signed_coherence(cplx(0.3, 0.4)) == doctest::Approx(0.3));
  CHECK(signed_coherence(cplx(0.0, -0.5), cplx(0.0, 2.0)) == doctest::Approx(-0.5));
  CHECK(signed_coherence(cplx(1.0, 1.0), cplx(0.0, 0.0)) == doctest::Approx(1.0));
}
