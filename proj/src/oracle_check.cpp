#include "delecho/oracle_check.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "delecho/errors.hpp"
#include "delecho/oracles.hpp"

namespace delecho {

double level_precession(const Vec3& A, double B_z, int m_s, FrameMode mode, Species sp, const PhysicalConstants& c) {
  const double g = c.gamma_of(sp);
  if (mode == FrameMode::Rwa) return std::abs(g * B_z - m_s * A.z());
  return (g * B_z * Vec3::UnitZ() - m_s * A).norm();
}

namespace {

SpinCluster probe_cluster(const EchoProbe& p) {
  SpinCluster c;
  c.B_z = p.B_z;
  NuclearSpin n;
  n.species = Species::N14;
  c.add(n);
  c.polarization[0] = 1.0;
  for (const auto& t : p.targets) {
    Vec3 a = t;
    a.z() *= p.engine_A_sign;
    c.add(Species::C13, a);
  }
  std::vector<PairCoupling> cp;
  for (auto pc : p.couplings) {
    pc.i += 1;
    pc.j += 1;
    cp.push_back(pc);
  }
  c.couplings = cp;
  return c;
}

ControlSchedule probe_schedule(const EchoProbe& p, double theta, const EngineOptions& opt) {
  if (p.eta != 0.5 && p.eta != 1.0) throw DomainError("probe: eta must be 1/2 or 1");
  if (p.targets.empty()) throw DomainError("probe: no targets");
  EchoSpec spec;
  spec.tau = p.tau;
  spec.delay.kind = DelayKind::MemorySwap;
  spec.delay.duration = p.t_delay;
  spec.delay.memory = 0;
  spec.manifold.window_down = p.eta == 1.0 ? -1 : 0;
  spec.manifold.delay_down = 0;
  spec.final_pi = false;
  RfTarget rf;
  rf.frequency = p.rf_frequency ? *p.rf_frequency
                                : level_precession(p.targets[0], p.B_z, 1, opt.mode, Species::C13, opt.constants);
  rf.theta = theta;
  rf.phase = p.rf_phase;
  spec.rf.push_back(rf);
  return build_delayed_entanglement_echo(spec, opt.constants);
}

}  // namespace

ProbeResult run_memory_echo(const EchoProbe& p, const EngineOptions& opt) {
  const SpinCluster c = probe_cluster(p);
  ProbeResult r;
  const auto run = evolve(c, probe_schedule(p, p.theta, opt), opt);
  const auto ref = evolve(c, probe_schedule(p, 0.0, opt), opt);
  r.c = coherence(run.state, run.down_level).c;
  r.reference = coherence(ref.state, ref.down_level).c;
  r.L = std::abs(r.c);
  r.L_signed = signed_coherence(r.c, r.reference);
  r.report = run.report;
  r.report.merge(ref.report);
  return r;
}

std::vector<OracleRow> run_oracle_check(const OracleCheckOptions& o) {
  std::vector<OracleRow> rows;
  const double sgn = o.flip_A_sign ? -1.0 : 1.0;
  auto add = [&](std::string name, double oracle, double engine, double tol) {
    OracleRow r;
    r.name = std::move(name);
    r.oracle = oracle;
    r.engine = engine;
    r.error = std::abs(oracle - engine);
    r.tolerance = tol;
    r.pass = std::isfinite(engine) && r.error <= tol;
    rows.push_back(r);
  };
  const double kHz = kTwoPi * 1e3;
  EngineOptions rwa;
  EngineOptions lab;
  lab.mode = FrameMode::Lab;

  {
    EchoProbe p;
    p.targets = {Vec3(0, 0, 12 * kHz)};
    p.tau = 15e-6;
    p.theta = 2.1;
    p.engine_A_sign = sgn;
    const double want = single_spin_coherence({12 * kHz, 0.5, 15e-6, 2.1, 1});
    add("single_spin", want, run_memory_echo(p, rwa).L_signed, o.tol_rwa);
    p.eta = 1.0;
    add("single_spin_eta1", single_spin_coherence({12 * kHz, 1.0, 15e-6, 2.1, 1}), run_memory_echo(p, rwa).L_signed,
        o.tol_rwa);
    p.eta = 0.5;
    p.targets = {Vec3(1 * kHz, 0, 12 * kHz)};
    add("single_spin_lab", want, run_memory_echo(p, lab).L_signed, o.tol_engine);
  }
  {
    EchoProbe p;
    p.targets = {Vec3(0, 0, 9 * kHz), Vec3(0, 0, 9 * kHz)};
    p.tau = 20e-6;
    p.theta = M_PI;
    p.engine_A_sign = sgn;
    SignalParams s{9 * kHz, 0.5, 20e-6, M_PI, 2};
    EngineOptions opt = rwa;
    opt.nuclear_couplings = false;
    add("multi_spin_p2", multi_spin_coherence({s}), run_memory_echo(p, opt).L_signed, o.tol_rwa);
  }
  {
    const double A = 7 * kHz, tau = 25e-6;
    const auto g = entangling_gate_phase(A, 0.5, tau);
    const double want = ((g.u_plus * g.u_minus.adjoint()).trace() / 2.0).real();
    EchoProbe p;
    p.targets = {Vec3(0, 0, A)};
    p.tau = tau;
    p.theta = M_PI;
    p.engine_A_sign = sgn;
    add("entangling_gate_phase", want, run_memory_echo(p, rwa).L_signed, o.tol_rwa);
  }
  {
    const double Aj = 40 * kHz, Ak = -40 * kHz, d = 0.6 * kHz, tau = 20e-6;
    EchoProbe p;
    p.targets = {Vec3(0, 0, Aj), Vec3(0, 0, Ak)};
    DipolarCoupling dc;
    dc.d = d;
    p.couplings = {{0, 1, dc}};
    p.eta = 1.0;
    p.tau = tau;
    p.theta = M_PI;
    p.t_delay = 40e-3;
    // Resonance of the driven spin while its partner sits in the first basis state.
    p.rf_frequency = level_precession(p.targets[0], p.B_z, 1, FrameMode::Rwa) - 0.5 * d;
    p.engine_A_sign = sgn;
    const double P = 0.5 * (1.0 + run_memory_echo(p, rwa).L_signed);
    add("type_h_pair", type_h_pair_population(Aj, 1.0, tau), P, o.tol_engine);
  }
  {
    const double A = 10 * kHz, d = 5 * kHz, Bx = 2.0 * kTwoPi * 50.0 / default_constants().gamma_of(Species::C13);
    SpinCluster c;
    c.B_z = 0.467;
    c.add(Species::C13, Vec3(0, 0, sgn * A));
    c.add(Species::C13, Vec3(0, 0, sgn * A));
    DipolarCoupling dc;
    dc.d = d;
    c.couplings = std::vector<PairCoupling>{{0, 1, dc}};
    const double wn = level_precession(Vec3(0, 0, A), c.B_z, 1, FrameMode::Rwa);
    const auto pred = type_d_pair_predictions(d, default_constants().gamma_of(Species::C13), Bx, A, 1.0, 0.0, wn);
    ControlSchedule s;
    s.protocol = "fragment";
    RfDrive rf;
    rf.frequency = pred.omega_low;
    rf.amplitude = Bx;
    rf.t0 = 0.0;
    rf.t1 = pred.flip_time;
    s.add(0.0, rf);
    s.total_duration = pred.flip_time;
    Vec psi = Vec::Zero(8);
    psi(0) = 1.0;  // electron +1, both nuclei in the first basis state
    auto res = evolve(QuantumState::pure(psi, {2, 2, 2}, {1, 0}), c, s, rwa);
    const cplx t0 = (res.state.psi(1) + res.state.psi(2)) / std::sqrt(2.0);
    add("type_d_pair_flip", 1.0, std::norm(t0), o.tol_engine);
  }
  {
    // CP addressing of one spin through its transverse coupling (lab frame).
    const double Apar = 8 * kHz, Aperp = 10 * kHz;
    SpinCluster c;
    c.B_z = 0.467;
    const Vec3 A(Aperp, 0, sgn * Apar);
    c.add(Species::C13, A);
    const double g = default_constants().gamma_of(Species::C13);
    const Vec3 v = g * c.B_z * Vec3::UnitZ() - 0.5 * Vec3(Aperp, 0, Apar);
    const double wn = v.norm();
    const auto hv = project_hyperfine(Vec3(Aperp, 0, Apar), v);
    const double tau_cp = M_PI / wn;
    const int n = 500;
    const auto dd = dd_addressing_hamiltonian(hv.A_perp, cp_coefficient(1), 0.5, DdMode::Pulsed);
    const ControlSchedule s = build_cp(n, tau_cp);
    auto res = evolve(c, s, lab);
    add("dd_addressing_cp", std::abs(std::cos(dd.strength * n * tau_cp)), coherence(res.state, 0).L,
        o.tol_engine);
  }
  {
    const auto gts = ideal_two_qubit_gates();
    double defect = 0.0;
    for (const Mat* m : {&gts.u_zx, &gts.u_zy, &gts.u_zz, &gts.u_xx, &gts.u_yy, &gts.iswap, &gts.swap})
      defect = std::max(defect, unitarity_defect(*m));
    add("gates_unitary", 0.0, defect, 1e-14);
    Mat perm = Mat::Zero(4, 4);
    perm(0, 0) = perm(3, 3) = perm(1, 2) = perm(2, 1) = 1.0;
    add("swap_permutation", 0.0, max_abs(gts.swap - perm), 1e-14);
    const double comm = std::max({max_abs(gts.u_xx * gts.u_yy - gts.u_yy * gts.u_xx),
                                  max_abs(gts.u_xx * gts.u_zz - gts.u_zz * gts.u_xx),
                                  max_abs(gts.u_yy * gts.u_zz - gts.u_zz * gts.u_yy)});
    add("gates_commute", 0.0, comm, 1e-14);
    add("iswap_phase_i", 0.0, std::abs(gts.iswap(1, 2) - kI) + std::abs(gts.iswap(2, 1) - kI), 1e-14);
  }
  {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    double range_violation = 0.0, symmetry = 0.0;
    for (int i = 0; i < 500; ++i) {
      SignalParams s{u(rng) * kHz, i % 2 ? 1.0 : 0.5, std::abs(u(rng)) * 1e-5, u(rng), 1};
      const double L = single_spin_coherence(s);
      range_violation = std::max({range_violation, std::cos(s.theta_rf) - L, L - 1.0});
      SignalParams m = s;
      m.theta_rf = -s.theta_rf;
      symmetry = std::max(symmetry, std::abs(single_spin_coherence(m) - L));
      const double phase = 2.0 * s.eta * s.A_parallel * s.tau;
      SignalParams r = s;
      r.tau = std::abs((2 * M_PI - phase) / (2.0 * s.eta * s.A_parallel));
      symmetry = std::max(symmetry, std::abs(single_spin_coherence(r) - L));
    }
    add("coherence_range", 0.0, std::max(0.0, range_violation), 1e-14);
    add("coherence_symmetry", 0.0, symmetry, 1e-10);
  }
  return rows;
}

void print_oracle_table(std::ostream& os, const std::vector<OracleRow>& rows) {
  os << std::left << std::setw(24) << "check" << std::right << std::setw(16) << "oracle" << std::setw(16) << "engine"
     << std::setw(12) << "error" << std::setw(10) << "tol" << "  result\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(24) << r.name << std::right << std::setprecision(9) << std::setw(16) << r.oracle
       << std::setw(16) << r.engine << std::setprecision(2) << std::scientific << std::setw(12) << r.error
       << std::setw(10) << r.tolerance << std::defaultfloat << "  " << (r.pass ? "PASS" : "FAIL") << "\n";
  }
}

}  // namespace delecho
