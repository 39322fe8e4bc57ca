#include "delecho/nitrogen_swap.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "delecho/errors.hpp"

namespace delecho {
namespace {

int idx(int ms, int mn) { return (1 - ms) * 3 + (1 - mn); }

Mat qubit_rotation(double axis, double angle) {
  Mat r(2, 2);
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  r << c, -kI * s * std::exp(cplx(0.0, -axis)), -kI * s * std::exp(cplx(0.0, axis)), c;
  return r;
}

Mat swap4() {
  Mat g = Mat::Zero(4, 4);
  g(0, 0) = g(3, 3) = 1.0;
  g(1, 2) = g(2, 1) = 1.0;
  return g;
}

enum class Op { Electron, Nitrogen, Free };
struct Step {
  Op op;
  double angle;  // rotation angle, or duration for Free
  double axis;
};

class SwapSimulator {
 public:
  SwapSimulator(const NitrogenSwapOptions& o, const PhysicalConstants& c) : opt_(o) {
    h0_ = nitrogen_hamiltonian(o.B_z, o.include_flip_flop, c);
    hx_ = nitrogen_drive_operator(o.rf_drives_electron, c);
    Eigen::SelfAdjointEigenSolver<Mat> es(h0_);
    ed_.resize(9);
    vd_ = Mat::Zero(9, 9);
    // Label dressed states by their dominant bare component.
    for (int k = 0; k < 9; ++k) {
      Eigen::Index j;
      es.eigenvectors().col(k).cwiseAbs().maxCoeff(&j);
      ed_(j) = es.eigenvalues()(k);
      vd_.col(j) = es.eigenvectors().col(k) * std::exp(cplx(0.0, -std::arg(es.eigenvectors()(j, k))));
    }
    qs_ = {idx(1, 1), idx(1, 0), idx(0, 1), idx(0, 0)};
    const double e0 = ed_(qs_[0]), e1 = ed_(qs_[1]), e2 = ed_(qs_[2]), e3 = ed_(qs_[3]);
    const double a = (e0 + e1 + e2 + e3) / 4.0;
    const double g = (e0 - e1 - e2 + e3) / 4.0;
    const double b = (e0 + e1 - e2 - e3) / 4.0;
    const double cc = (e0 - e1 + e2 - e3) / 4.0;
    w_e_ = 2.0 * b;
    w_n_ = 2.0 * cc;
    eloc_ = ed_;
    eloc_(qs_[0]) = a + b + cc;
    eloc_(qs_[1]) = a + b - cc;
    eloc_(qs_[2]) = a - b + cc;
    eloc_(qs_[3]) = a - b - cc;
    p0_ = M_PI / std::abs(g);
    tzz_ = M_PI / (4.0 * std::abs(g));
    ce_ = melem(idx(1, 0), idx(0, 0));
    cn_[0] = melem(idx(1, 1), idx(1, 0));
    cn_[1] = melem(idx(0, 1), idx(0, 0));
    wn_[0] = ed_(idx(1, 1)) - ed_(idx(1, 0));
    wn_[1] = ed_(idx(0, 1)) - ed_(idx(0, 0));
    b_mw_ = M_PI / (opt_.mw_pi_duration * std::abs(ce_));
  }

  double tzz() const { return tzz_; }

  // Returns the realized operator in the local frame.
  Mat run(const std::vector<Step>& ops, double& t_out) {
    Mat u = Mat::Identity(9, 9);
    double t = 0.0;
    for (const auto& s : ops) {
      if (s.op == Op::Electron) {
        const double dur = s.angle / M_PI * opt_.mw_pi_duration;
        const double ph = lab_phase(s.axis, w_e_, std::abs(w_e_), ce_, t);
        u = drive(u, t, t + dur, b_mw_, std::abs(w_e_), ph);
        t += dur;
      } else if (s.op == Op::Nitrogen) {
        const double t0 = t;
        for (int br = 0; br < 2; ++br) {
          const double wd = std::abs(wn_[br]);
          const double dur = s.angle / (std::abs(cn_[br]) * opt_.rf_amplitude);
          const double ph = lab_phase(s.axis, w_n_, wd, cn_[br], t0);
          u = drive(u, t, t + dur, opt_.rf_amplitude, wd, ph);
          t += dur;
        }
        // Pad to a multiple of the conditional-phase period.
        const double len = t - t0;
        const double pad = std::ceil(len / p0_) * p0_ - len;
        u = expm_hermitian(h0_, pad) * u;
        t += pad;
      } else {
        u = expm_hermitian(h0_, s.angle) * u;
        t += s.angle;
      }
    }
    t_out = t;
    Mat frame = Mat::Zero(9, 9);
    for (int i = 0; i < 9; ++i) frame(i, i) = std::exp(cplx(0.0, eloc_(i) * t));
    return frame * vd_.adjoint() * u * vd_;
  }

  Mat qubit_block(const Mat& g9) const {
    Mat g(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) g(i, j) = g9(qs_[i], qs_[j]);
    return g;
  }

  std::size_t steps = 0;

 private:
  cplx melem(int i, int j) const { return vd_.col(i).dot(hx_ * vd_.col(j)); }

  // Lab phase giving local-frame rotation axis `axis` at time tref.
  static double lab_phase(double axis, double wloc, double wd, cplx cel, double tref) {
    if (wloc > 0) return axis - (wd - std::abs(wloc)) * tref + std::arg(cel);
    return -axis - std::arg(cel) - (wd - std::abs(wloc)) * tref;
  }

  Mat drive(const Mat& u_in, double t0, double t1, double amp, double w, double phi) {
    const double period = 2.0 * M_PI / w;
    const double dt = period / opt_.steps_per_period;
    auto step = [&](double t, double h) {
      ++steps;
      return expm_hermitian(h0_ + amp * std::cos(w * (t + h / 2.0) + phi) * hx_, h);
    };
    Mat u = u_in;
    const auto nfull = static_cast<long>(std::floor((t1 - t0) / dt + 1e-9));
    const long m = nfull / opt_.steps_per_period;
    if (m > 0) {
      Mat up = Mat::Identity(9, 9);
      for (int s = 0; s < opt_.steps_per_period; ++s) up = step(t0 + s * dt, dt) * up;
      u = matrix_power(up, static_cast<std::uint64_t>(m)) * u;
    }
    double t = t0 + static_cast<double>(m) * opt_.steps_per_period * dt;
    while (t < t1 - 1e-15) {
      const double h = std::min(dt, t1 - t);
      u = step(t, h) * u;
      t += h;
    }
    return u;
  }

  NitrogenSwapOptions opt_;
  Mat h0_, hx_, vd_;
  Eigen::VectorXd ed_, eloc_;
  std::array<int, 4> qs_{};
  double w_e_ = 0, w_n_ = 0, p0_ = 0, tzz_ = 0, b_mw_ = 0;
  cplx ce_;
  std::array<cplx, 2> cn_{};
  std::array<double, 2> wn_{};
};

}  // namespace

Mat nitrogen_hamiltonian(double B, bool flip_flop, const PhysicalConstants& c) {
  if (!(B > 0.0)) throw DomainError("nitrogen_hamiltonian: B_z must be positive");
  const SpinOps s = spin_ops(3);
  const Mat i3 = Mat::Identity(3, 3);
  Mat h = kron(c.D * s.z * s.z - c.gamma_e * B * s.z, i3) +
          kron(i3, c.P_N * s.z * s.z - c.gamma_of(Species::N14) * B * s.z) + c.A_par_N * kron(s.z, s.z);
  if (flip_flop) h += c.A_perp_N * (kron(s.x, s.x) + kron(s.y, s.y));
  return h;
}

Mat nitrogen_drive_operator(bool rf_drives_electron, const PhysicalConstants& c) {
  const SpinOps s = spin_ops(3);
  const Mat i3 = Mat::Identity(3, 3);
  Mat hx = -c.gamma_of(Species::N14) * kron(i3, s.x);
  if (rf_drives_electron) hx -= c.gamma_e * kron(s.x, i3);
  return hx;
}

NitrogenSwapResult simulate_nitrogen_swap(const NitrogenSwapOptions& opt, const PhysicalConstants& c) {
  if (!(opt.mw_pi_duration > 0.0) || !(opt.rf_amplitude > 0.0) || opt.steps_per_period < 1)
    throw DomainError("nitrogen swap: durations, amplitudes and sampling must be positive");
  SwapSimulator sim(opt, c);
  NitrogenSwapResult r;

  // Calibrate the electron phase accumulated during one nitrogen pi/2 block.
  {
    double t;
    const Mat g = sim.qubit_block(sim.run({{Op::Nitrogen, M_PI / 2, 0.0}}, t));
    const Mat target = kron(Mat::Identity(2, 2), qubit_rotation(0.0, M_PI / 2));
    const Mat m = target.adjoint() * g;
    r.ac_phase = std::arg(m(0, 0) / m(2, 2));
  }

  const double tzz = sim.tzz();
  const std::vector<Step> base = {
      {Op::Nitrogen, M_PI / 2, 1.5 * M_PI}, {Op::Electron, M_PI / 2, 1.5 * M_PI}, {Op::Free, tzz, 0},
      {Op::Electron, M_PI / 2, M_PI / 2},   {Op::Nitrogen, M_PI / 2, M_PI / 2},    {Op::Nitrogen, M_PI / 2, M_PI},
      {Op::Electron, M_PI / 2, M_PI},       {Op::Free, tzz, 0},                     {Op::Electron, M_PI / 2, 0.0},
      {Op::Nitrogen, M_PI / 2, 0.0},        {Op::Free, tzz, 0}};
  std::vector<Step> ops;
  for (const auto& s : base) {
    ops.push_back(s);
    if (s.op == Op::Nitrogen && opt.ac_shift_compensation) {
      // z(theta) as x(pi/2) y(theta) x(-pi/2), applied in time order.
      const double th = std::fmod(std::fmod(r.ac_phase, 2 * M_PI) + 2 * M_PI, 2 * M_PI);
      ops.push_back({Op::Electron, M_PI / 2, M_PI});
      ops.push_back({Op::Electron, th, M_PI / 2});
      ops.push_back({Op::Electron, M_PI / 2, 0.0});
    }
  }
  r.gate9 = sim.run(ops, r.duration);
  r.gate4 = sim.qubit_block(r.gate9);
  const Mat sw = swap4();
  r.fidelity = std::abs((sw.adjoint() * r.gate4).trace()) / 4.0;
  r.steps = sim.steps;
  return r;
}

}  // namespace delecho
