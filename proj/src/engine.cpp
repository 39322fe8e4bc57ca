#include "delecho/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "delecho/errors.hpp"
#include "delecho/kernels/kernels.hpp"
#include "delecho/lindblad.hpp"

namespace delecho {

// ---------------------------------------------------------------- state

QuantumState QuantumState::pure(Vec psi, std::vector<int> dims, std::vector<int> levels) {
  QuantumState s;
  s.rep = Rep::Pure;
  s.psi = std::move(psi);
  s.dims = std::move(dims);
  s.electron_levels = std::move(levels);
  if (static_cast<std::size_t>(s.psi.size()) != s.dim()) throw ValidationError("state: dims do not match data");
  return s;
}

QuantumState QuantumState::density(Mat rho, std::vector<int> dims, std::vector<int> levels) {
  QuantumState s;
  s.rep = Rep::Density;
  s.rho = std::move(rho);
  s.dims = std::move(dims);
  s.electron_levels = std::move(levels);
  if (static_cast<std::size_t>(s.rho.rows()) != s.dim() || s.rho.rows() != s.rho.cols())
    throw ValidationError("state: dims do not match data");
  return s;
}

std::size_t QuantumState::dim() const {
  std::size_t d = 1;
  for (int x : dims) d *= static_cast<std::size_t>(x);
  return d;
}

Mat QuantumState::density_matrix() const { return rep == Rep::Density ? rho : Mat(psi * psi.adjoint()); }

int QuantumState::level_index(int m_s) const {
  for (std::size_t i = 0; i < electron_levels.size(); ++i)
    if (electron_levels[i] == m_s) return static_cast<int>(i);
  return -1;
}

void QuantumState::validate(double norm_tol, double herm_tol, double trace_tol, double eig_floor) const {
  if (dims.empty() || electron_levels.size() != static_cast<std::size_t>(dims[0]))
    throw ValidationError("state: electron levels do not match the first dimension");
  if (rep == Rep::Pure) {
    if (std::abs(psi.norm() - 1.0) > norm_tol) throw ValidationError("state: vector not normalized");
    return;
  }
  if (max_abs(rho - rho.adjoint()) > herm_tol) throw ValidationError("state: density matrix not Hermitian");
  if (std::abs(rho.trace() - 1.0) > trace_tol) throw ValidationError("state: trace differs from 1");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < eig_floor) throw ValidationError("state: negative eigenvalue");
}

// ---------------------------------------------------------------- cluster

std::vector<int> SpinCluster::nuclear_dims() const {
  std::vector<int> d;
  for (const auto& s : spins) d.push_back(s.dim());
  return d;
}

void SpinCluster::add(const NuclearSpin& s, const PhysicalConstants& c) {
  spins.push_back(s);
  hyperfine.push_back(hyperfine_field(s, c));
  polarization.emplace_back();
}

void SpinCluster::add(Species sp, const Vec3& A, const Vec3& position) {
  NuclearSpin s;
  s.species = sp;
  s.position = position;
  s.hyperfine_override = A;
  spins.push_back(s);
  hyperfine.push_back(A);
  polarization.emplace_back();
}

void SpinCluster::validate() const {
  if (hyperfine.size() != spins.size() || polarization.size() != spins.size())
    throw ValidationError("cluster: per-spin arrays differ in length");
  if (!(B_z > 0.0)) throw ValidationError("cluster: B_z must be positive");
  for (const auto& p : polarization)
    if (p && !(*p >= 0.0 && *p <= 1.0)) throw ValidationError("cluster: polarization outside [0, 1]");
  if (couplings)
    for (const auto& pc : *couplings)
      if (pc.i >= spins.size() || pc.j >= spins.size() || pc.i == pc.j)
        throw ValidationError("cluster: coupling refers to a missing spin");
}

SpinCluster cluster_from_bath(const SpinBath& bath, const std::vector<std::size_t>& indices) {
  SpinCluster c;
  c.B_z = bath.B_z;
  auto take = [&](std::size_t i) {
    c.spins.push_back(bath.spins.at(i));
    c.hyperfine.push_back(bath.hyperfine.at(i).A);
    c.polarization.emplace_back();
  };
  if (indices.empty())
    for (std::size_t i = 0; i < bath.size(); ++i) take(i);
  else
    for (auto i : indices) take(i);
  return c;
}

SpinCluster subsystem(const SpinCluster& full, const std::vector<std::size_t>& idx) {
  SpinCluster c;
  c.B_z = full.B_z;
  std::vector<long> pos(full.size(), -1);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto i = idx[k];
    if (i >= full.size()) throw ValidationError("subsystem: index out of range");
    if (pos[i] >= 0) throw ValidationError("subsystem: repeated index");
    pos[i] = static_cast<long>(k);
    c.spins.push_back(full.spins[i]);
    c.hyperfine.push_back(full.hyperfine[i]);
    c.polarization.push_back(full.polarization[i]);
  }
  if (full.couplings) {
    std::vector<PairCoupling> sub;
    for (const auto& pc : *full.couplings)
      if (pos[pc.i] >= 0 && pos[pc.j] >= 0)
        sub.push_back({static_cast<std::size_t>(pos[pc.i]), static_cast<std::size_t>(pos[pc.j]), pc.coupling});
    c.couplings = std::move(sub);
  }
  return c;
}

std::vector<PairCoupling> pair_couplings(const SpinCluster& c, const PhysicalConstants& k) {
  if (c.couplings) return *c.couplings;
  std::vector<PairCoupling> out;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      out.push_back({i, j,
                     dipolar_coupling(c.spins[i].position, c.spins[j].position, k.gamma_of(c.spins[i].species),
                                      k.gamma_of(c.spins[j].species), k)});
  return out;
}

// ---------------------------------------------------------------- reports

void PropagationReport::merge(const PropagationReport& o) {
  steps += o.steps;
  max_step = std::max(max_step, o.max_step);
  unitarity_defect = std::max(unitarity_defect, o.unitarity_defect);
  trace_defect = std::max(trace_defect, o.trace_defect);
  hermiticity_defect = std::max(hermiticity_defect, o.hermiticity_defect);
  norm_defect = std::max(norm_defect, o.norm_defect);
  min_eigenvalue = std::min(min_eigenvalue, o.min_eigenvalue);
  failed = failed || o.failed;
  messages.insert(messages.end(), o.messages.begin(), o.messages.end());
}

// ---------------------------------------------------------------- frames

FrameMap choose_frames(const ControlSchedule& s, const SpinCluster& c, const EngineOptions& opt) {
  FrameMap f;
  if (opt.mode == FrameMode::Lab) return f;
  for (const auto& e : s.events)
    if (const auto* lg = std::get_if<LGField>(&e.body))
      if (!f.count(lg->species))
        f[lg->species] = std::abs(opt.constants.gamma_of(lg->species)) * c.B_z + lg->delta;
  for (const auto& e : s.events)
    if (const auto* rf = std::get_if<RfDrive>(&e.body))
      if (!f.count(rf->species)) f[rf->species] = rf->frequency;
  return f;
}

namespace {

double frame_sign(double gamma) { return gamma > 0.0 ? -1.0 : 1.0; }

// Cached operators for one cluster.
struct Context {
  const SpinCluster& c;
  const EngineOptions& opt;
  FrameMap frames;
  std::vector<int> ndims;
  Eigen::Index dn = 1;
  std::vector<Mat> ix, iy, iz;
  Mat hnn;
  std::map<int, Mat> h0;
  std::map<Species, Mat> sx, sy;
  Mat lab_x;

  Context(const SpinCluster& cl, const EngineOptions& o, FrameMap fr, const std::vector<int>& levels)
      : c(cl), opt(o), frames(std::move(fr)) {
    ndims = c.nuclear_dims();
    for (int d : ndims) dn *= d;
    const auto& k = opt.constants;
    const bool rwa = opt.mode == FrameMode::Rwa;
    for (std::size_t j = 0; j < c.size(); ++j) {
      const SpinOps so = spin_ops(ndims[j]);
      ix.push_back(embed(so.x, ndims, j));
      iy.push_back(embed(so.y, ndims, j));
      iz.push_back(embed(so.z, ndims, j));
    }
    lab_x = Mat::Zero(dn, dn);
    for (std::size_t j = 0; j < c.size(); ++j) {
      const Species sp = c.spins[j].species;
      if (!sx.count(sp)) {
        sx[sp] = Mat::Zero(dn, dn);
        sy[sp] = Mat::Zero(dn, dn);
      }
      sx[sp] += ix[j];
      sy[sp] += iy[j];
      lab_x += k.gamma_of(sp) * ix[j];
    }
    hnn = Mat::Zero(dn, dn);
    if (opt.nuclear_couplings && c.size() > 1) {
      for (const auto& pc : pair_couplings(c, k)) {
        const auto i = pc.i, j = pc.j;
        if (rwa) {
          if (c.spins[i].species == c.spins[j].species)
            hnn += pc.coupling.d * (iz[i] * iz[j] - 0.5 * (ix[i] * ix[j] + iy[i] * iy[j]));
          else
            hnn += pc.coupling.d * iz[i] * iz[j];
        } else {
          const Mat* oi[3] = {&ix[i], &iy[i], &iz[i]};
          const Mat* oj[3] = {&ix[j], &iy[j], &iz[j]};
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
              if (pc.coupling.tensor(a, b) != 0.0) hnn += pc.coupling.tensor(a, b) * (*oi[a]) * (*oj[b]);
        }
      }
    }
    std::optional<NitrogenShifts> shifts;
    for (int m : levels) {
      Mat h = Mat::Zero(dn, dn);
      for (std::size_t j = 0; j < c.size(); ++j) {
        const Species sp = c.spins[j].species;
        const double g = k.gamma_of(sp);
        const Vec3& A = c.hyperfine[j];
        double zcoef = -g * c.B_z;
        if (auto it = frames.find(sp); it != frames.end()) zcoef -= frame_sign(g) * it->second;
        if (rwa) {
          h += (zcoef + m * A.z()) * iz[j];
        } else {
          h += zcoef * iz[j];
          if (m != 0) h += m * (A.x() * ix[j] + A.y() * iy[j] + A.z() * iz[j]);
        }
        if (sp == Species::N14) {
          h += k.P_N * iz[j] * iz[j];
          if (opt.nitrogen_shifts) {
            if (!shifts) shifts = nitrogen_virtual_shifts(c.B_z, k);
            h += embed(shifts->for_level(m), ndims, j);
          }
        }
      }
      h0[m] = h;
    }
  }

  Mat level(int m, const std::vector<Tone>& tones, double t, bool couplings) const {
    Mat h = h0.at(m);
    if (couplings) h += hnn;
    add_drive(h, tones, t);
    return h;
  }

  void add_drive(Mat& h, const std::vector<Tone>& tones, double t) const {
    const auto& k = opt.constants;
    for (const auto& tn : tones) {
      if (tn.amplitude == 0.0) continue;
      if (opt.mode == FrameMode::Lab) {
        h += (-tn.amplitude * std::cos(tn.frequency * t + tn.phase)) * lab_x;
        continue;
      }
      auto fit = frames.find(tn.species);
      auto xit = sx.find(tn.species);
      if (fit == frames.end() || xit == sx.end()) continue;
      const double g = k.gamma_of(tn.species);
      const double psi = tn.phase + (tn.frequency - fit->second) * t;
      const double amp = -0.5 * g * tn.amplitude;
      h += (amp * std::cos(psi)) * xit->second + (amp * frame_sign(g) * std::sin(psi)) * sy.at(tn.species);
    }
  }

  // Frequencies at which the drive terms oscillate in the working frame.
  std::vector<double> drive_frequencies(const std::vector<Tone>& tones) const {
    std::vector<double> out;
    for (const auto& tn : tones) {
      if (tn.amplitude == 0.0) continue;
      if (opt.mode == FrameMode::Lab) {
        out.push_back(std::abs(tn.frequency));
      } else {
        auto fit = frames.find(tn.species);
        if (fit == frames.end() || !sx.count(tn.species)) continue;
        const double w = std::abs(tn.frequency - fit->second);
        if (w > 0.0) out.push_back(w);
      }
    }
    return out;
  }
};

Mat electron_rotation(const std::vector<int>& levels, int up, int down, double angle, double phase) {
  const Eigen::Index de = static_cast<Eigen::Index>(levels.size());
  Mat u = Mat::Identity(de, de);
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  // exp(-i angle/2 (cos phase sx + sin phase sy)) on (up, down)
  u(up, up) = c;
  u(down, down) = c;
  u(up, down) = -kI * s * std::exp(cplx(0.0, -phase));
  u(down, up) = -kI * s * std::exp(cplx(0.0, phase));
  return u;
}

struct Stepper {
  const EngineOptions& opt;
  PropagationReport& rep;

  // Propagator over [t0, t1] of a Hamiltonian that is static when `freqs`
  // is empty and otherwise sampled at 1/steps_per_period of the fastest period.
  template <class HFun>
  Mat run(HFun&& hfun, double t0, double t1, const std::vector<double>& freqs) {
    const double len = t1 - t0;
    if (freqs.empty()) {
      ++rep.steps;
      rep.max_step = std::max(rep.max_step, len);
      return expm_hermitian(hfun(t0), len);
    }
    const double wmax = *std::max_element(freqs.begin(), freqs.end());
    const double dt = kTwoPi / (opt.steps_per_period * wmax);
    bool single = true;
    for (double w : freqs)
      if (std::abs(w - wmax) > 1e-12 * wmax) single = false;
    Mat u;
    Mat tmp;
    auto step = [&](double ta, double h) {
      Mat s = expm_hermitian(hfun(ta + 0.5 * h), h);
      ++rep.steps;
      rep.max_step = std::max(rep.max_step, h);
      if (u.size() == 0) {
        u = std::move(s);
      } else {
        gemm(s, u, tmp);
        u.swap(tmp);
      }
    };
    double t = t0;
    if (single) {
      const double period = kTwoPi / wmax;
      const auto nper = static_cast<std::uint64_t>(std::floor(len / period * (1.0 + 1e-12)));
      if (nper >= 1) {
        for (int i = 0; i < opt.steps_per_period; ++i) step(t0 + i * dt, dt);
        if (nper > 1) u = matrix_power(u, nper);
        t = t0 + static_cast<double>(nper) * period;
      }
    }
    const double rest = t1 - t;
    if (rest > 1e-15 * std::max(1.0, std::abs(t1))) {
      const auto n = static_cast<std::uint64_t>(std::ceil(rest / dt - 1e-9));
      const double h = rest / static_cast<double>(std::max<std::uint64_t>(n, 1));
      for (std::uint64_t i = 0; i < std::max<std::uint64_t>(n, 1); ++i) step(t + i * h, h);
    }
    if (u.size() == 0) {
      Eigen::Index d = hfun(t0).rows();
      u = Mat::Identity(d, d);
    }
    return u;
  }
};

void apply_unitary(QuantumState& st, const Mat& u) {
  if (st.rep == QuantumState::Rep::Pure) {
    st.psi = u * st.psi;
    return;
  }
  Mat tmp, out;
  gemm(u, st.rho, tmp);
  gemm_bh(tmp, u, out);
  st.rho.swap(out);
}

// U = blockdiag(U_a), electron index a major.
void apply_block_diagonal(QuantumState& st, const std::vector<Mat>& blocks) {
  const Eigen::Index dn = blocks.front().rows();
  const std::size_t ne = blocks.size();
  bool diagonal = true;
  for (const auto& b : blocks) diagonal = diagonal && is_diagonal(b);
  if (st.rep == QuantumState::Rep::Pure) {
    for (std::size_t a = 0; a < ne; ++a) st.psi.segment(a * dn, dn) = blocks[a] * st.psi.segment(a * dn, dn);
    return;
  }
  if (diagonal) {
    Vec p(static_cast<Eigen::Index>(ne) * dn);
    for (std::size_t a = 0; a < ne; ++a) p.segment(a * dn, dn) = blocks[a].diagonal();
    kernels::active().diag_sandwich(p.size(), p.size(), p.data(), p.data(), st.rho.data(), st.rho.rows());
    return;
  }
  Mat tmp, out;
  for (std::size_t a = 0; a < ne; ++a)
    for (std::size_t b = 0; b < ne; ++b) {
      Mat blk = st.rho.block(a * dn, b * dn, dn, dn);
      gemm(blocks[a], blk, tmp);
      gemm_bh(tmp, blocks[b], out);
      st.rho.block(a * dn, b * dn, dn, dn) = out;
    }
}

std::vector<std::size_t> strides_of(const std::vector<int>& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) s[k - 1] = s[k] * static_cast<std::size_t>(dims[k]);
  return s;
}

Mat embed_two_site(const Mat& g, const std::vector<int>& dims, std::size_t mem_site,
                   const std::vector<std::size_t>& e_idx, const std::vector<std::size_t>& m_idx) {
  // g acts on basis pairs (e_idx[a], m_idx[b]) ordered a-major; identity elsewhere.
  const std::size_t d = [&] {
    std::size_t x = 1;
    for (int v : dims) x *= static_cast<std::size_t>(v);
    return x;
  }();
  const auto st = strides_of(dims);
  const std::size_t ne = e_idx.size(), nm = m_idx.size();
  Mat u = Mat::Identity(d, d);
  for (std::size_t base = 0; base < d; ++base) {
    const std::size_t e = base / st[0];
    const std::size_t m = (base / st[mem_site]) % static_cast<std::size_t>(dims[mem_site]);
    if (e != 0 || m != 0) continue;  // iterate over the remaining sites once
    std::vector<std::size_t> sub;
    for (std::size_t a = 0; a < ne; ++a)
      for (std::size_t b = 0; b < nm; ++b) sub.push_back(base + e_idx[a] * st[0] + m_idx[b] * st[mem_site]);
    for (std::size_t r = 0; r < sub.size(); ++r)
      for (std::size_t c = 0; c < sub.size(); ++c) u(sub[r], sub[c]) = g(r, c);
  }
  return u;
}

}  // namespace

Mat level_hamiltonian(const SpinCluster& c, int m_s, const std::vector<Tone>& tones, double t,
                      const FrameMap& frames, const EngineOptions& opt, bool couplings) {
  c.validate();
  Context ctx(c, opt, frames, {m_s});
  return ctx.level(m_s, tones, t, couplings);
}

Mat build_hamiltonian(const SpinCluster& c, const std::vector<int>& levels, const std::vector<Tone>& tones, double t,
                      const FrameMap& frames, const EngineOptions& opt, const SpinLock* lock, int down_level) {
  c.validate();
  if (levels.empty()) throw ValidationError("build_hamiltonian: no electron levels");
  Context ctx(c, opt, frames, levels);
  const Eigen::Index dn = ctx.dn, de = static_cast<Eigen::Index>(levels.size());
  Mat h = Mat::Zero(de * dn, de * dn);
  for (Eigen::Index a = 0; a < de; ++a) h.block(a * dn, a * dn, dn, dn) = ctx.level(levels[a], tones, t, true);
  if (lock) {
    auto find = [&](int m) {
      for (Eigen::Index a = 0; a < de; ++a)
        if (levels[a] == m) return a;
      throw ValidationError("spin lock: qubit level missing");
    };
    const Eigen::Index up = find(1), dw = find(down_level);
    Mat e = Mat::Zero(de, de);
    e(up, dw) = 0.5 * lock->rabi * std::exp(cplx(0.0, -lock->phase));
    e(dw, up) = std::conj(e(up, dw));
    h += kron(e, Mat::Identity(dn, dn));
  }
  return h;
}

QuantumState initial_state(const SpinCluster& c, const std::vector<int>& levels, int down) {
  c.validate();
  const Eigen::Index de = static_cast<Eigen::Index>(levels.size());
  Eigen::Index up = -1, dw = -1;
  for (Eigen::Index a = 0; a < de; ++a) {
    if (levels[a] == 1) up = a;
    if (levels[a] == down) dw = a;
  }
  if (up < 0 || dw < 0 || up == dw) throw ValidationError("initial_state: qubit levels missing");
  Mat rho = Mat::Zero(de, de);
  rho(up, up) = rho(dw, dw) = rho(up, dw) = rho(dw, up) = 0.5;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const int d = c.spins[j].dim();
    Mat r = Mat::Identity(d, d) / static_cast<double>(d);
    if (c.polarization[j]) {
      r.setZero();
      r(0, 0) = *c.polarization[j];
      r(1, 1) = 1.0 - *c.polarization[j];
    }
    rho = kron(rho, r);
  }
  std::vector<int> dims{static_cast<int>(de)};
  for (int d : c.nuclear_dims()) dims.push_back(d);
  return QuantumState::density(std::move(rho), std::move(dims), levels);
}

std::vector<int> electron_levels_for(const ControlSchedule& s, const EngineOptions& opt,
                                     const std::optional<LindbladModel>& model) {
  int n = opt.electron_levels;
  if (n != 0 && n != 2 && n != 3) throw ValidationError("electron_levels must be 0, 2 or 3");
  if (n == 0) {
    n = model ? 3 : 2;
    for (const auto& e : s.events) {
      if (std::holds_alternative<ManifoldTransfer>(e.body) || std::holds_alternative<Illumination>(e.body)) n = 3;
      if (const auto* g = std::get_if<SwapGate>(&e.body))
        if (g->explicit_realization && opt.explicit_swap && opt.explicit_swap->rows() == 9) n = 3;
    }
  }
  if (n == 3) return {1, 0, -1};
  return {1, s.initial_down};
}

// ---------------------------------------------------------------- swaps

Mat ideal_swap_operator(const std::vector<int>& dims, const std::vector<int>& levels, int down, std::size_t memory) {
  const std::size_t site = memory + 1;
  if (site >= dims.size()) throw ValidationError("swap: memory spin index out of range");
  std::size_t up = levels.size(), dw = levels.size();
  for (std::size_t a = 0; a < levels.size(); ++a) {
    if (levels[a] == 1) up = a;
    if (levels[a] == down) dw = a;
  }
  if (up == levels.size() || dw == levels.size()) throw ValidationError("swap: qubit levels missing");
  Mat g = Mat::Identity(4, 4);
  g(1, 1) = g(2, 2) = 0.0;
  g(1, 2) = g(2, 1) = 1.0;
  return embed_two_site(g, dims, site, {up, dw}, {0, 1});
}

namespace {

Mat explicit_swap_operator(const Mat& gate, const std::vector<int>& dims, const std::vector<int>& levels, int down,
                           std::size_t memory) {
  const std::size_t site = memory + 1;
  if (site >= dims.size()) throw ValidationError("swap: memory spin index out of range");
  if (gate.rows() == 4 && gate.cols() == 4) {
    if (down != 0) throw ValidationError("explicit swap is realized in the (+1, 0) manifold");
    std::size_t up = 0, dw = 0;
    for (std::size_t a = 0; a < levels.size(); ++a) {
      if (levels[a] == 1) up = a;
      if (levels[a] == 0) dw = a;
    }
    return embed_two_site(gate, dims, site, {up, dw}, {0, 1});
  }
  if (gate.rows() == 9 && gate.cols() == 9) {
    if (levels != std::vector<int>{1, 0, -1} || dims[site] != 3)
      throw ValidationError("9x9 swap gate needs a three-level electron and a spin-1 memory");
    return embed_two_site(gate, dims, site, {0, 1, 2}, {0, 1, 2});
  }
  throw ValidationError("explicit swap gate must be 4x4 or 9x9");
}

void check_state(const QuantumState& st, PropagationReport& rep, const Tolerances& tol, bool dissipative,
                 bool eig) {
  if (st.rep == QuantumState::Rep::Pure) {
    rep.norm_defect = std::max(rep.norm_defect, std::abs(st.psi.norm() - 1.0));
    if (rep.norm_defect > tol.norm && !rep.failed) {
      rep.failed = true;
      rep.messages.push_back("norm drift beyond tolerance");
    }
    return;
  }
  rep.trace_defect = std::max(rep.trace_defect, std::abs(st.rho.trace() - 1.0));
  rep.hermiticity_defect = std::max(rep.hermiticity_defect, max_abs(st.rho - st.rho.adjoint()));
  if (eig) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (st.rho + st.rho.adjoint()), Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, es.eigenvalues().minCoeff());
  }
  const double floor = dissipative ? tol.lindblad_eig_floor : tol.eig_floor;
  std::string why;
  if (rep.trace_defect > tol.trace) why = "trace drift beyond tolerance";
  else if (rep.hermiticity_defect > tol.hermiticity) why = "hermiticity loss beyond tolerance";
  else if (rep.min_eigenvalue < floor) why = "negative eigenvalue beyond tolerance";
  if (!why.empty() && !rep.failed) {
    rep.failed = true;
    rep.messages.push_back(why);
  }
}

}  // namespace

// ---------------------------------------------------------------- evolve

EvolveResult evolve(const SpinCluster& c, const ControlSchedule& s, const EngineOptions& opt,
                    const std::optional<LindbladModel>& model) {
  const auto levels = electron_levels_for(s, opt, model);
  return evolve(initial_state(c, levels, s.initial_down), c, s, opt, model);
}

EvolveResult evolve(QuantumState st, const SpinCluster& c, const ControlSchedule& s, const EngineOptions& opt,
                    const std::optional<LindbladModel>& model) {
  c.validate();
  s.validate();
  if (opt.steps_per_period < 1) throw ValidationError("steps_per_period must be >= 1");
  if (model) model->validate();
  const auto& levels = st.electron_levels;
  {
    std::vector<int> want{static_cast<int>(levels.size())};
    for (int d : c.nuclear_dims()) want.push_back(d);
    if (want != st.dims) throw ValidationError("evolve: state dimensions do not match the cluster");
  }
  const Tolerances& tol = opt.tol;
  EvolveResult res;
  PropagationReport& rep = res.report;
  int down = s.initial_down;
  if (st.level_index(1) < 0 || st.level_index(down) < 0)
    throw ValidationError("evolve: schedule manifold not present in the state");

  Context ctx(c, opt, choose_frames(s, c, opt), levels);
  const Eigen::Index dn = ctx.dn, de = static_cast<Eigen::Index>(levels.size());
  Stepper stepper{opt, rep};

  std::vector<std::size_t> memories;
  for (const auto& e : s.events)
    if (const auto* g = std::get_if<SwapGate>(&e.body)) memories.push_back(g->memory);

  std::set<double> cuts{0.0, s.total_duration};
  for (const auto& e : s.events) {
    cuts.insert(e.time);
    if (!e.instantaneous()) cuts.insert(e.end_time());
  }
  const std::vector<double> bounds(cuts.begin(), cuts.end());
  std::size_t next_event = 0;

  auto apply_instant = [&](const ControlEvent& e) {
    if (const auto* p = std::get_if<InstantPulse>(&e.body)) {
      if (p->target == PulseTarget::Electron) {
        const Mat ue = electron_rotation(levels, st.level_index(1), st.level_index(down), p->angle, p->phase);
        apply_unitary(st, kron(ue, Mat::Identity(dn, dn)));
      } else {
        Mat gen = Mat::Zero(dn, dn);
        bool any = false;
        for (std::size_t j = 0; j < c.size(); ++j) {
          const bool chosen = p->spins.empty()
                                  ? c.spins[j].species == p->species
                                  : std::find(p->spins.begin(), p->spins.end(), j) != p->spins.end();
          if (!chosen) continue;
          any = true;
          gen += std::cos(p->phase) * ctx.ix[j] + std::sin(p->phase) * ctx.iy[j];
        }
        if (any) apply_unitary(st, kron(Mat::Identity(de, de), expm_hermitian(gen, p->angle)));
      }
    } else if (const auto* t = std::get_if<ManifoldTransfer>(&e.body)) {
      if (t->new_down != down) {
        const int a = st.level_index(down), b = st.level_index(t->new_down);
        if (b < 0) throw ValidationError("manifold transfer needs a three-level electron");
        Mat pe = Mat::Identity(de, de);
        pe(a, a) = pe(b, b) = 0.0;
        pe(a, b) = pe(b, a) = 1.0;
        apply_unitary(st, kron(pe, Mat::Identity(dn, dn)));
        down = t->new_down;
      }
    } else if (const auto* g = std::get_if<SwapGate>(&e.body)) {
      if (g->memory >= c.size()) throw ValidationError("swap: memory spin index out of range");
      Mat u;
      if (g->explicit_realization) {
        if (!opt.explicit_swap) throw ValidationError("explicit swap requested but no realized gate supplied");
        u = explicit_swap_operator(*opt.explicit_swap, st.dims, levels, down, g->memory);
      } else {
        u = ideal_swap_operator(st.dims, levels, down, g->memory);
      }
      apply_unitary(st, u);
    }
  };

  for (std::size_t k = 0; k < bounds.size(); ++k) {
    const double t0 = bounds[k];
    while (next_event < s.events.size() && s.events[next_event].time <= t0) {
      const auto& e = s.events[next_event++];
      if (e.instantaneous()) apply_instant(e);
    }
    if (k + 1 == bounds.size()) break;
    const double t1 = bounds[k + 1];
    if (!(t1 > t0)) continue;

    std::vector<Tone> tones;
    const SpinLock* lock = nullptr;
    bool illuminated = false;
    for (const auto& e : s.events) {
      if (e.instantaneous()) continue;
      const double a = e.time, b = e.end_time();
      if (!(b > a) || a > t0 || b < t1) continue;
      if (const auto* rf = std::get_if<RfDrive>(&e.body)) {
        tones.push_back({rf->species, rf->frequency, rf->amplitude, rf->phase});
      } else if (const auto* lg = std::get_if<LGField>(&e.body)) {
        const double w = std::abs(opt.constants.gamma_of(lg->species)) * c.B_z + lg->delta;
        tones.push_back({lg->species, w, lg->amplitude, 0.0});
      } else if (const auto* sl = std::get_if<SpinLock>(&e.body)) {
        lock = sl;
      } else if (std::holds_alternative<Illumination>(e.body)) {
        illuminated = true;
      }
    }
    bool couplings = opt.nuclear_couplings;
    if (!opt.couplings_during_delay && s.delay_window && t0 >= s.delay_window->t0 && t1 <= s.delay_window->t1)
      couplings = false;
    const auto freqs = ctx.drive_frequencies(tones);
    const bool dissipative = (model && std::isfinite(model->T1)) || illuminated;

    if (dissipative) {
      const LindbladModel lm = model ? *model : LindbladModel{};
      if (st.rep == QuantumState::Rep::Pure) st = QuantumState::density(st.density_matrix(), st.dims, levels);
      auto jumps = electron_jumps(lm, levels, dn, illuminated);
      if (illuminated && !lm.protect_memory && lm.memory_dephasing > 0.0)
        for (auto j : memories)
          if (j < c.size()) jumps.push_back(std::sqrt(lm.memory_dephasing) * 2.0 * kron(Mat::Identity(de, de), ctx.iz[j]));
      auto hfull = [&](double t) {
        Mat h = Mat::Zero(de * dn, de * dn);
        for (Eigen::Index a = 0; a < de; ++a) h.block(a * dn, a * dn, dn, dn) = ctx.level(levels[a], tones, t, couplings);
        if (lock) {
          Mat e = Mat::Zero(de, de);
          const int up = st.level_index(1), dw = st.level_index(down);
          e(up, dw) = 0.5 * lock->rabi * std::exp(cplx(0.0, -lock->phase));
          e(dw, up) = std::conj(e(up, dw));
          h += kron(e, Mat::Identity(dn, dn));
        }
        return h;
      };
      double hmax = t1 - t0;
      if (std::isfinite(lm.T1)) hmax = std::min(hmax, lm.T1 / 1000.0);
      Vec v = vectorize(st.rho);
      const Eigen::Index d = st.rho.rows();
      if (freqs.empty()) {
        const auto n = static_cast<std::uint64_t>(std::ceil((t1 - t0) / hmax - 1e-9));
        const double h = (t1 - t0) / static_cast<double>(n);
        const Mat prop = matrix_power(expm_general(liouvillian(hfull(t0), jumps) * h), n);
        v = prop * v;
        rep.steps += n;
        rep.max_step = std::max(rep.max_step, h);
      } else {
        const double wmax = *std::max_element(freqs.begin(), freqs.end());
        const double dt = std::min(kTwoPi / (opt.steps_per_period * wmax), hmax);
        const auto n = static_cast<std::uint64_t>(std::ceil((t1 - t0) / dt - 1e-9));
        const double h = (t1 - t0) / static_cast<double>(n);
        for (std::uint64_t i = 0; i < n; ++i) {
          v = expm_general(liouvillian(hfull(t0 + (i + 0.5) * h), jumps) * h) * v;
        }
        rep.steps += n;
        rep.max_step = std::max(rep.max_step, h);
      }
      st.rho = unvectorize(v, d);
      check_state(st, rep, tol, true, true);
      continue;
    }

    if (lock) {
      auto hfull = [&](double t) {
        return build_hamiltonian(c, levels, tones, t, ctx.frames, opt, lock, down);
      };
      // Rebuilding the context per sample is wasteful; spin locks are short.
      const Mat u = stepper.run(hfull, t0, t1, freqs);
      rep.unitarity_defect = std::max(rep.unitarity_defect, unitarity_defect(u));
      apply_unitary(st, u);
    } else {
      std::vector<Mat> blocks;
      blocks.reserve(levels.size());
      for (int m : levels) {
        auto hm = [&](double t) { return ctx.level(m, tones, t, couplings); };
        blocks.push_back(stepper.run(hm, t0, t1, freqs));
        rep.unitarity_defect = std::max(rep.unitarity_defect, unitarity_defect(blocks.back()));
      }
      apply_block_diagonal(st, blocks);
    }
  }
  if (rep.unitarity_defect > tol.unitarity && !rep.failed) {
    rep.failed = true;
    std::ostringstream os;
    os << "unitarity defect " << rep.unitarity_defect << " beyond tolerance";
    rep.messages.push_back(os.str());
  }
  check_state(st, rep, tol, model.has_value(), st.rep == QuantumState::Rep::Density);
  res.state = std::move(st);
  res.down_level = down;
  return res;
}

// ---------------------------------------------------------------- observables

Coherence coherence(const QuantumState& s, int down) {
  const int up = s.level_index(1), dw = s.level_index(down);
  if (up < 0 || dw < 0) throw ValidationError("coherence: qubit levels missing from state");
  const Eigen::Index dn = static_cast<Eigen::Index>(s.dim()) / static_cast<Eigen::Index>(s.electron_levels.size());
  cplx acc{0.0, 0.0};
  if (s.rep == QuantumState::Rep::Pure) {
    acc = s.psi.segment(dw * dn, dn).dot(s.psi.segment(up * dn, dn));
  } else {
    for (Eigen::Index r = 0; r < dn; ++r) acc += s.rho(up * dn + r, dw * dn + r);
  }
  Coherence out;
  out.c = 2.0 * acc;
  out.L = std::min(1.0, std::abs(out.c));
  out.P = 0.5 * (1.0 + out.L);
  return out;
}

Coherence coherence(const QuantumState& s, const QubitManifold& m) {
  m.validate();
  return coherence(s, m.down_level);
}

double signed_coherence(cplx c, std::optional<cplx> ref) {
  if (ref && std::abs(*ref) > 0.0) return (c * std::conj(*ref)).real() / std::abs(*ref);
  return c.real();
}

double gate_fidelity(const Mat& g, const Mat& u) {
  if (g.rows() != u.rows() || g.cols() != u.cols()) throw ValidationError("gate_fidelity: dimension mismatch");
  const double norm = (g.adjoint() * g).trace().real();
  if (!(norm > 0.0)) throw DomainError("gate_fidelity: zero target");
  return std::abs((g.adjoint() * u).trace()) / norm;
}

}  // namespace delecho
