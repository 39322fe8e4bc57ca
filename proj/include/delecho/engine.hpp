#pragma once
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "delecho/bath.hpp"
#include "delecho/linalg.hpp"
#include "delecho/schedule.hpp"
#include "delecho/spin_system.hpp"

namespace delecho {

// Tensor order: electron first, then nuclear spins in cluster order.
// Electron basis is the level list (+1, 0, -1) or the qubit pair (+1, down).
struct QuantumState {
  enum class Rep { Pure, Density };
  Rep rep = Rep::Density;
  std::vector<int> dims;
  std::vector<int> electron_levels;
  Vec psi;
  Mat rho;

  static QuantumState pure(Vec psi, std::vector<int> dims, std::vector<int> levels);
  static QuantumState density(Mat rho, std::vector<int> dims, std::vector<int> levels);

  std::size_t dim() const;
  Mat density_matrix() const;
  int level_index(int m_s) const;  // -1 when absent
  // Throws ValidationError on a violated invariant.
  void validate(double norm_tol = 1e-10, double herm_tol = 1e-10, double trace_tol = 1e-8,
                double eig_floor = -1e-8) const;
};

struct PairCoupling {
  std::size_t i = 0, j = 0;
  DipolarCoupling coupling;
};

// The simulated system: a set of nuclear spins around the electron.
struct SpinCluster {
  std::vector<NuclearSpin> spins;
  std::vector<Vec3> hyperfine;                      // A_j, rad/s
  std::vector<std::optional<double>> polarization;  // population of the first basis level; unset = identity
  std::optional<std::vector<PairCoupling>> couplings;  // unset = dipolar from positions
  double B_z = 0.467;

  std::size_t size() const { return spins.size(); }
  std::vector<int> nuclear_dims() const;
  void add(const NuclearSpin& s, const PhysicalConstants& c = default_constants());
  void add(Species sp, const Vec3& hyperfine_A, const Vec3& position = Vec3::Zero());
  void validate() const;
};

SpinCluster cluster_from_bath(const SpinBath& bath, const std::vector<std::size_t>& indices = {});
SpinCluster subsystem(const SpinCluster& full, const std::vector<std::size_t>& indices);
std::vector<PairCoupling> pair_couplings(const SpinCluster& c, const PhysicalConstants& k = default_constants());

enum class FrameMode { Rwa, Lab };

struct Tolerances {
  double unitarity = 1e-10;
  double norm = 1e-10;
  double hermiticity = 1e-10;
  double trace = 1e-8;
  double eig_floor = -1e-8;
  double lindblad_eig_floor = -1e-6;
};

struct EngineOptions {
  FrameMode mode = FrameMode::Rwa;
  int steps_per_period = 100;
  bool nuclear_couplings = true;
  bool couplings_during_delay = true;
  bool nitrogen_shifts = false;
  int electron_levels = 0;  // 0 = choose (3 when the schedule transfers levels or relaxation is modeled)
  // Realized gate for explicit swaps: 4x4 on (up,a),(up,b),(down,a),(down,b)
  // or 9x9 on electron(+1,0,-1) x memory(+1,0,-1).
  std::optional<Mat> explicit_swap;
  Tolerances tol;
  PhysicalConstants constants = default_constants();
};

struct IlluminationRates {
  double pump = 1e6;       // 1/s, |+-1> -> |0>
  double dephasing = 1e7;  // 1/s
  double target_p0 = 0.82; // steady-state population of |0>
  double mixing() const { return pump * (1.0 / target_p0 - 1.0) / 2.0; }
};

struct LindbladModel {
  double T1 = std::numeric_limits<double>::infinity();
  IlluminationRates illumination;
  bool protect_memory = true;
  double memory_dephasing = 0.0;  // 1/s, applied to memory spins under illumination when unprotected
  void validate() const;
};

struct PropagationReport {
  std::size_t steps = 0;
  double max_step = 0.0;
  double unitarity_defect = 0.0;
  double trace_defect = 0.0;
  double hermiticity_defect = 0.0;
  double norm_defect = 0.0;
  double min_eigenvalue = 0.0;
  std::size_t clusters = 0;
  double max_dropped_coupling = 0.0;
  bool failed = false;
  std::vector<std::string> messages;

  void merge(const PropagationReport& o);
};

struct EvolveResult {
  QuantumState state;
  PropagationReport report;
  int down_level = 0;  // qubit manifold at the end of the schedule
};

// Frame frequency per rotating species (RWA mode).
using FrameMap = std::map<Species, double>;
FrameMap choose_frames(const ControlSchedule& s, const SpinCluster& c, const EngineOptions& opt);

struct Tone {
  Species species = Species::C13;
  double frequency = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
};

// Nuclear Hamiltonian for electron level m_s at time t (rad/s).
Mat level_hamiltonian(const SpinCluster& c, int m_s, const std::vector<Tone>& tones, double t,
                      const FrameMap& frames, const EngineOptions& opt, bool couplings = true);

// Full electron x nuclear Hamiltonian in the electron frame of its zero-field
// splitting and Zeeman term. An optional spin lock drives the qubit pair.
Mat build_hamiltonian(const SpinCluster& c, const std::vector<int>& electron_levels,
                      const std::vector<Tone>& tones, double t, const FrameMap& frames,
                      const EngineOptions& opt, const SpinLock* lock = nullptr, int down_level = 0);

QuantumState initial_state(const SpinCluster& c, const std::vector<int>& electron_levels, int down_level);
std::vector<int> electron_levels_for(const ControlSchedule& s, const EngineOptions& opt,
                                     const std::optional<LindbladModel>& model);

EvolveResult evolve(const SpinCluster& c, const ControlSchedule& s, const EngineOptions& opt = {},
                    const std::optional<LindbladModel>& model = std::nullopt);
EvolveResult evolve(QuantumState initial, const SpinCluster& c, const ControlSchedule& s,
                    const EngineOptions& opt = {}, const std::optional<LindbladModel>& model = std::nullopt);

struct Coherence {
  cplx c{0.0, 0.0};  // 2 <up| rho_e |down>
  double L = 0.0;
  double P = 0.5;
};
Coherence coherence(const QuantumState& s, const QubitManifold& m);
Coherence coherence(const QuantumState& s, int down_level);
// Projection on a reference phase (zero-drive run); plain real part without one.
double signed_coherence(cplx c, std::optional<cplx> reference = std::nullopt);

double gate_fidelity(const Mat& target, const Mat& realized);

// Ideal swap of the electron qubit (up, down) with qubit levels (0, 1) of a memory spin.
Mat ideal_swap_operator(const std::vector<int>& dims, const std::vector<int>& electron_levels,
                        int down_level, std::size_t memory_spin);

struct CceResult {
  cplx total{1.0, 0.0};
  cplx core{1.0, 0.0};           // electron plus core spins alone
  std::vector<cplx> factors;     // per cluster, relative to the core
  PropagationReport report;
  int down_level = 0;
};

// Cluster-correlation product. `core` spins (memories) join every cluster.
CceResult cce_signal(const SpinCluster& bath, const ClusterPartition& partition,
                     const ControlSchedule& s, const EngineOptions& opt = {},
                     const std::optional<LindbladModel>& model = std::nullopt,
                     const std::vector<std::size_t>& core = {}, unsigned threads = 1);

}  // namespace delecho
