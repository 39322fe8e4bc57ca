#include "delecho/bath.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "delecho/errors.hpp"
#include "delecho/parallel.hpp"
#include "delecho/rng.hpp"

namespace delecho {
namespace {

int mod4(int v) { return ((v % 4) + 4) % 4; }

bool is_lattice_site(int i, int j, int k) {
  const bool even = (i % 2 == 0) && (j % 2 == 0) && (k % 2 == 0);
  const bool odd = (i % 2 != 0) && (j % 2 != 0) && (k % 2 != 0);
  if (even) return mod4(i + j + k) == 0;
  if (odd) return mod4(i + j + k - 3) == 0;
  return false;
}

struct Site {
  std::array<int, 3> ijk;
  long r2;  // in (a/4)^2 units
};

// Sites with r2 <= r2_max (inclusive), origin removed, canonical order.
std::vector<Site> lattice_sites(double radius_nm, double a, bool inclusive) {
  const double unit = a / 4.0;
  const double rr = radius_nm / unit;
  const int m = static_cast<int>(std::ceil(rr)) + 1;
  const double lim = rr * rr;
  std::vector<Site> out;
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j)
      for (int k = -m; k <= m; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        if (!is_lattice_site(i, j, k)) continue;
        const long r2 = static_cast<long>(i) * i + static_cast<long>(j) * j + static_cast<long>(k) * k;
        const bool in = inclusive ? (r2 <= lim + 1e-9) : (r2 < lim - 1e-9);
        if (in) out.push_back({{i, j, k}, r2});
      }
  return out;
}

Vec3 to_nv(const Site& s, double a) {
  return lattice_to_nv_frame(Vec3(s.ijk[0], s.ijk[1], s.ijk[2]) * (a / 4.0));
}

bool is_nitrogen(const Site& s) { return s.ijk[0] == 1 && s.ijk[1] == 1 && s.ijk[2] == 1; }

bool inside(const Site& s, double radius_nm, double a) {
  const double rr = radius_nm / (a / 4.0);
  return static_cast<double>(s.r2) < rr * rr - 1e-9;
}

}  // namespace

std::vector<Vec3> diamond_sites(double radius_nm, double a) {
  std::vector<Vec3> out;
  for (const auto& s : lattice_sites(radius_nm, a, false)) out.push_back(to_nv(s, a));
  return out;
}

Vec3 nitrogen_site(double a) { return lattice_to_nv_frame(Vec3(1, 1, 1) * (a / 4.0)); }

void SpinBath::add(const NuclearSpin& s, const PhysicalConstants& c) {
  spins.push_back(s);
  hyperfine.push_back(project_hyperfine(hyperfine_field(s, c)));
}

void SpinBath::validate() const {
  if (hyperfine.size() != spins.size()) throw ValidationError("bath: hyperfine table size mismatch");
  manifold.validate();
  for (std::size_t i = 0; i < spins.size(); ++i) {
    const double r = spins[i].position.norm();
    if (shell_radius > 0.0 && (r < exclusion_radius - 1e-9 || r > shell_radius + 1e-9))
      throw ValidationError("bath: spin " + std::to_string(i) + " outside (exclusion, shell] radii");
    for (std::size_t j = 0; j < i; ++j)
      if ((spins[i].position - spins[j].position).norm() < 1e-6)
        throw ValidationError("bath: spins " + std::to_string(j) + " and " + std::to_string(i) +
                              " share a site");
  }
}

SpinBath generate_bath(std::uint64_t seed, const BathParams& p, const PhysicalConstants& c) {
  if (p.abundance < 0.0 || p.abundance > 1.0) throw DomainError("generate_bath: abundance outside [0,1]");
  if (!(p.exclusion_radius < p.shell_radius)) throw DomainError("generate_bath: exclusion radius must be below shell radius");
  const double a = c.lattice_constant_nm;
  const auto sites = lattice_sites(p.shell_radius, a, true);

  SpinBath bath;
  bath.manifold = QubitManifold::with_down(p.down_level);
  bath.B_z = p.B_z;
  bath.seed = seed;
  bath.abundance = p.abundance;
  bath.shell_radius = p.shell_radius;
  bath.exclusion_radius = p.exclusion_radius;

  auto place = [&](const Site& s) {
    NuclearSpin n;
    n.position = to_nv(s, a);
    n.species = Species::C13;
    bath.add(n, c);
  };

  if (!p.reject_inner) {
    Rng rng(seed);
    for (const auto& s : sites) {
      if (is_nitrogen(s) || inside(s, p.exclusion_radius, a)) continue;
      if (rng.uniform() < p.abundance) place(s);
    }
    return bath;
  }

  for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(attempt)));
    bool rejected = false;
    std::vector<const Site*> chosen;
    for (const auto& s : sites) {
      if (is_nitrogen(s)) continue;
      if (rng.uniform() < p.abundance) {
        if (inside(s, p.exclusion_radius, a)) {
          rejected = true;
          break;
        }
        chosen.push_back(&s);
      }
    }
    if (rejected) continue;
    for (const Site* s : chosen) place(*s);
    return bath;
  }
  throw DomainError("generate_bath: no accepted sample within the attempt budget");
}

bool inner_region_empty(std::uint64_t seed, double abundance, double exclusion_radius,
                        const PhysicalConstants& c) {
  Rng rng(seed);
  for (const auto& s : lattice_sites(exclusion_radius, c.lattice_constant_nm, false)) {
    if (is_nitrogen(s)) continue;
    if (rng.uniform() < abundance) return false;
  }
  return true;
}

void save_bath(std::ostream& os, const SpinBath& bath) {
  os << "# delecho-bath 1\n";
  os << "# seed: " << bath.seed << "\n";
  os << std::setprecision(17);
  os << "# B_z: " << bath.B_z << "\n";
  os << "# down_level: " << bath.manifold.down_level << "\n";
  os << "# abundance: " << bath.abundance << "\n";
  os << "# shell_radius: " << bath.shell_radius << "\n";
  os << "# exclusion_radius: " << bath.exclusion_radius << "\n";
  for (const auto& s : bath.spins) {
    if (s.hyperfine_override)
      throw ValidationError("save_bath: spins with measured couplings are not representable");
    os << species_name(s.species) << ' ' << s.position.x() << ' ' << s.position.y() << ' '
       << s.position.z() << "\n";
  }
}

SpinBath load_bath(std::istream& is, const PhysicalConstants& c) {
  SpinBath bath;
  std::string line;
  int line_no = 0;
  bool have_magic = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# delecho-bath", 0) == 0) {
        have_magic = true;
        continue;
      }
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = line.substr(2, colon - 2);
      const std::string val = line.substr(colon + 1);
      try {
        if (key == "seed") bath.seed = std::stoull(val);
        else if (key == "B_z") bath.B_z = std::stod(val);
        else if (key == "down_level") bath.manifold = QubitManifold::with_down(std::stoi(val));
        else if (key == "abundance") bath.abundance = std::stod(val);
        else if (key == "shell_radius") bath.shell_radius = std::stod(val);
        else if (key == "exclusion_radius") bath.exclusion_radius = std::stod(val);
        else throw ConfigError("unknown header key '" + key + "'", line_no);
      } catch (const std::logic_error&) {
        throw ConfigError("bad header value for '" + key + "'", line_no);
      }
      continue;
    }
    std::istringstream ls(line);
    std::string sp;
    double x, y, z;
    if (!(ls >> sp >> x >> y >> z)) throw ConfigError("expected 'species x y z'", line_no);
    NuclearSpin n;
    try {
      n.species = parse_species(sp);
    } catch (const ValidationError& e) {
      throw ConfigError(e.what(), line_no);
    }
    n.position = Vec3(x, y, z);
    bath.add(n, c);
  }
  if (!have_magic) throw ConfigError("missing bath header");
  bath.validate();
  return bath;
}

void save_bath_file(const std::string& path, const SpinBath& bath) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  save_bath(f, bath);
}

SpinBath load_bath_file(const std::string& path, const PhysicalConstants& c) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return load_bath(f, c);
}

double ClusterPartition::max_dropped() const {
  double m = 0.0;
  for (const auto& d : dropped) m = std::max(m, std::abs(d.strength));
  return m;
}

void ClusterPartition::validate(std::size_t n) const {
  std::vector<int> seen(n, 0);
  for (const auto& cl : clusters)
    for (std::size_t i : cl) {
      if (i >= n) throw ValidationError("partition: index out of range");
      if (seen[i]++) throw ValidationError("partition: spin in two clusters");
    }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw ValidationError("partition: spin " + std::to_string(i) + " not covered");
  for (const auto& d : dropped)
    if (!(std::abs(d.strength) <= coupling_threshold || d.size_limited))
      throw ValidationError("partition: unjustified dropped coupling");
}

ClusterPartition partition_clusters(const SpinBath& bath, std::size_t max_size,
                                    double coupling_threshold, const PhysicalConstants& c) {
  if (max_size < 1) throw DomainError("partition_clusters: max_size must be >= 1");
  const std::size_t n = bath.size();
  struct Edge {
    std::size_t i, j;
    double d;
  };
  std::vector<Edge> edges;
  edges.reserve(n * (n - (n > 0)) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = bath.spins[i];
      const auto& b = bath.spins[j];
      const double d = dipolar_coupling(a.position, b.position, c.gamma_of(a.species),
                                        c.gamma_of(b.species), c).d;
      edges.push_back({i, j, d});
    }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& x, const Edge& y) { return std::abs(x.d) > std::abs(y.d); });

  std::vector<std::size_t> parent(n), size(n, 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  ClusterPartition out;
  out.max_cluster_size = max_size;
  out.coupling_threshold = coupling_threshold;
  std::vector<Edge> refused;
  for (const auto& e : edges) {
    const std::size_t ri = find(e.i), rj = find(e.j);
    if (ri == rj) continue;
    if (size[ri] + size[rj] <= max_size) {
      if (size[ri] < size[rj]) {
        parent[ri] = rj;
        size[rj] += size[ri];
      } else {
        parent[rj] = ri;
        size[ri] += size[rj];
      }
    } else {
      refused.push_back(e);
    }
  }
  // A refused edge may later end up inside one cluster through other merges.
  for (const auto& e : refused)
    if (find(e.i) != find(e.j)) out.dropped.push_back({e.i, e.j, e.d, true});

  std::vector<std::ptrdiff_t> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<std::ptrdiff_t>(out.clusters.size());
      out.clusters.emplace_back();
    }
    out.clusters[slot[r]].push_back(i);
  }
  return out;
}

std::size_t count_addressable(const SpinBath& bath, double min_A_parallel, double resolution) {
  if (!(resolution > 0.0)) throw DomainError("count_addressable: resolution must be positive");
  const std::size_t n = bath.size();
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ai = bath.hyperfine[i].A_parallel;
    if (!(std::abs(ai) > min_A_parallel)) continue;
    bool isolated = true;
    for (std::size_t j = 0; j < n && isolated; ++j)
      if (j != i && !(std::abs(ai - bath.hyperfine[j].A_parallel) > resolution)) isolated = false;
    if (isolated) ++count;
  }
  return count;
}

CensusResult census(std::uint64_t base_seed, std::size_t samples, const BathParams& p,
                    double min_A_parallel, const std::vector<double>& resolutions,
                    unsigned threads, const PhysicalConstants& c) {
  if (samples < 1) throw DomainError("census: need at least one sample");
  CensusResult out;
  out.counts.assign(samples, std::vector<std::size_t>(resolutions.size(), 0));
  parallel_for(samples, threads, [&](std::size_t s) {
    const SpinBath bath = generate_bath(split_seed(base_seed, s), p, c);
    for (std::size_t r = 0; r < resolutions.size(); ++r)
      out.counts[s][r] = count_addressable(bath, min_A_parallel, resolutions[r]);
  });
  for (std::size_t r = 0; r < resolutions.size(); ++r) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      const double v = static_cast<double>(out.counts[s][r]);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / samples;
    const double var = samples > 1 ? std::max(0.0, (sum2 - samples * mean * mean) / (samples - 1)) : 0.0;
    out.rows.push_back({resolutions[r], mean, std::sqrt(var)});
  }
  return out;
}

}  // namespace delecho
