#pragma once
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "delecho/spin_system.hpp"

namespace delecho {

struct SpinBath {
  std::vector<NuclearSpin> spins;
  std::vector<HyperfineVector> hyperfine;  // parallel to spins, strong-field axis
  QubitManifold manifold = QubitManifold::with_down(0);
  double B_z = 0.467;
  std::uint64_t seed = 0;
  double abundance = 0.011;
  double shell_radius = 0.0;     // nm
  double exclusion_radius = 0.0; // nm

  std::size_t size() const { return spins.size(); }
  void add(const NuclearSpin& s, const PhysicalConstants& c = default_constants());
  void validate() const;
};

// Diamond lattice sites (NV frame, nm) with |r| < radius, vacancy at the
// origin excluded. Sorted by integer lattice coordinates.
std::vector<Vec3> diamond_sites(double radius_nm, double lattice_constant_nm);
// Nitrogen site of the defect, one bond along +z.
Vec3 nitrogen_site(double lattice_constant_nm);

struct BathParams {
  double abundance = 0.011;
  double shell_radius = 2.5;      // nm
  double exclusion_radius = 0.714;
  double B_z = 0.467;
  int down_level = 0;
  // When true, inner sites are also drawn and the whole sample is rejected
  // if any of them is occupied (redrawn with the next derived seed).
  bool reject_inner = false;
  int max_attempts = 100000;
};

SpinBath generate_bath(std::uint64_t seed, const BathParams& p,
                       const PhysicalConstants& c = default_constants());

// True when a draw over the full sphere leaves the inner region empty.
bool inner_region_empty(std::uint64_t seed, double abundance, double exclusion_radius,
                        const PhysicalConstants& c = default_constants());

void save_bath(std::ostream& os, const SpinBath& bath);
SpinBath load_bath(std::istream& is, const PhysicalConstants& c = default_constants());
void save_bath_file(const std::string& path, const SpinBath& bath);
SpinBath load_bath_file(const std::string& path, const PhysicalConstants& c = default_constants());

struct DroppedCoupling {
  std::size_t i = 0, j = 0;
  double strength = 0.0;     // secular d_jk, rad/s
  bool size_limited = false; // merge refused by the size cap
};

struct ClusterPartition {
  std::vector<std::vector<std::size_t>> clusters;
  std::size_t max_cluster_size = 1;
  double coupling_threshold = 0.0;
  std::vector<DroppedCoupling> dropped;

  double max_dropped() const;
  bool within_threshold() const { return max_dropped() <= coupling_threshold; }
  void validate(std::size_t n_spins) const;
};

ClusterPartition partition_clusters(const SpinBath& bath, std::size_t max_size,
                                    double coupling_threshold,
                                    const PhysicalConstants& c = default_constants());

std::size_t count_addressable(const SpinBath& bath, double min_A_parallel, double resolution);

struct CensusRow {
  double resolution = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct CensusResult {
  std::vector<CensusRow> rows;
  std::vector<std::vector<std::size_t>> counts;  // [seed][resolution]
};

CensusResult census(std::uint64_t base_seed, std::size_t samples, const BathParams& p,
                    double min_A_parallel, const std::vector<double>& resolutions,
                    unsigned threads, const PhysicalConstants& c = default_constants());

}  // namespace delecho
