#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "delecho/bath.hpp"
#include "delecho/errors.hpp"
#include "delecho/rng.hpp"

using namespace delecho;

namespace {
constexpr double kHz = kTwoPi * 1e3;

BathParams small_params(double shell = 1.5) {
  BathParams p;
  p.shell_radius = shell;
  p.exclusion_radius = 0.714;
  return p;
}

// Reference count: spins above the threshold whose A_par differs from all others by more than res.
std::size_t recount(const SpinBath& b, double min_a, double res) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (std::abs(b.hyperfine[i].A_parallel) <= min_a) continue;
    bool ok = true;
    for (std::size_t j = 0; j < b.size(); ++j)
      if (j != i && std::abs(b.hyperfine[i].A_parallel - b.hyperfine[j].A_parallel) <= res) ok = false;
    n += ok;
  }
  return n;
}
}  // namespace

TEST_CASE("diamond lattice site counts") {
  CHECK(diamond_sites(0.714, 0.357).size() == 274);
  const auto sites = diamond_sites(1.2, 0.357);
  std::set<std::tuple<long, long, long>> seen;
  for (const auto& s : sites) {
    CHECK(s.norm() < 1.2);
    CHECK(s.norm() > 0.0);
    const Vec3 c = nv_frame_to_lattice(s) / (0.357 / 4.0);
    seen.insert({std::lround(c.x()), std::lround(c.y()), std::lround(c.z())});
  }
  CHECK(seen.size() == sites.size());
  CHECK(nitrogen_site(0.357).norm() == doctest::Approx(0.357 * std::sqrt(3.0) / 4.0));
}

TEST_CASE("bath generation is deterministic and respects the radii") {
  const auto p = small_params(2.0);
  const auto a = generate_bath(11, p), b = generate_bath(11, p), c = generate_bath(12, p);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.spins[i].position == b.spins[i].position);
  bool differs = a.size() != c.size();
  for (std::size_t i = 0; !differs && i < a.size(); ++i) differs = a.spins[i].position != c.spins[i].position;
  CHECK(differs);
  for (const auto* bath : {&a, &c}) {
    bath->validate();
    for (const auto& s : bath->spins) {
      CHECK(s.position.norm() > p.exclusion_radius);
      CHECK(s.position.norm() <= p.shell_radius + 1e-12);
    }
  }
  BathParams none = p;
  none.abundance = 0.0;
  CHECK(generate_bath(3, none).size() == 0);
  BathParams bad = p;
  bad.abundance = 1.5;
  CHECK_THROWS_AS(generate_bath(1, bad), DomainError);
  bad = p;
  bad.exclusion_radius = 3.0;
  CHECK_THROWS_AS(generate_bath(1, bad), DomainError);
}

TEST_CASE("mean occupancy follows the abundance") {
  const auto p = small_params(2.0);
  const double n_sites = static_cast<double>(diamond_sites(2.0, 0.357).size()) -
                         static_cast<double>(diamond_sites(0.714, 0.357).size());
  double total = 0.0;
  const int seeds = 300;
  for (int s = 0; s < seeds; ++s) total += generate_bath(split_seed(99, s), p).size();
  const double mean = total / seeds, expect = n_sites * p.abundance;
  CHECK(std::abs(mean - expect) < 4.0 * std::sqrt(expect / seeds) + 0.3);
}

TEST_CASE("empty inner region happens about 5% of the time") {
  int empty = 0;
  const int n = 10000;
  for (int s = 0; s < n; ++s) empty += inner_region_empty(split_seed(2024, s), 0.011, 0.714);
  const double frac = static_cast<double>(empty) / n;
  CHECK(std::abs(frac - std::pow(0.989, 273)) < 0.01);
  CHECK(std::abs(frac - 0.05) < 0.01);
}

TEST_CASE("rejection sampling leaves the inner region empty") {
  auto p = small_params(1.2);
  p.reject_inner = true;
  const auto b = generate_bath(5, p);
  for (const auto& s : b.spins) CHECK(s.position.norm() > 0.714);
}

TEST_CASE("bath files round trip") {
  const auto a = generate_bath(8, small_params());
  std::stringstream ss;
  save_bath(ss, a);
  const auto b = load_bath(ss);
  REQUIRE(b.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a.spins[i].position - b.spins[i].position).norm() == 0.0);
    CHECK(a.hyperfine[i].A_parallel == b.hyperfine[i].A_parallel);
  }
  CHECK(b.seed == 8);
  std::stringstream bad("# delecho-bath 1\n13C 0.1 0.2\n");
  CHECK_THROWS_AS(load_bath(bad), ConfigError);
  std::stringstream nomagic("13C 1 1 1\n");
  CHECK_THROWS_AS(load_bath(nomagic), ConfigError);
}

TEST_CASE("cluster partition is a disjoint cover") {
  for (int seed = 0; seed < 60; ++seed) {
    const auto b = generate_bath(split_seed(7, seed), small_params(1.6));
    for (std::size_t m : {1u, 2u, 3u, 5u}) {
      const auto part = partition_clusters(b, m, 0.0);
      part.validate(b.size());
      for (const auto& cl : part.clusters) CHECK(cl.size() <= m);
      for (const auto& d : part.dropped) CHECK(d.size_limited);
    }
  }
}

TEST_CASE("partition edge cases") {
  SpinBath b;
  NuclearSpin s;
  s.position = Vec3(0.8, 0.0, 0.3);
  b.add(s);
  s.position = Vec3(0.8, 0.2, 0.5);
  b.add(s);
  const auto singles = partition_clusters(b, 1, 0.0);
  CHECK(singles.clusters.size() == 2);
  REQUIRE(singles.dropped.size() == 1);
  const double d = dipolar_coupling(b.spins[0].position, b.spins[1].position, default_constants().gamma_of(Species::C13),
                                    default_constants().gamma_of(Species::C13)).d;
  CHECK(singles.dropped[0].strength == doctest::Approx(d));
  const auto whole = partition_clusters(b, 2, 0.0);
  CHECK(whole.clusters.size() == 1);
  CHECK(whole.dropped.empty());
  CHECK_THROWS_AS(partition_clusters(b, 0, 0.0), DomainError);
  ClusterPartition broken = whole;
  broken.clusters[0].pop_back();
  CHECK_THROWS_AS(broken.validate(2), ValidationError);
}

TEST_CASE("addressable count") {
  SpinBath empty;
  CHECK(count_addressable(empty, 0.0, 1.0) == 0);
  SpinBath twins;
  NuclearSpin s;
  s.position = Vec3(0.0, 0.0, 0.9);
  twins.add(s);
  s.position = Vec3(0.0, 0.0, -0.9);
  twins.add(s);
  CHECK(count_addressable(twins, 0.0, 1e-3) == 0);
  CHECK_THROWS_AS(count_addressable(twins, 0.0, 0.0), DomainError);

  for (int seed = 0; seed < 50; ++seed) {
    auto b = generate_bath(split_seed(31, seed), small_params(2.5));
    const std::size_t coarse = count_addressable(b, 4 * kHz, 1 * kHz);
    const std::size_t fine = count_addressable(b, 4 * kHz, 0.1 * kHz);
    CHECK(coarse == recount(b, 4 * kHz, 1 * kHz));
    CHECK(fine == recount(b, 4 * kHz, 0.1 * kHz));
    CHECK(fine >= coarse);
    std::reverse(b.spins.begin(), b.spins.end());
    std::reverse(b.hyperfine.begin(), b.hyperfine.end());
    CHECK(count_addressable(b, 4 * kHz, 1 * kHz) == coarse);
  }
}

TEST_CASE("census aggregates independently of worker count") {
  const auto p = small_params(2.5);
  const std::vector<double> res{2 * kHz, 1 * kHz, 0.5 * kHz};
  const auto one = census(77, 1, p, 4 * kHz, res, 1);
  const auto direct = generate_bath(split_seed(77, 0), p);
  for (std::size_t r = 0; r < res.size(); ++r)
    CHECK(one.rows[r].mean == static_cast<double>(count_addressable(direct, 4 * kHz, res[r])));
  const auto a = census(5, 40, p, 4 * kHz, res, 1), b = census(5, 40, p, 4 * kHz, res, 4);
  for (std::size_t r = 0; r < res.size(); ++r) {
    CHECK(a.rows[r].mean == b.rows[r].mean);
    CHECK(a.rows[r].stddev == b.rows[r].stddev);
  }
  for (std::size_t s = 0; s < a.counts.size(); ++s)
    for (std::size_t r = 1; r < res.size(); ++r) CHECK(a.counts[s][r] >= a.counts[s][r - 1]);
  CHECK_THROWS_AS(census(1, 0, p, 0.0, res, 1), DomainError);
}

TEST_CASE("seed splitting") {
  CHECK(split_seed(1, 0) != split_seed(1, 1));
  CHECK(split_seed(1, 0) == split_seed(1, 0));
  Rng a(3), b(3);
  for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());
  Rng r(4);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}
