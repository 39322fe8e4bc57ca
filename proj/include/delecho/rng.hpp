#pragma once
#include <cstdint>
#include <random>

namespace delecho {

// splitmix64 finalizer; derives independent stream seeds from (base, index)
// so batch results do not depend on scheduling order.
std::uint64_t split_seed(std::uint64_t base, std::uint64_t index);

// mt19937_64 with an explicit bits-to-double map; std distributions are not
// bit-stable across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t next() { return eng_(); }
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace delecho
