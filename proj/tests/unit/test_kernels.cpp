#include <doctest.h>

#include <random>
#include <vector>

#include "delecho/kernels/kernels.hpp"

using namespace delecho::kernels;

namespace {

std::vector<cplx> random_block(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<const Table*> simd_tables() {
  std::vector<const Table*> t;
  if (isa_available(Isa::Avx2)) t.push_back(&table_for(Isa::Avx2));
  if (isa_available(Isa::Neon)) t.push_back(&table_for(Isa::Neon));
  return t;
}

}  // namespace

TEST_CASE("scalar gemm matches a naive triple loop") {
  std::mt19937_64 rng(1);
  const std::size_t m = 5, n = 4, k = 3;
  auto a = random_block(m * k, rng), b = random_block(k * n, rng);
  std::vector<cplx> c(m * n), ref(m * n);
  scalar_table().gemm(m, n, k, a.data(), m, b.data(), k, c.data(), m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < k; ++l) ref[i + j * m] += a[i + l * m] * b[l + j * k];
  CHECK(max_diff(c, ref) < 1e-13);
}

TEST_CASE("SIMD kernels agree with the scalar reference") {
  const auto tables = simd_tables();
  if (tables.empty()) {
    MESSAGE("no SIMD kernels on this machine; scalar path only");
    return;
  }
  std::mt19937_64 rng(42);
  const Table& s = scalar_table();
  for (const Table* t : tables) {
    for (std::size_t m : {1u, 2u, 3u, 7u, 16u, 33u})
      for (std::size_t n : {1u, 4u, 9u, 18u})
        for (std::size_t k : {1u, 2u, 5u, 27u}) {
          const std::size_t lda = m + 3, ldb = k + 1, ldc = m + 2;
          auto a = random_block(lda * k, rng), b = random_block(ldb * n, rng);
          std::vector<cplx> c1(ldc * n, cplx(7, 7)), c2 = c1;
          s.gemm(m, n, k, a.data(), lda, b.data(), ldb, c1.data(), ldc);
          t->gemm(m, n, k, a.data(), lda, b.data(), ldb, c2.data(), ldc);
          CHECK(max_diff(c1, c2) < 1e-12 * (1.0 + k));

          auto bh = random_block((n + 1) * k, rng);
          std::vector<cplx> d1(ldc * n), d2(ldc * n);
          s.gemm_bh(m, n, k, a.data(), lda, bh.data(), n + 1, d1.data(), ldc);
          t->gemm_bh(m, n, k, a.data(), lda, bh.data(), n + 1, d2.data(), ldc);
          CHECK(max_diff(d1, d2) < 1e-12 * (1.0 + k));
        }
    for (std::size_t m : {1u, 3u, 8u, 31u}) {
      auto a = random_block(m * m, rng), x = random_block(m, rng);
      std::vector<cplx> y1(m), y2(m);
      s.gemv(m, m, a.data(), m, x.data(), y1.data());
      t->gemv(m, m, a.data(), m, x.data(), y2.data());
      CHECK(max_diff(y1, y2) < 1e-12 * m);

      auto p = random_block(m, rng), q = random_block(m, rng), x1 = random_block(m * m, rng);
      auto x2 = x1;
      s.diag_sandwich(m, m, p.data(), q.data(), x1.data(), m);
      t->diag_sandwich(m, m, p.data(), q.data(), x2.data(), m);
      CHECK(max_diff(x1, x2) < 1e-13);

      auto ax = random_block(m, rng), ay1 = random_block(m, rng);
      auto ay2 = ay1;
      s.axpy(m, cplx(0.3, -1.1), ax.data(), ay1.data());
      t->axpy(m, cplx(0.3, -1.1), ax.data(), ay2.data());
      CHECK(max_diff(ay1, ay2) < 1e-14);
    }
  }
}

TEST_CASE("dispatch reports a usable table") {
  const Table& t = active();
  CHECK(t.gemm != nullptr);
  CHECK(isa_available(Isa::Scalar));
  CHECK(!isa_name(active_isa()).empty());
}
