#include "delecho/kernels/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define DELECHO_HAVE_AVX2 1
#endif

namespace delecho::kernels {

#ifdef DELECHO_HAVE_AVX2
namespace {

#define AVX2_FN __attribute__((target("avx2,fma")))

// Two complex doubles per register: [re0 im0 re1 im1].
AVX2_FN inline __m256d cmul_bcast(__m256d a, __m256d bre, __m256d bim) {
  const __m256d asw = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, bre, _mm256_mul_pd(asw, bim));
}

AVX2_FN inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d bre = _mm256_movedup_pd(b);
  const __m256d bim = _mm256_permute_pd(b, 0xF);
  return cmul_bcast(a, bre, bim);
}

AVX2_FN inline __m256d load2(const cplx* p) {
  return _mm256_loadu_pd(reinterpret_cast<const double*>(p));
}
AVX2_FN inline void store2(cplx* p, __m256d v) {
  _mm256_storeu_pd(reinterpret_cast<double*>(p), v);
}

AVX2_FN void col_update(std::size_t m, const cplx* ap, cplx s, cplx* cj) {
  const __m256d bre = _mm256_set1_pd(s.real());
  const __m256d bim = _mm256_set1_pd(s.imag());
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    __m256d c0 = load2(cj + i), c1 = load2(cj + i + 2);
    c0 = _mm256_add_pd(c0, cmul_bcast(load2(ap + i), bre, bim));
    c1 = _mm256_add_pd(c1, cmul_bcast(load2(ap + i + 2), bre, bim));
    store2(cj + i, c0);
    store2(cj + i + 2, c1);
  }
  for (; i + 2 <= m; i += 2) store2(cj + i, _mm256_add_pd(load2(cj + i), cmul_bcast(load2(ap + i), bre, bim)));
  for (; i < m; ++i) cj[i] += ap[i] * s;
}

AVX2_FN void gemm(std::size_t m, std::size_t n, std::size_t k, const cplx* a, std::size_t lda,
                  const cplx* b, std::size_t ldb, cplx* c, std::size_t ldc) {
  for (std::size_t j = 0; j < n; ++j) {
    cplx* cj = c + j * ldc;
    for (std::size_t i = 0; i < m; ++i) cj[i] = 0.0;
    for (std::size_t p = 0; p < k; ++p) col_update(m, a + p * lda, b[p + j * ldb], cj);
  }
}

AVX2_FN void gemm_bh(std::size_t m, std::size_t n, std::size_t k, const cplx* a, std::size_t lda,
                     const cplx* b, std::size_t ldb, cplx* c, std::size_t ldc) {
  for (std::size_t j = 0; j < n; ++j) {
    cplx* cj = c + j * ldc;
    for (std::size_t i = 0; i < m; ++i) cj[i] = 0.0;
    for (std::size_t p = 0; p < k; ++p) col_update(m, a + p * lda, std::conj(b[j + p * ldb]), cj);
  }
}

AVX2_FN void gemv(std::size_t m, std::size_t n, const cplx* a, std::size_t lda, const cplx* x,
                  cplx* y) {
  for (std::size_t i = 0; i < m; ++i) y[i] = 0.0;
  for (std::size_t p = 0; p < n; ++p) col_update(m, a + p * lda, x[p], y);
}

AVX2_FN void diag_sandwich(std::size_t m, std::size_t n, const cplx* p, const cplx* q, cplx* x,
                           std::size_t ldx) {
  for (std::size_t j = 0; j < n; ++j) {
    const cplx qj = std::conj(q[j]);
    const __m256d qre = _mm256_set1_pd(qj.real());
    const __m256d qim = _mm256_set1_pd(qj.imag());
    cplx* xj = x + j * ldx;
    std::size_t i = 0;
    for (; i + 2 <= m; i += 2) {
      const __m256d f = cmul_bcast(load2(p + i), qre, qim);
      store2(xj + i, cmul(load2(xj + i), f));
    }
    for (; i < m; ++i) xj[i] *= p[i] * qj;
  }
}

AVX2_FN void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y) { col_update(n, x, alpha, y); }

}  // namespace

const Table* avx2_table() {
  static const Table t{gemm, gemm_bh, gemv, diag_sandwich, axpy};
  return &t;
}
#else
const Table* avx2_table() { return nullptr; }
#endif

}  // namespace delecho::kernels
