#include "delecho/kernels/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>
#define DELECHO_HAVE_NEON 1
#endif

namespace delecho::kernels {

#ifdef DELECHO_HAVE_NEON
namespace {

// One complex double per register: [re im].
inline float64x2_t cmul(float64x2_t a, float64x2_t b) {
  const float64x2_t bre = vdupq_laneq_f64(b, 0);
  const float64x2_t bim = vdupq_laneq_f64(b, 1);
  const float64x2_t asw = vextq_f64(a, a, 1);                 // [im re]
  const float64x2_t sgn = {-1.0, 1.0};
  return vfmaq_f64(vmulq_f64(a, bre), vmulq_f64(asw, bim), sgn);
}

inline float64x2_t ld(const cplx* p) { return vld1q_f64(reinterpret_cast<const double*>(p)); }
inline void st(cplx* p, float64x2_t v) { vst1q_f64(reinterpret_cast<double*>(p), v); }

void col_update(std::size_t m, const cplx* ap, cplx s, cplx* cj) {
  const float64x2_t sv = {s.real(), s.imag()};
  for (std::size_t i = 0; i < m; ++i) st(cj + i, vaddq_f64(ld(cj + i), cmul(ld(ap + i), sv)));
}

void gemm(std::size_t m, std::size_t n, std::size_t k, const cplx* a, std::size_t lda,
          const cplx* b, std::size_t ldb, cplx* c, std::size_t ldc) {
  for (std::size_t j = 0; j < n; ++j) {
    cplx* cj = c + j * ldc;
    for (std::size_t i = 0; i < m; ++i) cj[i] = 0.0;
    for (std::size_t p = 0; p < k; ++p) col_update(m, a + p * lda, b[p + j * ldb], cj);
  }
}

void gemm_bh(std::size_t m, std::size_t n, std::size_t k, const cplx* a, std::size_t lda,
             const cplx* b, std::size_t ldb, cplx* c, std::size_t ldc) {
  for (std::size_t j = 0; j < n; ++j) {
    cplx* cj = c + j * ldc;
    for (std::size_t i = 0; i < m; ++i) cj[i] = 0.0;
    for (std::size_t p = 0; p < k; ++p) col_update(m, a + p * lda, std::conj(b[j + p * ldb]), cj);
  }
}

void gemv(std::size_t m, std::size_t n, const cplx* a, std::size_t lda, const cplx* x, cplx* y) {
  for (std::size_t i = 0; i < m; ++i) y[i] = 0.0;
  for (std::size_t p = 0; p < n; ++p) col_update(m, a + p * lda, x[p], y);
}

void diag_sandwich(std::size_t m, std::size_t n, const cplx* p, const cplx* q, cplx* x,
                   std::size_t ldx) {
  for (std::size_t j = 0; j < n; ++j) {
    const cplx qj = std::conj(q[j]);
    const float64x2_t qv = {qj.real(), qj.imag()};
    cplx* xj = x + j * ldx;
    for (std::size_t i = 0; i < m; ++i) st(xj + i, cmul(ld(xj + i), cmul(ld(p + i), qv)));
  }
}

void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y) { col_update(n, x, alpha, y); }

}  // namespace

const Table* neon_table() {
  static const Table t{gemm, gemm_bh, gemv, diag_sandwich, axpy};
  return &t;
}
#else
const Table* neon_table() { return nullptr; }
#endif

}  // namespace delecho::kernels
