#include "delecho/kernels/kernels.hpp"

namespace delecho::kernels {
namespace {

void gemm(std::size_t m, std::size_t n, std::size_t k, const cplx* a, std::size_t lda,
          const cplx* b, std::size_t ldb, cplx* c, std::size_t ldc) {
  for (std::size_t j = 0; j < n; ++j) {
    cplx* cj = c + j * ldc;
    for (std::size_t i = 0; i < m; ++i) cj[i] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const cplx bpj = b[p + j * ldb];
      const cplx* ap = a + p * lda;
      for (std::size_t i = 0; i < m; ++i) cj[i] += ap[i] * bpj;
    }
  }
}

void gemm_bh(std::size_t m, std::size_t n, std::size_t k, const cplx* a, std::size_t lda,
             const cplx* b, std::size_t ldb, cplx* c, std::size_t ldc) {
  for (std::size_t j = 0; j < n; ++j) {
    cplx* cj = c + j * ldc;
    for (std::size_t i = 0; i < m; ++i) cj[i] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const cplx bjp = std::conj(b[j + p * ldb]);
      const cplx* ap = a + p * lda;
      for (std::size_t i = 0; i < m; ++i) cj[i] += ap[i] * bjp;
    }
  }
}

void gemv(std::size_t m, std::size_t n, const cplx* a, std::size_t lda, const cplx* x, cplx* y) {
  for (std::size_t i = 0; i < m; ++i) y[i] = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const cplx xp = x[p];
    const cplx* ap = a + p * lda;
    for (std::size_t i = 0; i < m; ++i) y[i] += ap[i] * xp;
  }
}

void diag_sandwich(std::size_t m, std::size_t n, const cplx* p, const cplx* q, cplx* x,
                   std::size_t ldx) {
  for (std::size_t j = 0; j < n; ++j) {
    const cplx qj = std::conj(q[j]);
    cplx* xj = x + j * ldx;
    for (std::size_t i = 0; i < m; ++i) xj[i] *= p[i] * qj;
  }
}

void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const Table& scalar_table() {
  static const Table t{gemm, gemm_bh, gemv, diag_sandwich, axpy};
  return t;
}

}  // namespace delecho::kernels
