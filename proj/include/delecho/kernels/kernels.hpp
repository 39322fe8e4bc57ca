#pragma once
// Dense complex kernels used by the propagators. All matrices are
// column-major with explicit leading dimensions.
#include <complex>
#include <cstddef>
#include <string>

namespace delecho::kernels {

using cplx = std::complex<double>;

enum class Isa { Scalar, Avx2, Neon };

struct Table {
  // C = A * B        (A: m x k, B: k x n, C: m x n)
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const cplx* a, std::size_t lda,
               const cplx* b, std::size_t ldb, cplx* c, std::size_t ldc);
  // C = A * B^H      (A: m x k, B: n x k, C: m x n)
  void (*gemm_bh)(std::size_t m, std::size_t n, std::size_t k, const cplx* a, std::size_t lda,
                  const cplx* b, std::size_t ldb, cplx* c, std::size_t ldc);
  // y = A * x
  void (*gemv)(std::size_t m, std::size_t n, const cplx* a, std::size_t lda, const cplx* x,
               cplx* y);
  // X(i,j) *= p(i) * conj(q(j))
  void (*diag_sandwich)(std::size_t m, std::size_t n, const cplx* p, const cplx* q, cplx* x,
                        std::size_t ldx);
  // y += alpha * x
  void (*axpy)(std::size_t n, cplx alpha, const cplx* x, cplx* y);
};

const Table& scalar_table();
const Table* avx2_table();  // nullptr when not compiled in
const Table* neon_table();  // nullptr when not compiled in

// Table chosen once per process. DELECHO_KERNELS=scalar forces the
// reference path.
const Table& active();
Isa active_isa();
std::string isa_name(Isa isa);
bool isa_available(Isa isa);
const Table& table_for(Isa isa);

}  // namespace delecho::kernels
