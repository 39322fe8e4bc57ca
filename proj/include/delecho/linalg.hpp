#pragma once
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace delecho {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr cplx kI{0.0, 1.0};

// Spin operators in the |m = s, s-1, ..., -s> basis for dimension 2s+1.
struct SpinOps {
  Mat x, y, z, id;
};
SpinOps spin_ops(int dim);

Mat kron(const Mat& a, const Mat& b);

// Operator acting on site `k` of a tensor product with dimensions `dims`.
Mat embed(const Mat& op, const std::vector<int>& dims, std::size_t k);

// exp(-i H t) for Hermitian H.
Mat expm_hermitian(const Mat& h, double t);

// Hermitian eigen-pair cached for repeated exponentiation.
struct HermitianEig {
  Eigen::VectorXd values;
  Mat vectors;
  explicit HermitianEig(const Mat& h);
  Mat propagator(double t) const;
};

// General matrix exponential (scaling and squaring, Pade).
Mat expm_general(const Mat& a);

// A^n by repeated squaring.
Mat matrix_power(const Mat& a, std::uint64_t n);

double max_abs(const Mat& a);
double unitarity_defect(const Mat& u);
bool is_diagonal(const Mat& a, double tol = 0.0);

// C = A * B and C = A * B^H through the dispatched kernels.
void gemm(const Mat& a, const Mat& b, Mat& c);
void gemm_bh(const Mat& a, const Mat& b, Mat& c);

}  // namespace delecho
