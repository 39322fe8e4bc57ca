#include "delecho/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "delecho/kernels/kernels.hpp"

namespace delecho {

SpinOps spin_ops(int dim) {
  if (dim < 2) throw std::invalid_argument("spin dimension must be >= 2");
  const double s = 0.5 * (dim - 1);
  SpinOps o;
  o.z = Mat::Zero(dim, dim);
  Mat plus = Mat::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double m = s - i;
    o.z(i, i) = m;
    if (i > 0) plus(i - 1, i) = std::sqrt(s * (s + 1) - m * (m + 1));
  }
  o.x = 0.5 * (plus + plus.adjoint());
  o.y = (plus - plus.adjoint()) / cplx(0.0, 2.0);
  o.id = Mat::Identity(dim, dim);
  return o;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat embed(const Mat& op, const std::vector<int>& dims, std::size_t k) {
  if (k >= dims.size() || op.rows() != dims[k]) throw std::invalid_argument("embed: dimension mismatch");
  Eigen::Index left = 1, right = 1;
  for (std::size_t i = 0; i < k; ++i) left *= dims[i];
  for (std::size_t i = k + 1; i < dims.size(); ++i) right *= dims[i];
  return kron(kron(Mat::Identity(left, left), op), Mat::Identity(right, right));
}

HermitianEig::HermitianEig(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  values = es.eigenvalues();
  vectors = es.eigenvectors();
}

Mat HermitianEig::propagator(double t) const {
  const Eigen::Index n = values.size();
  Mat scaled = vectors;
  for (Eigen::Index j = 0; j < n; ++j) scaled.col(j) *= std::exp(cplx(0.0, -values(j) * t));
  Mat out(n, n);
  gemm_bh(scaled, vectors, out);
  return out;
}

Mat expm_hermitian(const Mat& h, double t) {
  if (is_diagonal(h)) {
    Mat u = Mat::Zero(h.rows(), h.cols());
    for (Eigen::Index i = 0; i < h.rows(); ++i) u(i, i) = std::exp(cplx(0.0, -h(i, i).real() * t));
    return u;
  }
  return HermitianEig(h).propagator(t);
}

Mat expm_general(const Mat& a) { return a.exp(); }

Mat matrix_power(const Mat& a, std::uint64_t n) {
  Mat result = Mat::Identity(a.rows(), a.cols());
  Mat base = a;
  Mat tmp(a.rows(), a.cols());
  while (n > 0) {
    if (n & 1u) {
      gemm(result, base, tmp);
      result.swap(tmp);
    }
    n >>= 1u;
    if (n > 0) {
      gemm(base, base, tmp);
      base.swap(tmp);
    }
  }
  return result;
}

double max_abs(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double unitarity_defect(const Mat& u) {
  Mat p(u.cols(), u.cols());
  p.noalias() = u.adjoint() * u;
  return max_abs(p - Mat::Identity(u.cols(), u.cols()));
}

bool is_diagonal(const Mat& a, double tol) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j && std::abs(a(i, j)) > tol) return false;
  return true;
}

void gemm(const Mat& a, const Mat& b, Mat& c) {
  if (a.cols() != b.rows()) throw std::invalid_argument("gemm: dimension mismatch");
  c.resize(a.rows(), b.cols());
  kernels::active().gemm(a.rows(), b.cols(), a.cols(), a.data(), a.rows(), b.data(), b.rows(),
                         c.data(), c.rows());
}

void gemm_bh(const Mat& a, const Mat& b, Mat& c) {
  if (a.cols() != b.cols()) throw std::invalid_argument("gemm_bh: dimension mismatch");
  c.resize(a.rows(), b.rows());
  kernels::active().gemm_bh(a.rows(), b.rows(), a.cols(), a.data(), a.rows(), b.data(), b.rows(),
                            c.data(), c.rows());
}

}  // namespace delecho
