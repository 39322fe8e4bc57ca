#include "delecho/lindblad.hpp"

#include <cmath>

#include "delecho/errors.hpp"

namespace delecho {

void LindbladModel::validate() const {
  if (!(T1 > 0.0)) throw ValidationError("lindblad: T1 must be positive (use infinity to disable)");
  if (illumination.pump < 0.0 || illumination.dephasing < 0.0 || memory_dephasing < 0.0)
    throw ValidationError("lindblad: rates must be non-negative");
  if (!(illumination.target_p0 > 0.0 && illumination.target_p0 <= 1.0))
    throw ValidationError("lindblad: target polarization must lie in (0, 1]");
}

Vec vectorize(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

Mat unvectorize(const Vec& v, Eigen::Index n) {
  if (v.size() != n * n) throw ValidationError("unvectorize: size mismatch");
  return Eigen::Map<const Mat>(v.data(), n, n);
}

Mat liouvillian(const Mat& h, const std::vector<Mat>& jumps) {
  const Eigen::Index n = h.rows();
  const Mat id = Mat::Identity(n, n);
  Mat g = -kI * (kron(id, h) - kron(h.transpose(), id));
  for (const Mat& l : jumps) {
    const Mat ll = l.adjoint() * l;
    g += kron(l.conjugate(), l) - 0.5 * kron(id, ll) - 0.5 * kron(ll.transpose(), id);
  }
  return g;
}

std::vector<Mat> electron_jumps(const LindbladModel& model, const std::vector<int>& levels, Eigen::Index dn,
                                bool illuminated) {
  const Eigen::Index de = static_cast<Eigen::Index>(levels.size());
  const Mat idn = Mat::Identity(dn, dn);
  auto op = [&](int to, int from, double rate) {
    Mat e = Mat::Zero(de, de);
    e(to, from) = std::sqrt(rate);
    return kron(e, idn);
  };
  std::vector<Mat> out;
  if (std::isfinite(model.T1)) {
    const double r = 1.0 / (3.0 * model.T1);
    for (int a = 0; a < de; ++a)
      for (int b = 0; b < de; ++b)
        if (a != b) out.push_back(op(a, b, r));
  }
  if (illuminated) {
    int zero = -1;
    for (int a = 0; a < de; ++a)
      if (levels[a] == 0) zero = a;
    if (zero < 0) throw ValidationError("illumination needs the m_s = 0 level");
    const auto& il = model.illumination;
    for (int a = 0; a < de; ++a) {
      if (a == zero) continue;
      if (il.pump > 0.0) out.push_back(op(zero, a, il.pump));
      if (il.mixing() > 0.0) out.push_back(op(a, zero, il.mixing()));
    }
    if (il.dephasing > 0.0)
      for (int a = 0; a < de; ++a) out.push_back(op(a, a, il.dephasing));
  }
  return out;
}

}  // namespace delecho
