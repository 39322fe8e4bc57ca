#pragma once
#include <vector>

#include "delecho/engine.hpp"

namespace delecho {

// Column-stacking vectorization: vec(A X B) = (B^T kron A) vec(X).
Vec vectorize(const Mat& m);
Mat unvectorize(const Vec& v, Eigen::Index n);

// Generator of d vec(rho)/dt.
Mat liouvillian(const Mat& h, const std::vector<Mat>& jumps);

// Electron relaxation (and optical pumping when illuminated) acting on the
// electron factor of an electron x nuclear space of nuclear dimension dn.
std::vector<Mat> electron_jumps(const LindbladModel& model, const std::vector<int>& levels,
                                Eigen::Index dn, bool illuminated);

}  // namespace delecho
