#include "delecho/spin_system.hpp"

#include <cmath>

#include "delecho/errors.hpp"

namespace delecho {

std::string species_name(Species s) {
  switch (s) {
    case Species::C13: return "13C";
    case Species::H1: return "1H";
    case Species::N14: return "14N";
  }
  return "?";
}

Species parse_species(const std::string& name) {
  if (name == "13C" || name == "C13" || name == "c13") return Species::C13;
  if (name == "1H" || name == "H1" || name == "h1") return Species::H1;
  if (name == "14N" || name == "N14" || name == "n14") return Species::N14;
  throw ValidationError("unknown species '" + name + "'");
}

int spin_dim(Species s) { return s == Species::N14 ? 3 : 2; }

const PhysicalConstants& default_constants() {
  static const PhysicalConstants c{};
  return c;
}

namespace {
Mat3 nv_axes() {
  Mat3 m;
  m.row(0) = Vec3(1, -1, 0).normalized();
  m.row(1) = Vec3(1, 1, -2).normalized();
  m.row(2) = Vec3(1, 1, 1).normalized();
  return m;
}
}  // namespace

Vec3 lattice_to_nv_frame(const Vec3& cubic) { return nv_axes() * cubic; }
Vec3 nv_frame_to_lattice(const Vec3& nv) { return nv_axes().transpose() * nv; }

HyperfineVector project_hyperfine(const Vec3& A, const Vec3& axis) {
  HyperfineVector h;
  h.A = A;
  h.omega_hat = axis.normalized();
  h.A_parallel = A.dot(h.omega_hat);
  h.A_perp = (A - h.A_parallel * h.omega_hat).norm();
  return h;
}

QubitManifold QubitManifold::with_down(int down) {
  QubitManifold m;
  m.down_level = down;
  if (down == 0) {
    m.eta = 0.5;
    m.c_eta = 0.5;
  } else if (down == -1) {
    m.eta = 1.0;
    m.c_eta = 0.0;
  } else {
    throw ValidationError("qubit down level must be 0 or -1");
  }
  return m;
}

void QubitManifold::validate() const {
  if (up_level != 1) throw ValidationError("qubit up level must be +1");
  const QubitManifold ref = with_down(down_level);
  if (eta != ref.eta || c_eta != ref.c_eta)
    throw ValidationError("manifold constants inconsistent with down level");
}

HyperfineVector hyperfine_vector(const Vec3& r_nm, double gamma_j, const PhysicalConstants& c) {
  const double r = r_nm.norm();
  if (!(r > 0.0)) throw DomainError("hyperfine_vector: zero-length position");
  const double r_m = r * 1e-9;
  const Vec3 rh = r_nm / r;
  const Vec3 z = Vec3::UnitZ();
  const double pref = c.mu0_over_4pi * c.gamma_e * gamma_j / (r_m * r_m * r_m);
  return project_hyperfine(pref * (z - 3.0 * z.dot(rh) * rh));
}

Vec3 hyperfine_field(const NuclearSpin& s, const PhysicalConstants& c) {
  if (s.hyperfine_override) return *s.hyperfine_override;
  // Contact interaction of the defect nitrogen; the transverse part only
  // enters through second-order shifts (see nitrogen_virtual_shifts).
  if (s.species == Species::N14) return Vec3(0.0, 0.0, c.A_par_N);
  return hyperfine_vector(s.position, c.gamma_of(s.species), c).A;
}

DipolarCoupling dipolar_coupling(const Vec3& rj, const Vec3& rk, double gj, double gk,
                                 const PhysicalConstants& c) {
  const Vec3 d = rj - rk;
  const double r = d.norm();
  if (!(r > 0.0)) throw DomainError("dipolar_coupling: coincident positions");
  const Vec3 rh = d / r;
  const double r_m = r * 1e-9;
  const double pref = c.mu0_over_4pi * gj * gk / (r_m * r_m * r_m);
  DipolarCoupling out;
  out.d = pref * (1.0 - 3.0 * rh.z() * rh.z());
  out.tensor = pref * (Mat3::Identity() - 3.0 * rh * rh.transpose());
  return out;
}

PrecessionFrame precession_frame(double B_z, double gamma_j, const HyperfineVector& A,
                                 const QubitManifold& manifold) {
  if (!(B_z > 0.0)) throw DomainError("precession_frame: B_z must be positive");
  const Vec3 v = gamma_j * B_z * Vec3::UnitZ() - manifold.c_eta * A.A;
  PrecessionFrame f;
  f.omega = v.norm();
  if (f.omega > 0.0) f.omega_hat = v / f.omega;
  return f;
}

double lg_effective_coupling(double A_parallel, double projection) { return A_parallel * projection; }

const Mat& NitrogenShifts::for_level(int m_s) const {
  if (m_s == 1) return h_plus;
  if (m_s == 0) return h_zero;
  if (m_s == -1) return h_minus;
  throw DomainError("electron level must be -1, 0 or +1");
}

NitrogenShifts nitrogen_virtual_shifts(double B_z, const PhysicalConstants& c) {
  if (!(B_z > 0.0)) throw DomainError("nitrogen_virtual_shifts: B_z must be positive");
  const double lo = c.D - c.gamma_e * B_z;
  const double hi = c.D + c.gamma_e * B_z;
  const double scale = std::abs(c.D) * 1e-9;
  if (std::abs(lo) < scale || std::abs(hi) < scale)
    throw DomainError("nitrogen_virtual_shifts: level anticrossing, perturbation theory invalid");
  const double a2 = c.A_perp_N * c.A_perp_N;
  NitrogenShifts s;
  s.h_plus = Mat::Zero(3, 3);
  s.h_zero = Mat::Zero(3, 3);
  s.h_minus = Mat::Zero(3, 3);
  s.h_plus(1, 1) = s.h_plus(2, 2) = a2 / lo;
  s.h_zero(0, 0) = -a2 / lo;
  s.h_zero(1, 1) = -a2 / lo - a2 / hi;
  s.h_zero(2, 2) = -a2 / hi;
  s.h_minus(0, 0) = s.h_minus(1, 1) = a2 / hi;
  return s;
}

double field_for_larmor(Species s, double omega, const PhysicalConstants& c) {
  return omega / c.gamma_of(s);
}

}  // namespace delecho
