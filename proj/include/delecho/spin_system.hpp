#pragma once
#include <map>
#include <optional>
#include <string>

#include "delecho/linalg.hpp"

namespace delecho {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class Species { C13, H1, N14 };

std::string species_name(Species s);
Species parse_species(const std::string& name);
int spin_dim(Species s);

struct PhysicalConstants {
  double mu0_over_4pi = 1e-7 * 1.054571817e-34;  // hbar-scaled, SI
  double gamma_e = -kTwoPi * 2.8e10;             // rad/s/T
  std::map<Species, double> gamma{
      {Species::C13, kTwoPi * 10.705e6},
      {Species::H1, kTwoPi * 42.577e6},
      {Species::N14, kTwoPi * 3.08e6},
  };
  double D = kTwoPi * 2.87e9;
  double A_perp_N = -kTwoPi * 2.62e6;
  double A_par_N = -kTwoPi * 2.162e6;
  double P_N = -kTwoPi * 4.945e6;
  double lattice_constant_nm = 0.357;
  double lg_projection = 0.57735026918962576451;  // cos of the magic angle

  double gamma_of(Species s) const { return gamma.at(s); }
};

const PhysicalConstants& default_constants();

// Cubic crystal axes -> NV frame (z along [111]).
Vec3 lattice_to_nv_frame(const Vec3& cubic);
Vec3 nv_frame_to_lattice(const Vec3& nv);

struct HyperfineVector {
  Vec3 A = Vec3::Zero();
  double A_parallel = 0.0;
  double A_perp = 0.0;
  Vec3 omega_hat = Vec3::UnitZ();
};

// Decompose A against a precession axis.
HyperfineVector project_hyperfine(const Vec3& A, const Vec3& axis = Vec3::UnitZ());

struct NuclearSpin {
  Vec3 position = Vec3::Zero();  // nm, NV frame
  Species species = Species::C13;
  // Contact or measured couplings replace the dipolar field when set.
  std::optional<Vec3> hyperfine_override;
  int dim() const { return spin_dim(species); }
};

struct QubitManifold {
  int up_level = 1;
  int down_level = 0;
  double eta = 0.5;
  double c_eta = 0.5;

  static QubitManifold with_down(int down);
  void validate() const;
};

HyperfineVector hyperfine_vector(const Vec3& r_nm, double gamma_j,
                                 const PhysicalConstants& c = default_constants());

// Coupling used by the simulator for one spin (override or dipolar form).
Vec3 hyperfine_field(const NuclearSpin& s, const PhysicalConstants& c = default_constants());

struct DipolarCoupling {
  double d = 0.0;                  // secular strength
  Mat3 tensor = Mat3::Zero();      // H = I_j . T . I_k
};

DipolarCoupling dipolar_coupling(const Vec3& rj_nm, const Vec3& rk_nm, double gamma_j,
                                 double gamma_k, const PhysicalConstants& c = default_constants());

struct PrecessionFrame {
  double omega = 0.0;
  Vec3 omega_hat = Vec3::UnitZ();
};

PrecessionFrame precession_frame(double B_z, double gamma_j, const HyperfineVector& A,
                                 const QubitManifold& manifold);

double lg_effective_coupling(double A_parallel,
                             double projection = default_constants().lg_projection);

struct NitrogenShifts {
  Mat h_plus, h_zero, h_minus;  // diagonal, basis |+1_N>, |0_N>, |-1_N>
  const Mat& for_level(int m_s) const;
};

NitrogenShifts nitrogen_virtual_shifts(double B_z, const PhysicalConstants& c = default_constants());

// Magnetic field at which species s precesses at angular frequency omega.
double field_for_larmor(Species s, double omega, const PhysicalConstants& c = default_constants());

}  // namespace delecho
