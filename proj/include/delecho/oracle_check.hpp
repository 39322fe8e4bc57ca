#pragma once
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "delecho/engine.hpp"

namespace delecho {

// Delayed echo on 13C targets with the electron parked on a polarized
// nitrogen memory during the delay; rf rotates the targets meanwhile.
struct EchoProbe {
  std::vector<Vec3> targets;           // hyperfine vectors, rad/s
  std::vector<PairCoupling> couplings; // among targets (target indices)
  double eta = 0.5;
  double tau = 10e-6;
  double theta = M_PI;
  double t_delay = 200e-6;
  std::optional<double> rf_frequency;  // default: target 0 resonance with the electron in +1
  double rf_phase = 0.0;
  double B_z = 0.467;
  double engine_A_sign = 1.0;          // multiplies A_z seen by the engine (mutation hook)
};

struct ProbeResult {
  double L_signed = 0.0;
  double L = 0.0;
  cplx c{0.0, 0.0};
  cplx reference{0.0, 0.0};
  PropagationReport report;
};

// Precession frequency of a spin with hyperfine A while the electron sits in m_s.
double level_precession(const Vec3& A, double B_z, int m_s, FrameMode mode, Species sp = Species::C13,
                        const PhysicalConstants& c = default_constants());

ProbeResult run_memory_echo(const EchoProbe& p, const EngineOptions& opt = {});

struct OracleCheckOptions {
  double tol_rwa = 1e-8;
  double tol_engine = 1e-3;
  bool flip_A_sign = false;
};

struct OracleRow {
  std::string name;
  double oracle = 0.0;
  double engine = 0.0;
  double error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

std::vector<OracleRow> run_oracle_check(const OracleCheckOptions& opt = {});
void print_oracle_table(std::ostream& os, const std::vector<OracleRow>& rows);

}  // namespace delecho
