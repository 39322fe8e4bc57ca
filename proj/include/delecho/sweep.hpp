#pragma once
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "delecho/bath.hpp"
#include "delecho/engine.hpp"
#include "delecho/schedule.hpp"

namespace delecho {

enum class ProtocolType { DelayedEcho, Hahn, Free };
std::string protocol_type_name(ProtocolType t);
ProtocolType parse_protocol_type(const std::string& s);

struct ProtocolSpec {
  ProtocolType type = ProtocolType::DelayedEcho;
  EchoSpec echo;  // Hahn: tau and window_down; Free: tau is the duration
  std::optional<double> lg_delta;  // LG over the whole schedule for Hahn/Free
  Species lg_species = Species::C13;
};

enum class SweepVariable { RfFrequency, Theta, Phase, Tau, Delay };
std::string sweep_variable_name(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string& s);

struct SweepSpec {
  SweepVariable variable = SweepVariable::RfFrequency;
  std::vector<double> values;
  std::size_t target = 0;  // rf target index for rf_frequency/theta/phase
  void validate(const ProtocolSpec& p) const;
};

// The simulated system plus how to split it.
struct SystemSpec {
  SpinCluster system;
  std::vector<std::size_t> core;  // memory spins, first in every cluster
  std::optional<ClusterPartition> partition;  // unset = direct evolution
};

struct RunModel {
  EngineOptions engine;
  std::optional<LindbladModel> lindblad;
};

struct SpectrumPoint {
  double value = 0.0;
  double L = 0.0;         // |c|, clipped to 1
  double L_signed = 0.0;  // projection on the zero-drive reference
  double P = 0.5;         // (1 + L_signed) / 2
  cplx c{0.0, 0.0};
  std::vector<cplx> factors;
  bool failed = false;
  std::string message;
};

struct SpectrumResult {
  SweepVariable variable = SweepVariable::RfFrequency;
  std::vector<SpectrumPoint> points;
  PropagationReport report;
  bool failed() const;
};

ControlSchedule schedule_for(const ProtocolSpec& p, const PhysicalConstants& c = default_constants());
ControlSchedule schedule_at(const ProtocolSpec& p, const SweepSpec& s, double value,
                            const PhysicalConstants& c = default_constants());

// One evaluation of the electron coherence, direct or through the cluster product.
CceResult evaluate(const SystemSpec& sys, const ControlSchedule& s, const RunModel& m, unsigned threads = 1);

SpectrumResult run_sweep(const SystemSpec& sys, const ProtocolSpec& p, const SweepSpec& s, const RunModel& m,
                         unsigned threads = 1);

// Point-wise mean over runs on the same grid (multi-seed averaging).
SpectrumResult average_spectra(const std::vector<SpectrumResult>& runs);

// Tab-separated table preceded by "# key: value" lines.
void write_spectrum(std::ostream& os, const SpectrumResult& r,
                    const std::vector<std::pair<std::string, std::string>>& meta, bool with_factors = false);

}  // namespace delecho
