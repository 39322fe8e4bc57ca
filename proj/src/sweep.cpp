#include "delecho/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "delecho/errors.hpp"
#include "delecho/parallel.hpp"

namespace delecho {

std::string protocol_type_name(ProtocolType t) {
  switch (t) {
    case ProtocolType::DelayedEcho: return "delayed_echo";
    case ProtocolType::Hahn: return "hahn";
    case ProtocolType::Free: return "free";
  }
  return "?";
}

ProtocolType parse_protocol_type(const std::string& s) {
  if (s == "delayed_echo") return ProtocolType::DelayedEcho;
  if (s == "hahn") return ProtocolType::Hahn;
  if (s == "free") return ProtocolType::Free;
  throw ConfigError("unknown protocol type '" + s + "'");
}

std::string sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::RfFrequency: return "rf_frequency";
    case SweepVariable::Theta: return "theta";
    case SweepVariable::Phase: return "phase";
    case SweepVariable::Tau: return "tau";
    case SweepVariable::Delay: return "delay";
  }
  return "?";
}

SweepVariable parse_sweep_variable(const std::string& s) {
  if (s == "rf_frequency") return SweepVariable::RfFrequency;
  if (s == "theta") return SweepVariable::Theta;
  if (s == "phase") return SweepVariable::Phase;
  if (s == "tau") return SweepVariable::Tau;
  if (s == "delay") return SweepVariable::Delay;
  throw ConfigError("unknown sweep variable '" + s + "'");
}

namespace {
bool targets_rf(SweepVariable v) {
  return v == SweepVariable::RfFrequency || v == SweepVariable::Theta || v == SweepVariable::Phase;
}
}  // namespace

void SweepSpec::validate(const ProtocolSpec& p) const {
  if (values.empty()) throw ValidationError("sweep: no points");
  for (double v : values)
    if (!std::isfinite(v)) throw ValidationError("sweep: non-finite value");
  if (targets_rf(variable)) {
    if (p.type != ProtocolType::DelayedEcho) throw ValidationError("sweep: rf variables need the delayed_echo protocol");
    if (target >= p.echo.rf.size()) throw ValidationError("sweep: rf target index out of range");
  }
  if (variable == SweepVariable::Delay && p.type != ProtocolType::DelayedEcho)
    throw ValidationError("sweep: delay needs the delayed_echo protocol");
  if (variable == SweepVariable::Tau || variable == SweepVariable::Delay)
    for (double v : values)
      if (!(v > 0.0)) throw ValidationError("sweep: durations must be positive");
  if (variable == SweepVariable::RfFrequency)
    for (double v : values)
      if (v < 0.0) throw ValidationError("sweep: negative rf frequency");
}

ControlSchedule schedule_for(const ProtocolSpec& p, const PhysicalConstants& c) {
  if (p.type == ProtocolType::DelayedEcho) return build_delayed_entanglement_echo(p.echo, c);
  const double tau = p.echo.tau;
  if (!(tau > 0.0)) throw DomainError("protocol: tau must be positive");
  ControlSchedule s;
  if (p.type == ProtocolType::Hahn) {
    s = build_cp(1, 2.0 * tau, 0.0);
    s.protocol = "hahn";
    s.interaction_windows = {{0.0, tau}, {tau, 2.0 * tau}};
    s.echo_pulse_times = {tau};
  } else {
    s.protocol = "free";
    s.total_duration = tau;
  }
  s.period = 0.0;
  s.initial_down = p.echo.manifold.window_down;
  if (p.lg_delta) s.add(0.0, build_lg(*p.lg_delta, {0.0, s.total_duration}, p.lg_species, 0.0, c));
  s.sort();
  s.validate();
  return s;
}

ControlSchedule schedule_at(const ProtocolSpec& p, const SweepSpec& sw, double v, const PhysicalConstants& c) {
  ProtocolSpec q = p;
  switch (sw.variable) {
    case SweepVariable::RfFrequency: q.echo.rf.at(sw.target).frequency = v; break;
    case SweepVariable::Theta: q.echo.rf.at(sw.target).theta = v; break;
    case SweepVariable::Phase: q.echo.rf.at(sw.target).phase = v; break;
    case SweepVariable::Tau: q.echo.tau = v; break;
    case SweepVariable::Delay: q.echo.delay.duration = v; break;
  }
  return schedule_for(q, c);
}

CceResult evaluate(const SystemSpec& sys, const ControlSchedule& s, const RunModel& m, unsigned threads) {
  if (sys.partition) return cce_signal(sys.system, *sys.partition, s, m.engine, m.lindblad, sys.core, threads);
  EvolveResult r = evolve(sys.system, s, m.engine, m.lindblad);
  CceResult out;
  out.core = out.total = coherence(r.state, r.down_level).c;
  out.report = r.report;
  out.down_level = r.down_level;
  return out;
}

bool SpectrumResult::failed() const {
  if (report.failed) return true;
  for (const auto& p : points)
    if (p.failed) return true;
  return false;
}

SpectrumResult run_sweep(const SystemSpec& sys, const ProtocolSpec& p, const SweepSpec& sw, const RunModel& m,
                         unsigned threads) {
  sw.validate(p);
  sys.system.validate();
  const PhysicalConstants& k = m.engine.constants;
  // Without rf there is no reference and the signed column repeats |c|.
  const bool echo = p.type == ProtocolType::DelayedEcho && !p.echo.rf.empty();

  // Zero-drive reference fixing the sign of the signal; shared when the
  // swept variable only touches the rf.
  ProtocolSpec ref_p = p;
  for (auto& r : ref_p.echo.rf) r.theta = 0.0;
  std::optional<cplx> shared_ref;
  if (echo && targets_rf(sw.variable)) shared_ref = evaluate(sys, schedule_for(ref_p, k), m, threads).total;

  SpectrumResult out;
  out.variable = sw.variable;
  out.points.resize(sw.values.size());
  std::vector<PropagationReport> reports(sw.values.size());
  parallel_for(sw.values.size(), threads, [&](std::size_t i) {
    SpectrumPoint& pt = out.points[i];
    pt.value = sw.values[i];
    try {
      const ControlSchedule s = schedule_at(p, sw, pt.value, k);
      CceResult r = evaluate(sys, s, m, 1);
      std::optional<cplx> ref = shared_ref;
      if (echo && !ref) ref = evaluate(sys, schedule_at(ref_p, sw, pt.value, k), m, 1).total;
      pt.c = r.total;
      pt.L = std::min(1.0, std::abs(r.total));
      pt.L_signed = ref ? std::clamp(signed_coherence(r.total, ref), -1.0, 1.0) : pt.L;
      pt.P = 0.5 * (1.0 + pt.L_signed);
      pt.factors = std::move(r.factors);
      pt.failed = r.report.failed;
      if (pt.failed && !r.report.messages.empty()) pt.message = r.report.messages.front();
      reports[i] = std::move(r.report);
    } catch (const std::exception& e) {
      pt.failed = true;
      pt.message = e.what();
    }
  });
  for (const auto& r : reports) out.report.merge(r);
  for (const auto& pt : out.points)
    if (pt.failed) out.report.failed = true;
  return out;
}

SpectrumResult average_spectra(const std::vector<SpectrumResult>& runs) {
  if (runs.empty()) throw ValidationError("average_spectra: no runs");
  SpectrumResult out = runs.front();
  const std::size_t n = out.points.size();
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].points.size() != n || runs[r].variable != out.variable)
      throw ValidationError("average_spectra: runs on different grids");
    out.report.merge(runs[r].report);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& q = runs[r].points[i];
      if (q.value != out.points[i].value) throw ValidationError("average_spectra: runs on different grids");
      auto& p = out.points[i];
      p.L += q.L;
      p.L_signed += q.L_signed;
      p.c += q.c;
      if (q.failed && !p.failed) {
        p.failed = true;
        p.message = q.message;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(runs.size());
  for (auto& p : out.points) {
    p.L *= inv;
    p.L_signed *= inv;
    p.c *= inv;
    p.P = 0.5 * (1.0 + p.L_signed);
    if (runs.size() > 1) p.factors.clear();
  }
  return out;
}

void write_spectrum(std::ostream& os, const SpectrumResult& r,
                    const std::vector<std::pair<std::string, std::string>>& meta, bool with_factors) {
  for (const auto& [k, v] : meta) os << "# " << k << ": " << v << '\n';
  const auto& rep = r.report;
  os << "# steps: " << rep.steps << '\n';
  os << "# max_step: " << rep.max_step << '\n';
  os << "# unitarity_defect: " << rep.unitarity_defect << '\n';
  os << "# trace_defect: " << rep.trace_defect << '\n';
  os << "# hermiticity_defect: " << rep.hermiticity_defect << '\n';
  os << "# min_eigenvalue: " << rep.min_eigenvalue << '\n';
  os << "# clusters: " << rep.clusters << '\n';
  os << "# max_dropped_coupling: " << rep.max_dropped_coupling << '\n';
  os << "# failed: " << (r.failed() ? "yes" : "no") << '\n';
  os << sweep_variable_name(r.variable) << "\tL\tL_signed\tP\tflag";
  std::size_t nf = 0;
  if (with_factors)
    for (const auto& p : r.points) nf = std::max(nf, p.factors.size());
  for (std::size_t j = 0; j < nf; ++j) os << "\tfactor" << j << "_re\tfactor" << j << "_im";
  os << '\n';
  std::ostringstream line;
  line << std::setprecision(12);
  for (const auto& p : r.points) {
    line.str("");
    line << p.value << '\t' << p.L << '\t' << p.L_signed << '\t' << p.P << '\t' << (p.failed ? "failed" : "ok");
    for (std::size_t j = 0; j < nf; ++j) {
      if (j < p.factors.size())
        line << '\t' << p.factors[j].real() << '\t' << p.factors[j].imag();
      else
        line << "\tnan\tnan";
    }
    os << line.str() << '\n';
  }
}

}  // namespace delecho
