#include "delecho/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "delecho/errors.hpp"
#include "delecho/nitrogen_swap.hpp"

namespace delecho {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Number possibly written with pi: "pi", "-pi/2", "3pi/4", "0.5 pi", "1.2".
bool parse_pi_number(std::string s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  double denom = 1.0;
  if (auto slash = s.find('/'); slash != std::string::npos) {
    char* end = nullptr;
    const std::string d = trim(s.substr(slash + 1));
    denom = std::strtod(d.c_str(), &end);
    if (d.empty() || *end != '\0' || denom == 0.0) return false;
    s = trim(s.substr(0, slash));
  }
  double factor = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    factor = M_PI;
    s = trim(s.substr(0, s.size() - 2));
    if (s.empty() || s == "+") s = "1";
    if (s == "-") s = "-1";
    if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
  }
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') return false;
  out = v * factor / denom;
  return std::isfinite(out) || std::isinf(v);
}

struct UnitEntry {
  const char* name;
  double scale;
  bool cyclic;
};

const std::vector<UnitEntry>& units_for(Quantity q) {
  static const std::vector<UnitEntry> freq{{"Hz", 1.0, true},     {"kHz", 1e3, true},      {"MHz", 1e6, true},
                                           {"GHz", 1e9, true},    {"rad/s", 1.0, false},   {"krad/s", 1e3, false},
                                           {"Mrad/s", 1e6, false}};
  static const std::vector<UnitEntry> time{{"s", 1.0, false},   {"ms", 1e-3, false}, {"us", 1e-6, false},
                                           {"ns", 1e-9, false}, {"ps", 1e-12, false}};
  static const std::vector<UnitEntry> field{{"T", 1.0, false}, {"mT", 1e-3, false}, {"G", 1e-4, false}};
  static const std::vector<UnitEntry> length{{"nm", 1.0, false}, {"A", 0.1, false}, {"pm", 1e-3, false}};
  static const std::vector<UnitEntry> angle{{"rad", 1.0, false}, {"deg", M_PI / 180.0, false}};
  static const std::vector<UnitEntry> rate{{"/s", 1.0, false}, {"1/s", 1.0, false}, {"/ms", 1e3, false},
                                           {"/us", 1e6, false}};
  static const std::vector<UnitEntry> none;
  switch (q) {
    case Quantity::Frequency: return freq;
    case Quantity::Time: return time;
    case Quantity::Field: return field;
    case Quantity::Length: return length;
    case Quantity::Angle: return angle;
    case Quantity::Rate: return rate;
    case Quantity::Number: return none;
  }
  return none;
}

}  // namespace

double parse_quantity(const std::string& text, Quantity q, bool two_pi) {
  const std::string s = trim(text);
  if (s == "inf" || s == "infinity") {
    if (q == Quantity::Time) return std::numeric_limits<double>::infinity();
    throw ConfigError("'inf' only allowed for times");
  }
  double v = 0.0;
  if (parse_pi_number(s, v)) return v;
  // Longest matching unit suffix.
  const UnitEntry* best = nullptr;
  for (const auto& u : units_for(q)) {
    const std::string n = u.name;
    if (s.size() > n.size() && s.compare(s.size() - n.size(), n.size(), n) == 0 &&
        (!best || n.size() > std::string(best->name).size()))
      best = &u;
  }
  if (!best) throw ConfigError("cannot read quantity '" + text + "'");
  const std::string num = s.substr(0, s.size() - std::string(best->name).size());
  if (!parse_pi_number(num, v)) throw ConfigError("cannot read quantity '" + text + "'");
  v *= best->scale;
  if (best->cyclic && two_pi) v *= kTwoPi;
  return v;
}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : -1; }

// Map with a closed key set; every lookup converts with unit handling.
class Section {
 public:
  Section(const YAML::Node& node, std::string path, std::set<std::string> keys, bool two_pi)
      : node_(node), path_(std::move(path)), two_pi_(two_pi) {
    if (!node_ || node_.IsNull()) return;
    if (!node_.IsMap()) throw ConfigError(path_ + ": expected a mapping", line_of(node_));
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      if (!keys.count(k)) throw ConfigError("unknown key '" + k + "' in " + path_, line_of(kv.first));
    }
  }

  bool has(const std::string& k) const { return node_ && node_.IsMap() && node_[k] && !node_[k].IsNull(); }
  YAML::Node raw(const std::string& k) const { return has(k) ? node_[k] : YAML::Node(); }
  const std::string& path() const { return path_; }
  bool two_pi() const { return two_pi_; }

  std::string str(const std::string& k, const std::string& def) const {
    if (!has(k)) return def;
    return scalar(node_[k], k);
  }
  double quantity(const std::string& k, Quantity q, double def) const {
    if (!has(k)) return def;
    return value(node_[k], k, q);
  }
  double value(const YAML::Node& n, const std::string& k, Quantity q) const {
    try {
      return parse_quantity(scalar(n, k), q, two_pi_);
    } catch (const ConfigError& e) {
      throw ConfigError(path_ + "." + k + ": " + e.what(), line_of(n));
    }
  }
  bool boolean(const std::string& k, bool def) const {
    if (!has(k)) return def;
    const std::string s = scalar(node_[k], k);
    if (s == "true" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "no" || s == "off") return false;
    throw ConfigError(path_ + "." + k + ": expected a boolean", line_of(node_[k]));
  }
  long long integer(const std::string& k, long long def) const {
    if (!has(k)) return def;
    const std::string s = scalar(node_[k], k);
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0') throw ConfigError(path_ + "." + k + ": expected an integer", line_of(node_[k]));
    return v;
  }
  std::size_t count(const std::string& k, std::size_t def, long long min = 0) const {
    const long long v = integer(k, static_cast<long long>(def));
    if (v < min) throw ConfigError(path_ + "." + k + ": must be >= " + std::to_string(min), line_of(node_[k]));
    return static_cast<std::size_t>(v);
  }
  Vec3 vec3(const YAML::Node& n, const std::string& k, Quantity q) const {
    if (!n.IsSequence() || n.size() != 3) throw ConfigError(path_ + "." + k + ": expected three values", line_of(n));
    return Vec3(value(n[0], k, q), value(n[1], k, q), value(n[2], k, q));
  }
  int level(const std::string& k, int def) const {
    const long long v = integer(k, def);
    if (v != 0 && v != -1) throw ConfigError(path_ + "." + k + ": must be 0 or -1", line_of(node_[k]));
    return static_cast<int>(v);
  }
  void fail(const std::string& k, const std::string& msg) const {
    throw ConfigError(path_ + "." + k + ": " + msg, line_of(has(k) ? node_[k] : node_));
  }

 private:
  std::string scalar(const YAML::Node& n, const std::string& k) const {
    if (!n.IsScalar()) throw ConfigError(path_ + "." + k + ": expected a scalar", line_of(n));
    return n.Scalar();
  }
  YAML::Node node_;
  std::string path_;
  bool two_pi_;
};

Species species_at(const Section& s, const std::string& k, Species def) {
  if (!s.has(k)) return def;
  try {
    return parse_species(s.str(k, ""));
  } catch (const std::exception& e) {
    s.fail(k, e.what());
  }
  return def;
}

Vec3 position_at(const Section& s, const YAML::Node& pos) {
  const Vec3 v = s.vec3(pos, "position", Quantity::Length);
  const std::string frame = s.str("frame", "nv");
  if (frame == "cubic") return lattice_to_nv_frame(v);
  if (frame == "nv") return v;
  s.fail("frame", "expected 'cubic' or 'nv'");
  return v;
}

ExplicitSpin parse_spin(const YAML::Node& n, const std::string& path, bool two_pi) {
  Section s(n, path, {"species", "position", "frame", "hyperfine", "a_parallel", "a_perp", "polarization"}, two_pi);
  ExplicitSpin sp;
  sp.species = species_at(s, "species", Species::C13);
  if (!s.has("position")) s.fail("position", "required");
  sp.position = position_at(s, s.raw("position"));
  if (s.has("hyperfine") && (s.has("a_parallel") || s.has("a_perp")))
    s.fail("hyperfine", "give either the vector or a_parallel/a_perp");
  if (s.has("hyperfine")) sp.hyperfine = s.vec3(s.raw("hyperfine"), "hyperfine", Quantity::Frequency);
  if (s.has("a_parallel") || s.has("a_perp"))
    sp.hyperfine = Vec3(s.quantity("a_perp", Quantity::Frequency, 0.0), 0.0,
                        s.quantity("a_parallel", Quantity::Frequency, 0.0));
  if (s.has("polarization")) {
    const double p = s.quantity("polarization", Quantity::Number, 0.0);
    if (!(p >= 0.0 && p <= 1.0)) s.fail("polarization", "must lie in [0, 1]");
    sp.polarization = p;
  }
  return sp;
}

std::vector<double> sweep_values(const Section& s, Quantity q) {
  std::vector<double> v;
  if (s.has("values")) {
    if (s.has("start") || s.has("stop") || s.has("points")) s.fail("values", "give either values or start/stop/points");
    const YAML::Node list = s.raw("values");
    if (!list.IsSequence()) s.fail("values", "expected a list");
    for (const auto& x : list) v.push_back(s.value(x, "values", q));
    if (v.empty()) s.fail("values", "empty sweep range");
    return v;
  }
  if (!s.has("start") || !s.has("stop")) throw ConfigError(s.path() + ": need values or start/stop/points");
  const double a = s.quantity("start", q, 0.0), b = s.quantity("stop", q, 0.0);
  const std::size_t n = s.count("points", 2, 1);
  if (n == 0) s.fail("points", "empty sweep range");
  if (n == 1) {
    if (a != b) s.fail("points", "one point needs start == stop");
    return {a};
  }
  if (!(b > a)) s.fail("stop", "empty sweep range (stop must exceed start)");
  for (std::size_t i = 0; i < n; ++i) v.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return v;
}

Quantity quantity_of(SweepVariable v) {
  switch (v) {
    case SweepVariable::RfFrequency: return Quantity::Frequency;
    case SweepVariable::Theta:
    case SweepVariable::Phase: return Quantity::Angle;
    case SweepVariable::Tau:
    case SweepVariable::Delay: return Quantity::Time;
  }
  return Quantity::Number;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(origin + ": " + e.msg, e.mark.line >= 0 ? e.mark.line + 1 : -1);
  }
  if (!root.IsMap()) throw ConfigError(origin + ": top level must be a mapping");

  RunConfig cfg;
  cfg.text = text;
  cfg.origin = origin;
  // two_pi first: it changes how every frequency is read.
  {
    Section pre(root, "config",
                {"name", "description", "desk_scale", "two_pi", "seed", "samples", "field", "bath", "memory",
                 "protocol", "sweep", "model", "output", "tolerances", "census"},
                true);
    cfg.two_pi = pre.boolean("two_pi", true);
  }
  const bool tp = cfg.two_pi;
  Section top(root, "config",
              {"name", "description", "desk_scale", "two_pi", "seed", "samples", "field", "bath", "memory",
               "protocol", "sweep", "model", "output", "tolerances", "census"},
              tp);
  cfg.name = top.str("name", "run");
  cfg.description = top.str("description", "");
  cfg.desk_scale = top.boolean("desk_scale", false);
  cfg.seed = static_cast<std::uint64_t>(top.count("seed", 1));
  cfg.samples = top.count("samples", 1, 1);
  cfg.B_z = top.quantity("field", Quantity::Field, 0.467);
  if (!(cfg.B_z > 0.0)) top.fail("field", "must be positive");
  cfg.output.name = cfg.name;

  // bath
  {
    Section b(top.raw("bath"), "bath",
              {"source", "file", "abundance", "shell_radius", "exclusion_radius", "reject_inner", "spins", "cce",
               "max_cluster_size", "coupling_threshold"},
              tp);
    const std::string src = b.str("source", "generate");
    if (src == "generate") cfg.bath.source = BathConfig::Source::Generate;
    else if (src == "file") cfg.bath.source = BathConfig::Source::File;
    else if (src == "explicit") cfg.bath.source = BathConfig::Source::Explicit;
    else if (src == "none") cfg.bath.source = BathConfig::Source::None;
    else b.fail("source", "expected generate, file, explicit or none");
    auto& p = cfg.bath.params;
    p.abundance = b.quantity("abundance", Quantity::Number, p.abundance);
    p.shell_radius = b.quantity("shell_radius", Quantity::Length, p.shell_radius);
    p.exclusion_radius = b.quantity("exclusion_radius", Quantity::Length, p.exclusion_radius);
    p.reject_inner = b.boolean("reject_inner", false);
    p.B_z = cfg.B_z;
    if (!(p.abundance > 0.0 && p.abundance <= 1.0)) b.fail("abundance", "must lie in (0, 1]");
    if (!(p.shell_radius > p.exclusion_radius)) b.fail("shell_radius", "must exceed exclusion_radius");
    cfg.bath.file = b.str("file", "");
    if (cfg.bath.source == BathConfig::Source::File && cfg.bath.file.empty()) b.fail("file", "required for source: file");
    if (b.has("spins")) {
      if (cfg.bath.source != BathConfig::Source::Explicit) b.fail("spins", "only used with source: explicit");
      const YAML::Node list = b.raw("spins");
      if (!list.IsSequence()) b.fail("spins", "expected a list");
      for (std::size_t i = 0; i < list.size(); ++i)
        cfg.bath.spins.push_back(parse_spin(list[i], "bath.spins[" + std::to_string(i) + "]", tp));
    }
    if (cfg.bath.source == BathConfig::Source::Explicit && cfg.bath.spins.empty()) b.fail("spins", "required for source: explicit");
    cfg.bath.cce = b.boolean("cce", true);
    cfg.bath.max_cluster_size = b.count("max_cluster_size", 3, 1);
    cfg.bath.coupling_threshold = b.quantity("coupling_threshold", Quantity::Frequency, 0.0);
  }

  // memory
  {
    Section m(top.raw("memory"), "memory", {"species", "position", "frame", "polarization"}, tp);
    const std::string sp = m.str("species", "none");
    if (sp == "none") cfg.memory.kind = MemoryConfig::Kind::None;
    else if (sp == "14N" || sp == "N14") cfg.memory.kind = MemoryConfig::Kind::N14;
    else if (sp == "13C" || sp == "C13") cfg.memory.kind = MemoryConfig::Kind::C13;
    else m.fail("species", "expected none, 14N or 13C");
    if (cfg.memory.kind == MemoryConfig::Kind::C13) {
      if (!m.has("position")) m.fail("position", "required for a 13C memory");
      cfg.memory.position = position_at(m, m.raw("position"));
    } else if (m.has("position")) {
      m.fail("position", "only used for a 13C memory");
    }
    cfg.memory.polarization = m.quantity("polarization", Quantity::Number, 1.0);
    if (!(cfg.memory.polarization >= 0.0 && cfg.memory.polarization <= 1.0)) m.fail("polarization", "must lie in [0, 1]");
  }

  // protocol
  {
    Section p(top.raw("protocol"), "protocol",
              {"type", "tau", "window_down", "delay_down", "final_pi", "delay", "rf", "lg"}, tp);
    auto& ps = cfg.protocol;
    try {
      ps.type = parse_protocol_type(p.str("type", "delayed_echo"));
    } catch (const ConfigError& e) {
      p.fail("type", e.what());
    }
    auto& e = ps.echo;
    e.tau = p.quantity("tau", Quantity::Time, e.tau);
    if (!(e.tau > 0.0)) p.fail("tau", "must be positive");
    e.manifold.window_down = p.level("window_down", 0);
    e.manifold.delay_down = p.level("delay_down", e.manifold.window_down);
    e.final_pi = p.boolean("final_pi", true);

    Section d(p.raw("delay"), "protocol.delay",
              {"kind", "duration", "cp_pulses", "explicit_swap", "relax_wait", "window_cp_pulses", "nuclear_species"},
              tp);
    try {
      e.delay.kind = parse_delay_kind(d.str("kind", "dd_protected_rf"));
    } catch (const std::exception& ex) {
      d.fail("kind", ex.what());
    }
    e.delay.duration = d.quantity("duration", Quantity::Time, e.delay.duration);
    e.delay.cp_pulses = static_cast<int>(d.count("cp_pulses", 100));
    e.delay.explicit_swap = d.boolean("explicit_swap", false);
    e.delay.relax_wait = d.quantity("relax_wait", Quantity::Time, e.delay.relax_wait);
    e.delay.window_cp_pulses = static_cast<int>(d.count("window_cp_pulses", 0));
    e.delay.nuclear_species = species_at(d, "nuclear_species", Species::C13);
    e.delay.memory = 0;

    if (p.has("rf")) {
      const YAML::Node list = p.raw("rf");
      if (!list.IsSequence()) p.fail("rf", "expected a list");
      for (std::size_t i = 0; i < list.size(); ++i) {
        Section r(list[i], "protocol.rf[" + std::to_string(i) + "]", {"frequency", "theta", "phase", "species"}, tp);
        RfTarget t;
        if (!r.has("frequency")) r.fail("frequency", "required");
        t.frequency = r.quantity("frequency", Quantity::Frequency, 0.0);
        t.theta = r.quantity("theta", Quantity::Angle, M_PI);
        t.phase = r.quantity("phase", Quantity::Angle, 0.0);
        t.species = species_at(r, "species", Species::C13);
        e.rf.push_back(t);
      }
    }
    if (p.has("lg")) {
      Section l(p.raw("lg"), "protocol.lg", {"delta", "species"}, tp);
      if (!l.has("delta")) l.fail("delta", "required");
      const double delta = l.quantity("delta", Quantity::Frequency, 0.0);
      if (!(delta > 0.0)) l.fail("delta", "must be positive");
      const Species sp = species_at(l, "species", Species::C13);
      if (ps.type == ProtocolType::DelayedEcho) e.lg = build_lg(delta, {0.0, 0.0}, sp);
      ps.lg_delta = delta;
      ps.lg_species = sp;
    }
  }

  // sweep
  {
    Section s(top.raw("sweep"), "sweep", {"variable", "target", "values", "start", "stop", "points"}, tp);
    try {
      cfg.sweep.variable = parse_sweep_variable(s.str("variable", "rf_frequency"));
    } catch (const ConfigError& e) {
      s.fail("variable", e.what());
    }
    cfg.sweep.target = s.count("target", 0);
    cfg.sweep.values = sweep_values(s, quantity_of(cfg.sweep.variable));
  }

  // model
  {
    Section m(top.raw("model"), "model",
              {"mode", "steps_per_period", "nuclear_couplings", "couplings_during_delay", "nitrogen_shifts",
               "electron_levels", "T1", "illumination", "protect_memory", "memory_dephasing", "lindblad"},
              tp);
    auto& eo = cfg.model.engine;
    const std::string mode = m.str("mode", "rwa");
    if (mode == "rwa") eo.mode = FrameMode::Rwa;
    else if (mode == "lab") eo.mode = FrameMode::Lab;
    else m.fail("mode", "expected rwa or lab");
    eo.steps_per_period = static_cast<int>(m.count("steps_per_period", 100, 1));
    eo.nuclear_couplings = m.boolean("nuclear_couplings", true);
    eo.couplings_during_delay = m.boolean("couplings_during_delay", true);
    eo.nitrogen_shifts = m.boolean("nitrogen_shifts", false);
    const long long lv = m.integer("electron_levels", 0);
    if (lv != 0 && lv != 2 && lv != 3) m.fail("electron_levels", "must be 0, 2 or 3");
    eo.electron_levels = static_cast<int>(lv);
    cfg.model.T1 = m.quantity("T1", Quantity::Time, cfg.model.T1);
    if (!(cfg.model.T1 > 0.0)) m.fail("T1", "must be positive");
    if (m.has("illumination")) {
      Section il(m.raw("illumination"), "model.illumination", {"pump", "dephasing", "target_p0"}, tp);
      auto& r = cfg.model.illumination;
      r.pump = il.quantity("pump", Quantity::Rate, r.pump);
      r.dephasing = il.quantity("dephasing", Quantity::Rate, r.dephasing);
      r.target_p0 = il.quantity("target_p0", Quantity::Number, r.target_p0);
      if (!(r.pump >= 0.0)) il.fail("pump", "must be >= 0");
      if (!(r.dephasing >= 0.0)) il.fail("dephasing", "must be >= 0");
      if (!(r.target_p0 > 0.0 && r.target_p0 <= 1.0)) il.fail("target_p0", "must lie in (0, 1]");
    }
    cfg.model.protect_memory = m.boolean("protect_memory", true);
    cfg.model.memory_dephasing = m.quantity("memory_dephasing", Quantity::Rate, 0.0);
    if (!(cfg.model.memory_dephasing >= 0.0)) m.fail("memory_dephasing", "must be >= 0");
    cfg.model.lindblad = m.boolean("lindblad", false);
  }

  // tolerances
  {
    Section t(top.raw("tolerances"), "tolerances",
              {"unitarity", "norm", "hermiticity", "trace", "eig_floor", "lindblad_eig_floor"}, tp);
    auto& tol = cfg.model.engine.tol;
    tol.unitarity = t.quantity("unitarity", Quantity::Number, tol.unitarity);
    tol.norm = t.quantity("norm", Quantity::Number, tol.norm);
    tol.hermiticity = t.quantity("hermiticity", Quantity::Number, tol.hermiticity);
    tol.trace = t.quantity("trace", Quantity::Number, tol.trace);
    tol.eig_floor = t.quantity("eig_floor", Quantity::Number, tol.eig_floor);
    tol.lindblad_eig_floor = t.quantity("lindblad_eig_floor", Quantity::Number, tol.lindblad_eig_floor);
    for (double v : {tol.unitarity, tol.norm, tol.hermiticity, tol.trace})
      if (!(v > 0.0)) throw ConfigError("tolerances: defect tolerances must be positive");
  }

  // output
  {
    Section o(top.raw("output"), "output", {"dir", "name", "factors"}, tp);
    cfg.output.dir = o.str("dir", cfg.output.dir);
    cfg.output.name = o.str("name", cfg.output.name);
    cfg.output.factors = o.boolean("factors", false);
    if (cfg.output.name.empty() || cfg.output.name.find('/') != std::string::npos)
      o.fail("name", "must be a plain file stem");
  }

  // census
  {
    Section c(top.raw("census"), "census", {"samples", "min_a_parallel", "resolutions"}, tp);
    cfg.census.samples = c.count("samples", cfg.census.samples, 1);
    cfg.census.min_A_parallel = c.quantity("min_a_parallel", Quantity::Frequency, cfg.census.min_A_parallel);
    if (c.has("resolutions")) {
      const YAML::Node list = c.raw("resolutions");
      if (!list.IsSequence()) c.fail("resolutions", "expected a list");
      for (const auto& x : list) {
        const double r = c.value(x, "resolutions", Quantity::Frequency);
        if (!(r > 0.0)) c.fail("resolutions", "must be positive");
        cfg.census.resolutions.push_back(r);
      }
    } else {
      for (double hz : {2000.0, 1000.0, 500.0, 200.0, 100.0}) cfg.census.resolutions.push_back(kTwoPi * hz);
    }
  }

  // Cross-section checks, so invalid runs stop before any simulation.
  const auto& e = cfg.protocol.echo;
  const bool swap_kind = e.delay.kind != DelayKind::DdProtectedRf;
  if (cfg.protocol.type == ProtocolType::DelayedEcho && swap_kind && cfg.memory.kind == MemoryConfig::Kind::None)
    throw ConfigError("protocol.delay.kind '" + delay_kind_name(e.delay.kind) + "' needs a memory spin");
  if (e.delay.explicit_swap && cfg.memory.kind != MemoryConfig::Kind::N14)
    throw ConfigError("protocol.delay.explicit_swap is only available with a 14N memory");
  if (cfg.bath.source == BathConfig::Source::None && cfg.memory.kind == MemoryConfig::Kind::None)
    throw ConfigError("bath: source none needs a memory spin");
  try {
    cfg.sweep.validate(cfg.protocol);
    (void)schedule_at(cfg.protocol, cfg.sweep, cfg.sweep.values.front());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("protocol/sweep: ") + ex.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

SystemSpec build_system(const RunConfig& cfg, std::uint64_t seed) {
  const PhysicalConstants& k = cfg.model.engine.constants;
  SpinBath bath;
  switch (cfg.bath.source) {
    case BathConfig::Source::Generate: bath = generate_bath(seed, cfg.bath.params, k); break;
    case BathConfig::Source::File: bath = load_bath_file(cfg.bath.file, k); break;
    case BathConfig::Source::Explicit:
      for (const auto& s : cfg.bath.spins) {
        NuclearSpin n;
        n.species = s.species;
        n.position = s.position;
        n.hyperfine_override = s.hyperfine;
        bath.add(n, k);
      }
      break;
    case BathConfig::Source::None: break;
  }

  SystemSpec sys;
  sys.system.B_z = cfg.B_z;
  if (cfg.memory.kind != MemoryConfig::Kind::None) {
    NuclearSpin m;
    if (cfg.memory.kind == MemoryConfig::Kind::N14) {
      m.species = Species::N14;
      m.position = nitrogen_site(k.lattice_constant_nm);
    } else {
      m.species = Species::C13;
      m.position = cfg.memory.position;
    }
    sys.system.add(m, k);
    sys.system.polarization.back() = cfg.memory.polarization;
    sys.core.push_back(0);
  }
  const std::size_t off = sys.system.size();
  const SpinCluster rest = cluster_from_bath(bath);
  for (std::size_t i = 0; i < rest.size(); ++i) {
    sys.system.spins.push_back(rest.spins[i]);
    sys.system.hyperfine.push_back(rest.hyperfine[i]);
    sys.system.polarization.push_back(rest.polarization[i]);
  }
  if (cfg.bath.source == BathConfig::Source::Explicit)
    for (std::size_t i = 0; i < cfg.bath.spins.size(); ++i)
      if (cfg.bath.spins[i].polarization) sys.system.polarization[off + i] = cfg.bath.spins[i].polarization;
  sys.system.validate();

  if (cfg.bath.cce && bath.size() > 0) {
    ClusterPartition part = partition_clusters(bath, cfg.bath.max_cluster_size, cfg.bath.coupling_threshold, k);
    for (auto& cl : part.clusters)
      for (auto& i : cl) i += off;
    for (auto& d : part.dropped) {
      d.i += off;
      d.j += off;
    }
    if (!sys.core.empty()) part.clusters.insert(part.clusters.begin(), sys.core);
    sys.partition = std::move(part);
  }
  return sys;
}

RunModel build_model(const RunConfig& cfg) {
  RunModel m;
  m.engine = cfg.model.engine;
  const bool illuminated = cfg.protocol.type == ProtocolType::DelayedEcho &&
                           cfg.protocol.echo.delay.kind == DelayKind::MemorySwapIllumination;
  if (cfg.model.lindblad || std::isfinite(cfg.model.T1) || illuminated) {
    LindbladModel l;
    l.T1 = cfg.model.T1;
    l.illumination = cfg.model.illumination;
    l.protect_memory = cfg.model.protect_memory;
    l.memory_dephasing = cfg.model.memory_dephasing;
    l.validate();
    m.lindblad = l;
  }
  if (cfg.protocol.echo.delay.explicit_swap) {
    NitrogenSwapOptions o;
    o.B_z = cfg.B_z;
    m.engine.explicit_swap = simulate_nitrogen_swap(o, m.engine.constants).gate9;
  }
  return m;
}

}  // namespace delecho
