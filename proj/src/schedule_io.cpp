#include <cstdlib>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "delecho/errors.hpp"
#include "delecho/schedule.hpp"

namespace delecho {
namespace {

// Hex floats round-trip bit for bit.
std::string hx(double v) {
  std::ostringstream os;
  os << std::hexfloat << v;
  return os.str();
}

double rd(std::istringstream& is, int line) {
  std::string tok;
  if (!(is >> tok)) throw ConfigError("schedule: missing number", line);
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw ConfigError("schedule: bad number '" + tok + "'", line);
  return v;
}

long long ri(std::istringstream& is, int line) {
  long long v;
  if (!(is >> v)) throw ConfigError("schedule: missing integer", line);
  return v;
}

std::string rs(std::istringstream& is, int line) {
  std::string v;
  if (!(is >> v)) throw ConfigError("schedule: missing field", line);
  return v;
}

}  // namespace

void serialize_schedule(std::ostream& os, const ControlSchedule& s) {
  os << "# delecho-schedule 1\n";
  os << "protocol " << (s.protocol.empty() ? "-" : s.protocol) << "\n";
  os << "total_duration " << hx(s.total_duration) << "\n";
  os << "initial_down " << s.initial_down << "\n";
  os << "period " << hx(s.period) << " " << hx(s.period_origin) << "\n";
  for (const auto& w : s.interaction_windows) os << "window " << hx(w.t0) << " " << hx(w.t1) << "\n";
  if (s.delay_window) os << "delay " << hx(s.delay_window->t0) << " " << hx(s.delay_window->t1) << "\n";
  for (double t : s.echo_pulse_times) os << "echo " << hx(t) << "\n";
  for (const auto& e : s.events) {
    os << "event " << hx(e.time) << " " << e.kind_name();
    if (const auto* p = std::get_if<InstantPulse>(&e.body)) {
      os << " " << (p->target == PulseTarget::Electron ? "electron" : "nuclear") << " " << hx(p->phase) << " "
         << hx(p->angle) << " " << species_name(p->species) << " " << p->spins.size();
      for (auto i : p->spins) os << " " << i;
    } else if (const auto* d = std::get_if<RfDrive>(&e.body)) {
      os << " " << hx(d->frequency) << " " << hx(d->amplitude) << " " << hx(d->phase) << " " << hx(d->t0) << " "
         << hx(d->t1) << " " << species_name(d->species);
    } else if (const auto* d = std::get_if<LGField>(&e.body)) {
      os << " " << hx(d->delta) << " " << hx(d->amplitude) << " " << hx(d->t0) << " " << hx(d->t1) << " "
         << species_name(d->species) << " " << d->always_on_capable << " " << d->suppression_regime;
    } else if (const auto* d = std::get_if<SpinLock>(&e.body)) {
      os << " " << hx(d->rabi) << " " << hx(d->phase) << " " << hx(d->t0) << " " << hx(d->t1);
    } else if (const auto* d = std::get_if<ManifoldTransfer>(&e.body)) {
      os << " " << d->new_down;
    } else if (const auto* d = std::get_if<SwapGate>(&e.body)) {
      os << " " << d->memory << " " << d->explicit_realization << " " << d->retrieve;
    } else if (const auto* d = std::get_if<Illumination>(&e.body)) {
      os << " " << d->rates_id << " " << hx(d->t0) << " " << hx(d->t1);
    }
    os << "\n";
  }
}

ControlSchedule parse_schedule(std::istream& in) {
  ControlSchedule s;
  std::string line;
  int no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# delecho-schedule", 0) == 0) header = true;
      continue;
    }
    if (!header) throw ConfigError("schedule: missing header", no);
    std::istringstream is(line);
    const std::string key = rs(is, no);
    if (key == "protocol") {
      s.protocol = rs(is, no);
      if (s.protocol == "-") s.protocol.clear();
    } else if (key == "total_duration") {
      s.total_duration = rd(is, no);
    } else if (key == "initial_down") {
      s.initial_down = static_cast<int>(ri(is, no));
    } else if (key == "period") {
      s.period = rd(is, no);
      s.period_origin = rd(is, no);
    } else if (key == "window") {
      Window w;
      w.t0 = rd(is, no);
      w.t1 = rd(is, no);
      s.interaction_windows.push_back(w);
    } else if (key == "delay") {
      Window w;
      w.t0 = rd(is, no);
      w.t1 = rd(is, no);
      s.delay_window = w;
    } else if (key == "echo") {
      s.echo_pulse_times.push_back(rd(is, no));
    } else if (key == "event") {
      const double t = rd(is, no);
      const std::string kind = rs(is, no);
      if (kind == "pulse") {
        InstantPulse p;
        const std::string tgt = rs(is, no);
        if (tgt != "electron" && tgt != "nuclear") throw ConfigError("schedule: bad pulse target", no);
        p.target = tgt == "electron" ? PulseTarget::Electron : PulseTarget::Nuclear;
        p.phase = rd(is, no);
        p.angle = rd(is, no);
        p.species = parse_species(rs(is, no));
        const long long n = ri(is, no);
        for (long long k = 0; k < n; ++k) p.spins.push_back(static_cast<std::size_t>(ri(is, no)));
        s.add(t, p);
      } else if (kind == "rf") {
        RfDrive d;
        d.frequency = rd(is, no);
        d.amplitude = rd(is, no);
        d.phase = rd(is, no);
        d.t0 = rd(is, no);
        d.t1 = rd(is, no);
        d.species = parse_species(rs(is, no));
        s.add(t, d);
      } else if (kind == "lg") {
        LGField d;
        d.delta = rd(is, no);
        d.amplitude = rd(is, no);
        d.t0 = rd(is, no);
        d.t1 = rd(is, no);
        d.species = parse_species(rs(is, no));
        d.always_on_capable = ri(is, no) != 0;
        d.suppression_regime = ri(is, no) != 0;
        s.add(t, d);
      } else if (kind == "spinlock") {
        SpinLock d;
        d.rabi = rd(is, no);
        d.phase = rd(is, no);
        d.t0 = rd(is, no);
        d.t1 = rd(is, no);
        s.add(t, d);
      } else if (kind == "transfer") {
        s.add(t, ManifoldTransfer{static_cast<int>(ri(is, no))});
      } else if (kind == "swap") {
        SwapGate g;
        g.memory = static_cast<std::size_t>(ri(is, no));
        g.explicit_realization = ri(is, no) != 0;
        g.retrieve = ri(is, no) != 0;
        s.add(t, g);
      } else if (kind == "illumination") {
        Illumination d;
        d.rates_id = rs(is, no);
        d.t0 = rd(is, no);
        d.t1 = rd(is, no);
        s.add(t, d);
      } else {
        throw ConfigError("schedule: unknown event kind '" + kind + "'", no);
      }
    } else {
      throw ConfigError("schedule: unknown key '" + key + "'", no);
    }
  }
  if (!header) throw ConfigError("schedule: empty input");
  return s;
}

}  // namespace delecho
