#include "delecho/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "delecho/errors.hpp"

namespace delecho {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_pi(double angle) {
  const double r = std::fmod(std::abs(angle), 2.0 * M_PI);
  return std::abs(r - M_PI) < 1e-12;
}

bool electron_pi(const ControlEvent& e) {
  const auto* p = std::get_if<InstantPulse>(&e.body);
  return p && p->target == PulseTarget::Electron && is_pi(p->angle);
}

}  // namespace

bool ControlEvent::instantaneous() const {
  return std::holds_alternative<InstantPulse>(body) || std::holds_alternative<ManifoldTransfer>(body) ||
         std::holds_alternative<SwapGate>(body);
}

double ControlEvent::end_time() const {
  return std::visit(overloaded{[&](const RfDrive& d) { return d.t1; },
                               [&](const LGField& d) { return d.t1; },
                               [&](const SpinLock& d) { return d.t1; },
                               [&](const Illumination& d) { return d.t1; },
                               [&](const auto&) { return time; }},
                    body);
}

Priority ControlEvent::priority() const {
  return std::visit(overloaded{[](const ManifoldTransfer&) { return Priority::Transfer; },
                               [](const InstantPulse&) { return Priority::Pulse; },
                               [](const SwapGate& s) { return s.retrieve ? Priority::Retrieve : Priority::Store; },
                               [](const auto&) { return Priority::WindowEdge; }},
                    body);
}

std::string ControlEvent::kind_name() const {
  return std::visit(overloaded{[](const InstantPulse&) { return std::string("pulse"); },
                               [](const RfDrive&) { return std::string("rf"); },
                               [](const LGField&) { return std::string("lg"); },
                               [](const SpinLock&) { return std::string("spinlock"); },
                               [](const ManifoldTransfer&) { return std::string("transfer"); },
                               [](const SwapGate&) { return std::string("swap"); },
                               [](const Illumination&) { return std::string("illumination"); }},
                    body);
}

void ControlSchedule::add(double time, EventBody body) { events.push_back({time, std::move(body)}); }

void ControlSchedule::sort() {
  std::stable_sort(events.begin(), events.end(), [](const ControlEvent& a, const ControlEvent& b) {
    if (a.time != b.time) return a.time < b.time;
    return static_cast<int>(a.priority()) < static_cast<int>(b.priority());
  });
}

void ControlSchedule::validate() const {
  const double eps = 1e-12 * std::max(1.0, total_duration);
  if (!(total_duration >= 0.0) || !std::isfinite(total_duration))
    throw ValidationError("schedule: invalid total duration");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (!std::isfinite(e.time) || e.time < -eps) throw ValidationError("schedule: event before t=0");
    if (e.end_time() < e.time) throw ValidationError("schedule: window with negative length");
    if (e.end_time() > total_duration + eps) throw ValidationError("schedule: event beyond total duration");
    if (i > 0) {
      const auto& p = events[i - 1];
      if (p.time > e.time || (p.time == e.time && p.priority() > e.priority()))
        throw ValidationError("schedule: events not in canonical order");
    }
    if (const auto* t = std::get_if<ManifoldTransfer>(&e.body))
      if (t->new_down != 0 && t->new_down != -1) throw ValidationError("schedule: transfer target must be 0 or -1");
    if (const auto* p = std::get_if<InstantPulse>(&e.body))
      if (!std::isfinite(p->angle) || !std::isfinite(p->phase)) throw ValidationError("schedule: non-finite pulse");
    if (const auto* d = std::get_if<RfDrive>(&e.body))
      if (!(d->amplitude >= 0.0) || !(d->frequency >= 0.0)) throw ValidationError("schedule: negative rf parameters");
  }
  if (initial_down != 0 && initial_down != -1) throw ValidationError("schedule: initial down level must be 0 or -1");
  if (protocol == "delayed_echo") {
    if (interaction_windows.size() != 2) throw ValidationError("echo: need two interaction windows");
    const double a = interaction_windows[0].length(), b = interaction_windows[1].length();
    // Window edges are absolute times, so their lengths carry rounding of order ulp(end).
    const double slack = 1e-15 * std::max(a, b) + 8.0 * std::numeric_limits<double>::epsilon() * total_duration;
    if (std::abs(a - b) > slack)
      throw ValidationError("echo: interaction windows differ in length");
    if (!delay_window) throw ValidationError("echo: missing delay window");
  }
}

void ControlSchedule::append(const ControlSchedule& other, double offset) {
  for (auto e : other.events) {
    e.time += offset;
    std::visit(overloaded{[&](RfDrive& d) { d.t0 += offset; d.t1 += offset; },
                          [&](LGField& d) { d.t0 += offset; d.t1 += offset; },
                          [&](SpinLock& d) { d.t0 += offset; d.t1 += offset; },
                          [&](Illumination& d) { d.t0 += offset; d.t1 += offset; },
                          [](auto&) {}},
               e.body);
    events.push_back(e);
  }
  total_duration = std::max(total_duration, other.total_duration + offset);
  sort();
}

std::size_t ControlSchedule::count_electron_pi() const {
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), electron_pi));
}

ControlSchedule build_cp(int n, double tau_cp, double start, double phase) {
  if (n < 1) throw DomainError("build_cp: need at least one pulse");
  if (!(tau_cp > 0.0)) throw DomainError("build_cp: pulse interval must be positive");
  ControlSchedule s;
  s.protocol = "fragment";
  for (int k = 1; k <= n; ++k) s.add(start + (k - 0.5) * tau_cp, InstantPulse{PulseTarget::Electron, phase, M_PI, Species::C13, {}});
  s.total_duration = start + n * tau_cp;
  s.period = 2.0 * tau_cp;
  s.period_origin = start;
  s.sort();
  return s;
}

double dd_frequency(double tau_cp) { return M_PI / tau_cp; }

namespace {
double axy_shape(double u) { return 1.0 + 2.0 * std::cos(2.0 * u) - 2.0 * std::cos(u); }

double bisect(double lo, double hi, double target, double (*f)(double)) {
  double flo = f(lo) - target;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid) - target;
    if ((fm <= 0.0) == (flo <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}
}  // namespace

AxyLayout solve_axy(int k, double f, double period) {
  if (k < 1) throw DomainError("AXY: harmonic must be >= 1");
  if (!(period > 0.0)) throw DomainError("AXY: period must be positive");
  const double w = 2.0 * M_PI / period;
  const double f_cp = 4.0 / (k * M_PI) * std::sin(k * M_PI / 2.0);
  double u;
  if (std::abs(f_cp) < 1e-14) {
    if (std::abs(f) > 1e-14) throw DomainError("AXY: even harmonics carry no coefficient");
    u = M_PI / 5.0;
  } else {
    const double g = f / f_cp;
    const double u_turn = std::acos(0.25);
    if (g <= 1.0 && g >= -1.25) u = bisect(0.0, u_turn, g, axy_shape);
    else if (g > 1.0 && g <= 5.0) u = bisect(u_turn, M_PI, g, axy_shape);
    else throw DomainError("AXY: coefficient outside the reachable range");
  }
  const double x = u / (k * w);
  if (!(2.0 * x < period / 4.0)) throw DomainError("AXY: coefficient needs overlapping composite pulses");
  return {period, x, f};
}

ControlSchedule build_axy(int k, double f, bool symmetric, int periods, double period, double start,
                          bool composite_phases) {
  if (periods < 1) throw DomainError("AXY: need at least one period");
  // The anti-symmetric train is the symmetric one shifted by T/4; its sine
  // coefficient is -sin(k pi/2) times the symmetric cosine coefficient.
  const double f_sym = symmetric ? f : -f * std::sin(k * M_PI / 2.0);
  const AxyLayout lay = solve_axy(k, f_sym, period);
  const double x = lay.spacing;
  const double offs[5] = {-2 * x, -x, 0.0, x, 2 * x};
  ControlSchedule s;
  s.protocol = "fragment";
  for (int p = 0; p < periods; ++p) {
    const double base = start + p * period;
    const double c0 = symmetric ? period / 4.0 : 0.0;
    for (double c : {c0, c0 + period / 2.0})
      for (int i = 0; i < 5; ++i) {
        double t = c + offs[i];
        if (t < 0.0) t += period;
        s.add(base + t, InstantPulse{PulseTarget::Electron, composite_phases ? kAxyPhases[i] : 0.0, M_PI, Species::C13, {}});
      }
  }
  s.total_duration = start + periods * period;
  s.period = period;
  s.period_origin = start;
  s.sort();
  return s;
}

int modulation_function(const ControlSchedule& s, double t) {
  if (t < 0.0 || t > s.total_duration * (1 + 1e-15)) throw DomainError("modulation_function: time outside schedule");
  int n = 0;
  for (const auto& e : s.events)
    if (e.time < t && electron_pi(e)) ++n;
  return (n % 2 == 0) ? 1 : -1;
}

FourierPair fourier_coefficients(const ControlSchedule& s, int k) {
  const double T = s.period;
  if (!(T > 0.0)) throw DomainError("fourier_coefficients: schedule declares no period");
  const double o = s.period_origin;
  std::vector<double> first;
  int before = 0;
  std::vector<double> all;
  for (const auto& e : s.events)
    if (electron_pi(e)) all.push_back(e.time);
  for (double t : all) {
    if (t < o) ++before;
    else if (t < o + T * (1 - 1e-14)) first.push_back(t - o);
  }
  if (first.size() % 2 != 0) throw DomainError("fourier_coefficients: odd pulse count per period");
  // Every complete period must repeat the first one.
  const double tol = 1e-9 * T;
  const int periods = static_cast<int>(std::floor((s.total_duration - o) / T + 1e-9));
  for (int p = 1; p < periods; ++p) {
    std::vector<double> cur;
    for (double t : all)
      if (t >= o + p * T - tol && t < o + (p + 1) * T - tol) cur.push_back(t - o - p * T);
    if (cur.size() != first.size()) throw DomainError("fourier_coefficients: aperiodic schedule");
    for (std::size_t i = 0; i < cur.size(); ++i)
      if (std::abs(cur[i] - first[i]) > tol) throw DomainError("fourier_coefficients: aperiodic schedule");
  }
  const double kw = k * 2.0 * M_PI / T;
  double sign = (before % 2 == 0) ? 1.0 : -1.0;
  double a = 0.0, cs = 0.0, sn = 0.0;
  auto seg = [&](double lo, double hi) {
    cs += sign * (std::sin(kw * hi) - std::sin(kw * lo)) / kw;
    sn += sign * (std::cos(kw * lo) - std::cos(kw * hi)) / kw;
  };
  for (double t : first) {
    seg(a, t);
    a = t;
    sign = -sign;
  }
  seg(a, T);
  return {2.0 * cs / T, 2.0 * sn / T};
}

std::string delay_kind_name(DelayKind k) {
  switch (k) {
    case DelayKind::DdProtectedRf: return "dd_protected_rf";
    case DelayKind::MemorySwap: return "memory_swap";
    case DelayKind::MemorySwapIllumination: return "memory_swap_illumination";
    case DelayKind::DdWindows: return "dd_windows";
  }
  return "?";
}

DelayKind parse_delay_kind(const std::string& s) {
  for (auto k : {DelayKind::DdProtectedRf, DelayKind::MemorySwap, DelayKind::MemorySwapIllumination,
                 DelayKind::DdWindows})
    if (delay_kind_name(k) == s) return k;
  throw ValidationError("unknown delay kind '" + s + "'");
}

double rf_rotation_angle(double amplitude, double gamma_n, double t_rf) {
  if (amplitude < 0.0 || t_rf < 0.0) throw DomainError("rf_rotation_angle: negative input");
  return 0.5 * std::abs(gamma_n) * amplitude * t_rf;
}

double rf_amplitude_for_angle(double theta, double gamma_n, double t_rf) {
  if (theta == 0.0) return 0.0;
  if (!(t_rf > 0.0)) throw DomainError("rf amplitude: zero drive time");
  return 2.0 * std::abs(theta) / (std::abs(gamma_n) * t_rf);
}

LGField build_lg(double delta, Window w, Species species, double coupling, const PhysicalConstants& c) {
  if (!(delta > 0.0)) throw DomainError("build_lg: detuning must be positive");
  LGField f;
  f.delta = delta;
  f.amplitude = 2.0 * std::sqrt(2.0) * delta / std::abs(c.gamma_of(species));
  f.t0 = w.t0;
  f.t1 = w.t1;
  f.species = species;
  f.suppression_regime = coupling != 0.0 && std::sqrt(2.0) * delta / std::abs(coupling) >= 20.0;
  return f;
}

ControlSchedule build_delayed_entanglement_echo(const EchoSpec& spec, const PhysicalConstants& c) {
  const DelaySpec& d = spec.delay;
  if (!(spec.tau > 0.0)) throw DomainError("echo: tau must be positive");
  if (!(d.duration > 0.0)) throw DomainError("echo: delay duration must be positive");
  for (int lvl : {spec.manifold.window_down, spec.manifold.delay_down})
    if (lvl != 0 && lvl != -1) throw ValidationError("echo: manifold plan levels must be 0 or -1");
  const bool swap_kind = d.kind != DelayKind::DdProtectedRf;
  if (swap_kind && spec.manifold.delay_down != 0)
    throw ValidationError("echo: memory swaps run in the (+1, 0) manifold; delay_down must be 0");
  if (d.kind == DelayKind::DdProtectedRf && (d.cp_pulses < 2 || d.cp_pulses % 2 != 0))
    throw ValidationError("echo: delay CP needs an even pulse count");
  if (d.kind == DelayKind::DdWindows && (d.window_cp_pulses < 2 || d.window_cp_pulses % 2 != 0))
    throw ValidationError("echo: window CP needs an even pulse count");
  if (d.kind == DelayKind::MemorySwapIllumination && !(d.relax_wait < d.duration))
    throw ValidationError("echo: relaxation wait longer than the delay");

  const double tau = spec.tau, td = d.duration;
  const double t_delay0 = tau, t_delay1 = tau + td, t_end = t_delay1 + tau;
  const bool transfer = spec.manifold.window_down != spec.manifold.delay_down;

  ControlSchedule s;
  s.protocol = "delayed_echo";
  s.initial_down = spec.manifold.delay_down;
  s.total_duration = t_end;
  s.interaction_windows = {{0.0, tau}, {t_delay1, t_end}};
  s.delay_window = Window{t_delay0, t_delay1};

  if (transfer) s.add(0.0, ManifoldTransfer{spec.manifold.window_down});
  if (d.kind == DelayKind::DdWindows) {
    s.append(build_cp(d.window_cp_pulses, tau / d.window_cp_pulses, 0.0), 0.0);
    s.append(build_cp(d.window_cp_pulses, tau / d.window_cp_pulses, 0.0), t_delay1);
  }
  if (transfer) s.add(t_delay0, ManifoldTransfer{spec.manifold.delay_down});

  auto add_rf = [&](double t0, double t1) {
    for (const auto& r : spec.rf) {
      RfDrive drv;
      drv.frequency = r.frequency;
      drv.amplitude = rf_amplitude_for_angle(r.theta, c.gamma_of(r.species), t1 - t0);
      drv.phase = r.phase;
      drv.t0 = t0;
      drv.t1 = t1;
      drv.species = r.species;
      s.add(t0, drv);
    }
  };

  switch (d.kind) {
    case DelayKind::DdProtectedRf:
      s.append(build_cp(d.cp_pulses, td / d.cp_pulses, 0.0), t_delay0);
      add_rf(t_delay0, t_delay1);
      break;
    case DelayKind::MemorySwap:
      s.add(t_delay0, SwapGate{d.memory, d.explicit_swap, false});
      add_rf(t_delay0, t_delay1);
      s.add(t_delay1, SwapGate{d.memory, d.explicit_swap, true});
      break;
    case DelayKind::MemorySwapIllumination: {
      const double lit = t_delay1 - d.relax_wait;
      s.add(t_delay0, SwapGate{d.memory, d.explicit_swap, false});
      s.add(t_delay0, Illumination{"default", t_delay0, lit});
      add_rf(t_delay0, lit);
      s.add(t_delay1, SwapGate{d.memory, d.explicit_swap, true});
      break;
    }
    case DelayKind::DdWindows: {
      const double q1 = t_delay0 + 0.25 * td, q3 = t_delay0 + 0.75 * td;
      s.add(t_delay0, SwapGate{d.memory, d.explicit_swap, false});
      InstantPulse np{PulseTarget::Nuclear, 0.0, M_PI, d.nuclear_species, {}};
      s.add(q1, np);
      add_rf(q1, q3);
      s.add(q3, np);
      s.add(t_delay1, SwapGate{d.memory, d.explicit_swap, true});
      break;
    }
  }

  if (transfer) s.add(t_delay1, ManifoldTransfer{spec.manifold.window_down});
  s.add(t_delay1, InstantPulse{PulseTarget::Electron, 0.0, M_PI, Species::C13, {}});
  s.echo_pulse_times.push_back(t_delay1);
  if (transfer) s.add(t_end, ManifoldTransfer{spec.manifold.delay_down});
  if (spec.final_pi) {
    s.add(t_end, InstantPulse{PulseTarget::Electron, 0.0, M_PI, Species::C13, {}});
    s.echo_pulse_times.push_back(t_end);
  }
  if (spec.lg) {
    LGField lg = *spec.lg;
    lg.t0 = 0.0;
    lg.t1 = t_end;
    s.add(0.0, lg);
  }
  s.sort();
  s.validate();
  return s;
}

}  // namespace delecho
