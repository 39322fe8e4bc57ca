#include <algorithm>

#include "delecho/engine.hpp"
#include "delecho/errors.hpp"
#include "delecho/parallel.hpp"

namespace delecho {

CceResult cce_signal(const SpinCluster& bath, const ClusterPartition& partition, const ControlSchedule& s,
                     const EngineOptions& opt, const std::optional<LindbladModel>& model,
                     const std::vector<std::size_t>& core, unsigned threads) {
  bath.validate();
  partition.validate(bath.size());
  for (auto i : core)
    if (i >= bath.size()) throw ValidationError("cce: core spin out of range");

  // Core spins come first in every subsystem so swap events can address
  // them by their position in `core`.
  std::vector<std::vector<std::size_t>> systems;
  systems.push_back(core);
  for (const auto& cl : partition.clusters) {
    std::vector<std::size_t> idx = core;
    for (auto i : cl)
      if (std::find(core.begin(), core.end(), i) == core.end()) idx.push_back(i);
    if (idx.size() > core.size()) systems.push_back(std::move(idx));
  }

  std::vector<EvolveResult> out(systems.size());
  parallel_for(systems.size(), threads, [&](std::size_t k) {
    out[k] = evolve(subsystem(bath, systems[k]), s, opt, model);
  });

  CceResult r;
  r.core = coherence(out[0].state, out[0].down_level).c;
  r.report = out[0].report;
  r.down_level = out[0].down_level;
  r.total = r.core;
  for (std::size_t k = 1; k < out.size(); ++k) {
    const cplx ck = coherence(out[k].state, out[k].down_level).c;
    const cplx f = std::abs(r.core) > 0.0 ? ck / r.core : cplx(0.0, 0.0);
    r.factors.push_back(f);
    r.total *= f;
    r.report.merge(out[k].report);
  }
  r.report.clusters = systems.size() - 1;
  r.report.max_dropped_coupling = partition.max_dropped();
  return r;
}

}  // namespace delecho
