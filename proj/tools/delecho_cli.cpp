// delecho command-line front end.
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "delecho/bath.hpp"
#include "delecho/config.hpp"
#include "delecho/errors.hpp"
#include "delecho/oracle_check.hpp"
#include "delecho/parallel.hpp"
#include "delecho/presets.hpp"
#include "delecho/report.hpp"
#include "delecho/schedule.hpp"
#include "delecho/sweep.hpp"

namespace {

using namespace delecho;

struct Common {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out_dir;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config, "YAML configuration file");
  cmd->add_option("--preset", c.preset, "built-in configuration (see `delecho presets`)");
  cmd->add_option("--seed", c.seed, "base seed (overrides the config)");
  cmd->add_option("--threads", c.threads, "worker threads (default: DELECHO_THREADS or all cores)");
  cmd->add_option("--out-dir", c.out_dir, "output directory (overrides the config)");
}

RunConfig load(const Common& c) {
  if (c.config.empty() == c.preset.empty()) throw ConfigError("give exactly one of a config file or --preset");
  RunConfig cfg = c.preset.empty() ? load_config(c.config) : parse_config(preset_text(c.preset), "preset:" + c.preset);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out_dir.empty()) cfg.output.dir = c.out_dir;
  return cfg;
}

unsigned threads_of(const Common& c) { return c.threads > 0 ? c.threads : default_thread_count(); }

std::string out_path(const RunConfig& cfg, const std::string& suffix) {
  return (std::filesystem::path(cfg.output.dir) / (cfg.output.name + suffix)).string();
}

int cmd_run(const Common& c) {
  const RunConfig cfg = load(c);
  const unsigned threads = threads_of(c);
  const RunModel model = build_model(cfg);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < cfg.samples; ++i) seeds.push_back(cfg.seed + i);

  std::vector<SpectrumResult> runs;
  for (auto s : seeds) {
    const SystemSpec sys = build_system(cfg, s);
    std::cerr << "seed " << s << ": " << sys.system.size() << " spins";
    if (sys.partition) std::cerr << ", " << sys.partition->clusters.size() << " clusters";
    std::cerr << ", " << cfg.sweep.values.size() << " points\n";
    runs.push_back(run_sweep(sys, cfg.protocol, cfg.sweep, model, threads));
  }
  const SpectrumResult r = average_spectra(runs);

  std::ostringstream table;
  write_spectrum(table, r, run_metadata(cfg, seeds), cfg.output.factors);
  std::ostringstream note;
  for (const auto& p : r.points)
    if (p.failed) note << "point " << std::setprecision(12) << p.value << ": " << p.message << '\n';
  for (const auto& m : r.report.messages) note << m << '\n';
  const std::string path = out_path(cfg, ".tsv");
  write_output(path, table.str(), r.failed(), note.str());
  std::cerr << "wrote " << path << '\n';
  if (r.failed()) {
    std::cerr << "propagation failures, see " << sidecar_path(path) << '\n';
    return 3;
  }
  return 0;
}

int cmd_census(const Common& c) {
  const RunConfig cfg = load(c);
  if (cfg.bath.source != BathConfig::Source::Generate) throw ConfigError("census needs bath.source: generate");
  const CensusResult res = census(cfg.seed, cfg.census.samples, cfg.bath.params, cfg.census.min_A_parallel,
                                  cfg.census.resolutions, threads_of(c));
  std::vector<std::uint64_t> seeds{cfg.seed};
  Metadata meta = run_metadata(cfg, seeds);
  meta.emplace_back("samples", std::to_string(cfg.census.samples));
  meta.emplace_back("min_a_parallel_hz", std::to_string(cfg.census.min_A_parallel / kTwoPi));
  std::ostringstream os;
  for (const auto& [k, v] : meta) os << "# " << k << ": " << v << '\n';
  os << "resolution_hz\tmean\tstddev\n" << std::setprecision(10);
  for (const auto& row : res.rows) os << row.resolution / kTwoPi << '\t' << row.mean << '\t' << row.stddev << '\n';
  const std::string path = out_path(cfg, ".census.tsv");
  write_output(path, os.str(), false);
  std::cout << os.str();
  std::cerr << "wrote " << path << '\n';
  return 0;
}

int cmd_export(const Common& c, const std::string& file) {
  const RunConfig cfg = load(c);
  const ControlSchedule s = schedule_at(cfg.protocol, cfg.sweep, cfg.sweep.values.front());
  std::ostringstream os;
  serialize_schedule(os, s);
  if (file.empty() || file == "-") {
    std::cout << os.str();
  } else {
    write_output(file, os.str(), false);
    std::cerr << "wrote " << file << '\n';
  }
  return 0;
}

int cmd_oracle(const OracleCheckOptions& o) {
  const auto rows = run_oracle_check(o);
  print_oracle_table(std::cout, rows);
  for (const auto& r : rows)
    if (!r.pass) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"delecho: delayed entanglement echo simulator"};
  app.set_version_flag("--version", delecho::version_string());
  app.require_subcommand(1);

  Common run_c, census_c, export_c;
  auto* run = app.add_subcommand("run", "run a sweep and write a spectrum table");
  add_common(run, run_c);
  auto* cen = app.add_subcommand("census", "count addressable registers over seeds");
  add_common(cen, census_c);
  auto* exp = app.add_subcommand("export-schedule", "write the control schedule of the first sweep point");
  add_common(exp, export_c);
  std::string export_file;
  exp->add_option("-o,--output", export_file, "output file (default stdout)");

  delecho::OracleCheckOptions oc;
  auto* ora = app.add_subcommand("oracle-check", "compare the engine with closed-form results");
  ora->add_option("--tol-rwa", oc.tol_rwa, "tolerance for rotating-wave rows");
  ora->add_option("--tol-engine", oc.tol_engine, "tolerance for lab-frame and pair rows");
  ora->add_flag("--flip-a-sign", oc.flip_A_sign, "negate the hyperfine sign seen by the engine (self test)");

  auto* pre = app.add_subcommand("presets", "list or print built-in configurations");
  std::string show;
  pre->add_option("name", show, "preset to print");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_c);
    if (*cen) return cmd_census(census_c);
    if (*exp) return cmd_export(export_c, export_file);
    if (*ora) return cmd_oracle(oc);
    if (*pre) {
      if (show.empty())
        for (const auto& n : delecho::preset_names()) std::cout << n << '\n';
      else
        std::cout << delecho::preset_text(show);
      return 0;
    }
  } catch (const delecho::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
