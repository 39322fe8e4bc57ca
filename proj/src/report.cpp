#include "delecho/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "delecho/errors.hpp"
#include "delecho/kernels/kernels.hpp"

#ifndef DELECHO_VERSION
#define DELECHO_VERSION "unknown"
#endif

namespace delecho {

std::string sha256_hex(const std::string& data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string version_string() { return DELECHO_VERSION; }

namespace {
std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}
}  // namespace

Metadata run_metadata(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  Metadata m;
  m.emplace_back("program", "delecho " + version_string());
  m.emplace_back("config", cfg.origin);
  m.emplace_back("config_sha256", sha256_hex(cfg.text));
  m.emplace_back("name", cfg.name);
  m.emplace_back("scale", cfg.desk_scale ? "desk (reduced bath/sample size)" : "full");
  std::string s;
  for (auto x : seeds) s += (s.empty() ? "" : ",") + std::to_string(x);
  m.emplace_back("seeds", s);
  m.emplace_back("protocol", protocol_type_name(cfg.protocol.type));
  m.emplace_back("mode", cfg.model.engine.mode == FrameMode::Rwa ? "rwa" : "lab");
  m.emplace_back("sweep_units", cfg.sweep.variable == SweepVariable::RfFrequency ? "rad/s"
                                : (cfg.sweep.variable == SweepVariable::Tau || cfg.sweep.variable == SweepVariable::Delay)
                                    ? "s"
                                    : "rad");
  const auto& t = cfg.model.engine.tol;
  m.emplace_back("tolerances", "unitarity=" + num(t.unitarity) + " norm=" + num(t.norm) +
                                   " hermiticity=" + num(t.hermiticity) + " trace=" + num(t.trace) +
                                   " eig_floor=" + num(t.eig_floor) + " lindblad_eig_floor=" + num(t.lindblad_eig_floor));
  m.emplace_back("kernels", kernels::isa_name(kernels::active_isa()));
  m.emplace_back("steps_per_period", std::to_string(cfg.model.engine.steps_per_period));
  return m;
}

std::string sidecar_path(const std::string& path) { return path + ".failed"; }

void write_output(const std::string& path, const std::string& content, bool failed, const std::string& note) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const std::string side = sidecar_path(path);
  // Marker first, so an interrupted write never leaves an unmarked file.
  {
    std::ofstream m(side);
    if (!m) throw std::runtime_error("cannot write " + side);
    m << (failed ? note : std::string("incomplete write\n"));
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + tmp);
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write to " + tmp + " failed");
  }
  fs::rename(tmp, p);
  if (!failed) fs::remove(side);
}

}  // namespace delecho
