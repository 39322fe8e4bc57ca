#pragma once
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "delecho/bath.hpp"
#include "delecho/engine.hpp"
#include "delecho/sweep.hpp"

namespace delecho {

enum class Quantity { Frequency, Time, Field, Length, Angle, Rate, Number };

// "5 MHz", "10 us", "0.467 T", "pi/2", ... Cyclic units (Hz) are multiplied
// by 2*pi when two_pi is set. Bare numbers are SI (rad/s, s, T, nm, rad).
double parse_quantity(const std::string& text, Quantity q, bool two_pi = true);

struct ExplicitSpin {
  Species species = Species::C13;
  Vec3 position = Vec3::Zero();        // nm, NV frame after parsing
  std::optional<Vec3> hyperfine;       // rad/s
  std::optional<double> polarization;
};

struct BathConfig {
  enum class Source { Generate, File, Explicit, None } source = Source::Generate;
  BathParams params;
  std::string file;
  std::vector<ExplicitSpin> spins;
  bool cce = true;
  std::size_t max_cluster_size = 3;
  double coupling_threshold = 0.0;  // rad/s
};

struct MemoryConfig {
  enum class Kind { None, N14, C13 } kind = Kind::None;
  Vec3 position = Vec3::Zero();  // 13C memory, nm NV frame
  double polarization = 1.0;     // P_up
};

struct ModelConfig {
  EngineOptions engine;
  double T1 = std::numeric_limits<double>::infinity();
  IlluminationRates illumination;
  bool protect_memory = true;
  double memory_dephasing = 0.0;
  bool lindblad = false;  // forced on by finite T1 or illumination
};

struct CensusConfig {
  std::size_t samples = 50;
  double min_A_parallel = kTwoPi * 4e3;
  std::vector<double> resolutions;
};

struct OutputConfig {
  std::string dir = ".";
  std::string name = "run";
  bool factors = false;
};

struct RunConfig {
  std::string text;     // source text, hashed into the metadata
  std::string origin;   // file path or preset name
  std::string name;
  std::string description;
  bool desk_scale = false;
  bool two_pi = true;
  std::uint64_t seed = 1;
  std::size_t samples = 1;  // seeds averaged
  double B_z = 0.467;
  BathConfig bath;
  MemoryConfig memory;
  ProtocolSpec protocol;
  SweepSpec sweep;
  ModelConfig model;
  OutputConfig output;
  CensusConfig census;
};

// Throws ConfigError (with a line number where known) on any schema violation.
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");
RunConfig load_config(const std::string& path);

// System for one seed: memory spin first, then the bath.
SystemSpec build_system(const RunConfig& cfg, std::uint64_t seed);
RunModel build_model(const RunConfig& cfg);

}  // namespace delecho
