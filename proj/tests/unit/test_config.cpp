#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "delecho/config.hpp"
#include "delecho/errors.hpp"
#include "delecho/presets.hpp"
#include "delecho/report.hpp"

using namespace delecho;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

const char* kMinimal = R"(name: t
bath:
  source: explicit
  cce: false
  spins:
    - {species: 13C, position: [0.5, 0.5, 0.5], frame: cubic}
protocol:
  type: hahn
  tau: 10 us
sweep:
  variable: tau
  values: [10 us, 20 us]
)";
}  // namespace

TEST_CASE("quantities and units") {
  CHECK(parse_quantity("5 MHz", Quantity::Frequency) == doctest::Approx(kTwoPi * 5e6));
  CHECK(parse_quantity("5 MHz", Quantity::Frequency, false) == doctest::Approx(5e6));
  CHECK(parse_quantity("3 krad/s", Quantity::Frequency) == doctest::Approx(3e3));
  CHECK(parse_quantity("12.5 us", Quantity::Time) == doctest::Approx(12.5e-6));
  CHECK(parse_quantity("2 ms", Quantity::Time) == doctest::Approx(2e-3));
  CHECK(parse_quantity("inf", Quantity::Time) == std::numeric_limits<double>::infinity());
  CHECK(parse_quantity("467 mT", Quantity::Field) == doctest::Approx(0.467));
  CHECK(parse_quantity("10 G", Quantity::Field) == doctest::Approx(1e-3));
  CHECK(parse_quantity("7.14 A", Quantity::Length) == doctest::Approx(0.714));
  CHECK(parse_quantity("pi/2", Quantity::Angle) == doctest::Approx(M_PI / 2));
  CHECK(parse_quantity("-3pi/4", Quantity::Angle) == doctest::Approx(-3 * M_PI / 4));
  CHECK(parse_quantity("90 deg", Quantity::Angle) == doctest::Approx(M_PI / 2));
  CHECK(parse_quantity("1e6 /s", Quantity::Rate) == doctest::Approx(1e6));
  CHECK(parse_quantity("2 /us", Quantity::Rate) == doctest::Approx(2e6));
  CHECK(parse_quantity("0.25", Quantity::Number) == 0.25);
  CHECK(parse_quantity("1.5", Quantity::Time) == 1.5);
  CHECK_THROWS_AS(parse_quantity("inf", Quantity::Frequency), ConfigError);
  CHECK_THROWS_AS(parse_quantity("5 parsecs", Quantity::Length), ConfigError);
  CHECK_THROWS_AS(parse_quantity("5 MHz", Quantity::Time), ConfigError);
  CHECK_THROWS_AS(parse_quantity("", Quantity::Time), ConfigError);
  CHECK_THROWS_AS(parse_quantity("pi/0", Quantity::Angle), ConfigError);
}

TEST_CASE("minimal configuration") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.name == "t");
  CHECK(c.protocol.type == ProtocolType::Hahn);
  REQUIRE(c.sweep.values.size() == 2);
  CHECK(c.sweep.values[1] == doctest::Approx(20e-6));
  REQUIRE(c.bath.spins.size() == 1);
  CHECK((c.bath.spins[0].position - lattice_to_nv_frame(Vec3(0.5, 0.5, 0.5))).norm() < 1e-15);
  const SystemSpec sys = build_system(c, c.seed);
  CHECK(sys.system.size() == 1);
  CHECK_FALSE(sys.partition);
  CHECK(sys.core.empty());
  const RunModel m = build_model(c);
  CHECK_FALSE(m.lindblad);
}

TEST_CASE("unknown keys are rejected with a line number") {
  try {
    parse_config(slurp(fs::path(DELECHO_TEST_DATA) / "unknown_key.yaml"));
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(e.line == 10);
    CHECK(std::string(e.what()).find("tua") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "colour: blue\n"), ConfigError);
}

TEST_CASE("empty or malformed sweeps are rejected") {
  try {
    parse_config(slurp(fs::path(DELECHO_TEST_DATA) / "empty_sweep.yaml"));
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("empty sweep range") != std::string::npos);
  }
  std::string backwards = kMinimal;
  backwards.replace(backwards.find("values: [10 us, 20 us]"), 22, "start: 20 us\n  stop: 10 us\n  points: 3");
  CHECK_THROWS_AS(parse_config(backwards), ConfigError);
  std::string zero = kMinimal;
  zero.replace(zero.find("tau: 10 us"), 10, "tau: 0 us");
  CHECK_THROWS(parse_config(zero));
}

TEST_CASE("cross-field checks") {
  std::string s = kMinimal;
  s.replace(s.find("type: hahn"), 10, "type: delayed_echo\n  delay: {kind: memory_swap, duration: 1 ms}");
  s.replace(s.find("variable: tau"), 13, "variable: delay");
  CHECK_THROWS_AS(parse_config(s), ConfigError);  // swap without a memory
  std::string bad_level = kMinimal;
  bad_level.replace(bad_level.find("tau: 10 us"), 10, "tau: 10 us\n  window_down: 1");
  CHECK_THROWS_AS(parse_config(bad_level), ConfigError);
  CHECK_THROWS_AS(parse_config("name: [unclosed\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.yaml"), std::exception);
}

TEST_CASE("every preset parses and builds") {
  const auto names = preset_names();
  CHECK(names.size() >= 8);
  for (const auto& n : names) {
    INFO(n);
    const RunConfig c = parse_config(preset_text(n), "preset:" + n);
    CHECK(c.name == n);
    CHECK_FALSE(c.sweep.values.empty());
    const SystemSpec sys = build_system(c, c.seed);
    sys.system.validate();
    if (sys.partition) sys.partition->validate(sys.system.size());
    CHECK_NOTHROW(build_model(c));
    CHECK_NOTHROW(schedule_at(c.protocol, c.sweep, c.sweep.values.front()));
  }
  CHECK_THROWS_AS(preset_text("nope"), ConfigError);
}

TEST_CASE("memory spin leads the system") {
  const RunConfig c = parse_config(preset_text("fig3a"));
  const SystemSpec sys = build_system(c, c.seed);
  REQUIRE(sys.system.size() >= 2);
  CHECK(sys.system.spins[0].species == Species::N14);
  CHECK(sys.system.polarization[0].value() == 1.0);
  CHECK(sys.core == std::vector<std::size_t>{0});
  const RunModel m = build_model(c);
  CHECK(m.lindblad.has_value());

  const RunConfig g = parse_config(preset_text("fig2a"));
  const SystemSpec a = build_system(g, 7), b = build_system(g, 7), d = build_system(g, 8);
  REQUIRE(a.partition);
  CHECK(a.system.size() == b.system.size());
  for (std::size_t i = 0; i < a.system.size(); ++i) CHECK(a.system.spins[i].position == b.system.spins[i].position);
  CHECK(a.system.size() + d.system.size() > 0);
}

TEST_CASE("sha256 and metadata") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const RunConfig c = parse_config(kMinimal, "inline");
  const auto meta = run_metadata(c, {1, 2});
  bool hash = false, seeds = false;
  for (const auto& [k, v] : meta) {
    if (k == "config_sha256") hash = v == sha256_hex(c.text);
    if (k == "seeds") seeds = v.find('2') != std::string::npos;
  }
  CHECK(hash);
  CHECK(seeds);
  CHECK_FALSE(version_string().empty());
}

TEST_CASE("outputs leave a sidecar only on failure") {
  const fs::path dir = fs::temp_directory_path() / "delecho_write_test";
  fs::remove_all(dir);
  const std::string path = (dir / "sub" / "out.tsv").string();
  write_output(path, "a\n", true, "point 3 failed\n");
  CHECK(slurp(path) == "a\n");
  CHECK(fs::exists(sidecar_path(path)));
  CHECK(slurp(sidecar_path(path)) == "point 3 failed\n");
  write_output(path, "b\n", false);
  CHECK(slurp(path) == "b\n");
  CHECK_FALSE(fs::exists(sidecar_path(path)));
  CHECK_FALSE(fs::exists(path + ".tmp"));
  fs::remove_all(dir);
}
