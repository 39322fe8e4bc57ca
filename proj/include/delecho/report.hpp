#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "delecho/config.hpp"
#include "delecho/sweep.hpp"

namespace delecho {

using Metadata = std::vector<std::pair<std::string, std::string>>;

std::string sha256_hex(const std::string& data);
std::string version_string();

// Everything needed to regenerate a table: config hash, seeds, version, tolerances.
Metadata run_metadata(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds);

// Writes `path` through a temporary file. A `path.failed` sidecar is left
// whenever `failed` is set or the write does not complete; a stale sidecar
// from an earlier run is removed on success.
void write_output(const std::string& path, const std::string& content, bool failed,
                  const std::string& failure_note = "");

std::string sidecar_path(const std::string& path);

}  // namespace delecho
