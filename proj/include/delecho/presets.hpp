#pragma once
#include <string>
#include <vector>

namespace delecho {

std::vector<std::string> preset_names();
// YAML text of a built-in configuration; ConfigError for unknown names.
const std::string& preset_text(const std::string& name);

}  // namespace delecho
