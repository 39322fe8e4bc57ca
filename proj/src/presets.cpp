#include "delecho/presets.hpp"

#include <utility>

#include "delecho/errors.hpp"

namespace delecho {
namespace detail {
const std::vector<std::pair<std::string, std::string>>& preset_table();
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [n, t] : detail::preset_table()) out.push_back(n);
  return out;
}

const std::string& preset_text(const std::string& name) {
  for (const auto& [n, t] : detail::preset_table())
    if (n == name) return t;
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

}  // namespace delecho
