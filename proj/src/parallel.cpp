#include "delecho/parallel.hpp"

#include <cstdlib>
#include <string>

#include "delecho/errors.hpp"

namespace delecho {

unsigned default_thread_count() {
  if (const char* env = std::getenv("DELECHO_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError(std::string("DELECHO_THREADS must be a positive integer, got '") + env + "'");
    return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

}  // namespace delecho
