#pragma once
#include <stdexcept>
#include <string>

namespace delecho {

// Input outside the physical or mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Structurally invalid schedule, bath, or state.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  int line = -1;
  ConfigError(const std::string& msg, int line_no = -1)
      : std::runtime_error(line_no >= 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
        line(line_no) {}
};

struct PropagationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace delecho
