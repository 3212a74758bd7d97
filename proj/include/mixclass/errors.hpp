#pragma once

#include <stdexcept>
#include <string>

namespace mixclass {

// Error taxonomy shared by the library and the CLI exit-code mapping:
//   ConfigError -> 2, AssumptionViolated -> 3, EstimationFailure -> 4.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class BudgetExceeded : public ConfigError {
 public:
  explicit BudgetExceeded(const std::string& msg) : ConfigError(msg) {}
};

class AssumptionViolated : public std::runtime_error {
 public:
  explicit AssumptionViolated(const std::string& msg) : std::runtime_error(msg) {}
};

class EstimationFailure : public std::runtime_error {
 public:
  explicit EstimationFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// A probabilistic set-family draw failed to provide a needed row; callers may
// retry with a fresh seed.
class ConstructionFailure : public EstimationFailure {
 public:
  explicit ConstructionFailure(const std::string& msg) : EstimationFailure(msg) {}
};

class InconsistencyError : public EstimationFailure {
 public:
  explicit InconsistencyError(const std::string& msg) : EstimationFailure(msg) {}
};

}  // namespace mixclass
