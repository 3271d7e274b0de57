#pragma once

#include <stdexcept>
#include <string>

namespace tangleproof {

// Error taxonomy, one class per process exit code so the CLI can map
// exceptions to codes without string matching.
//
//   ConfigError        -> exit 1  (bad parameter values, malformed flags)
//   SchemaError        -> exit 2  (file I/O, JSON/CSV shape; names the first
//                                  offending field or line)
//   AnchorError        -> exit 3  (no admissible forcing anchor in range)
//   ConstructionError  -> exit 4  (a forcing phase's precondition failed, or
//                                  an override is infeasible under the model)

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

class AnchorError : public std::runtime_error {
 public:
  explicit AnchorError(const std::string& what) : std::runtime_error(what) {}
};

class ConstructionError : public std::runtime_error {
 public:
  explicit ConstructionError(const std::string& what)
      : std::runtime_error(what) {}
};

// Override that asks the model for a zero-probability transition. Subtype of
// ConstructionError because forcing plans are the usual source.
class InfeasibleOverride : public ConstructionError {
 public:
  explicit InfeasibleOverride(const std::string& what)
      : ConstructionError(what) {}
};

// Internal invariant violation. Never expected to escape a correct build.
class LogicBug : public std::logic_error {
 public:
  explicit LogicBug(const std::string& what) : std::logic_error(what) {}
};

}  // namespace tangleproof
