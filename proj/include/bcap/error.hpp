#pragma once

#include <stdexcept>
#include <string>

namespace bcap {

/// Invalid parameters, malformed input files, unsatisfiable tolerances.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or index outside the domain an object was built for.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace bcap
