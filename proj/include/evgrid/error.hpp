#pragma once

#include <stdexcept>
#include <string>

namespace evgrid {

/// Input document does not conform to its schema (missing field, bad
/// number, dangling reference, duplicate id). Maps to CLI exit code 2.
class SchemaError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Network is not connected/radial where a radial feeder is required.
/// Maps to CLI exit code 3.
class TopologyError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Power flow failed: divergence or voltage collapse. Maps to exit code 4.
class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace evgrid
