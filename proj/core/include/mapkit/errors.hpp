#pragma once

// Error hierarchy. Everything thrown by the library derives from
// mapkit::error so callers can catch one type at the boundary; the
// subclasses distinguish "your input is wrong" from "the numerics gave up".

#include <stdexcept>
#include <string>

namespace mapkit {

// Root of the library's exception hierarchy.
struct error : std::runtime_error {
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid domain input: malformed matrices, sign violations, reducible
// generators, bad probability vectors, unparsable model files.
struct validation_error : error {
  explicit validation_error(const std::string& what) : error(what) {}
};

// Invalid run configuration: contradictory options, insufficient sample
// budget, out-of-range parameters for an estimator or sweep.
struct config_error : error {
  explicit config_error(const std::string& what) : error(what) {}
};

// A numeric kernel failed to meet its accuracy contract (residual too
// large, cross-check disagreement, overflow, invariant breach).
struct numeric_error : error {
  explicit numeric_error(const std::string& what) : error(what) {}
};

// A linear system was singular to working tolerance.
struct singular_error : numeric_error {
  explicit singular_error(const std::string& what) : numeric_error(what) {}
};

}  // namespace mapkit
