#pragma once

// Uniform evaluation grid for the time-indexed curves. Points are
// start + k*step, computed by multiplication (not accumulation) so the
// grid is bit-reproducible and exactly the same for every consumer.

#include <cmath>
#include <vector>

#include "mapkit/errors.hpp"

namespace mapkit {

struct TimeGrid {
  double start = 0.0;
  double stop = 10.0;
  double step = 0.2;

  void validate() const {
    if (!(step > 0.0)) throw validation_error("grid: step must be positive");
    if (!(start >= 0.0))
      throw validation_error("grid: start must be nonnegative");
    if (!(stop >= start))
      throw validation_error("grid: stop must be at least start");
    if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step))
      throw validation_error("grid: parameters must be finite");
  }

  std::vector<double> points() const {
    validate();
    const auto n =
        static_cast<std::size_t>(std::floor((stop - start) / step + 0.5)) + 1;
    std::vector<double> ts(n);
    for (std::size_t k = 0; k < n; ++k) ts[k] = start + double(k) * step;
    return ts;
  }
};

}  // namespace mapkit
