// Shared fixtures for the unit tests: small models with known analytic values.
#pragma once

#include <mapkit/closed_forms.hpp>
#include <mapkit/experiment.hpp>
#include <mapkit/model.hpp>

namespace testutil {

// Two-phase on/off-style model with rates (l1, l2) and switching (s1, s2).
inline mapkit::MapModel mmpp2(double l1, double l2, double s1, double s2) {
  return mapkit::mmpp2_model({l1, l2, s1, s2});
}

// The canonical two-phase fixture used throughout: rates (1, 3), switching (1, 1).
// Known values: pi = (1/2, 1/2), alpha = (1/4, 3/4), lambda* = 2,
// scv = 9/7, dispersion index = 3/2.
inline mapkit::MapModel mmpp2_canonical() { return mmpp2(1.0, 3.0, 1.0, 1.0); }

// A single-phase model is a Poisson process; every index equals 1.
inline mapkit::MapModel poisson(double rate) {
  mapkit::Matrix C(1, 1), D(1, 1);
  C << -rate;
  D << rate;
  return mapkit::validate_model(C, D);
}

// Three-phase model where both C and D carry off-diagonal mass.
inline mapkit::MapModel general_map3() {
  mapkit::Matrix C(3, 3), D(3, 3);
  C << -3.0, 0.5, 0.5,  //
      0.2, -2.0, 0.3,   //
      0.1, 0.4, -1.5;
  D << 1.0, 0.5, 0.5,  //
      0.5, 0.5, 0.5,   //
      0.2, 0.3, 0.5;
  return mapkit::validate_model(C, D);
}

}  // namespace testutil
