#pragma once

// Closed-form results for the two structured subfamilies:
//
//  * the two-phase Markov-modulated Poisson process, parametrised by event
//    rates (lambda1, lambda2) and switching rates (sigma1, sigma2), where
//    the interval scv, the limiting index of dispersion, the hazard-slope
//    factor and the ordering gap all have explicit elementary expressions;
//
//  * diagonal-C models (phase switches only at events), where the interval
//    scv is bracketed by a Kantorovich-type bound driven by the extreme
//    total rates.
//
// These are independent of the matrix-analytic pipeline on purpose: tests
// drive both routes against each other.

#include "mapkit/model.hpp"

namespace mapkit {

struct Mmpp2Params {
  double lambda1;  // event rate in phase 1
  double lambda2;  // event rate in phase 2
  double sigma1;   // switching rate 1 -> 2
  double sigma2;   // switching rate 2 -> 1

  void validate() const;
};

// Elementary-formula values for a two-phase modulated Poisson model.
struct Mmpp2ClosedForms {
  double c2;          // interval scv
  double d2;          // limiting index of dispersion of counts
  double dhr_factor;  // t-independent (nonpositive) factor of the
                      // hazard-slope expression; the full expression is
                      // dhr_factor * exp(-rate_sum * t)
  double rate_sum;    // sum of all four rates (trace of -C)
  double rate_mix;    // sigma2*lambda1 + lambda2*(sigma1 + lambda1) (det -C)
  double gap_coef;    // prefactor of the ordering-gap expression

  // Hazard-slope expression at time t (nonpositive for every valid
  // parameter set: the event-stationary interval has decreasing hazard).
  double hazard_condition(double t) const;

  // Ordering gap (pi - alpha) e^{Ct} 1 at time t, explicit form.
  double gap(double t) const;
};

Mmpp2ClosedForms mmpp2_metrics(const Mmpp2Params& p);

// Assemble the 2x2 model for the same parameters (for the pipeline route).
MapModel mmpp2_model(const Mmpp2Params& p,
                     const Tolerances& tol = default_tolerances());

// Kantorovich bracket for the interval scv of a diagonal-C model with
// total rates c_i: 1 <= scv <= 2*kappa^2/gamma^2 - 1 with
// kappa = (min + max)/2 and gamma = sqrt(min * max).
struct MsppScvBounds {
  double lower;  // always 1
  double upper;
  double kappa;
  double gamma;
};

MsppScvBounds mspp_scv_bounds(const MapModel& m);

}  // namespace mapkit
