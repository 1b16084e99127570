#pragma once

// Exact second-order descriptors of a model and the four ordering
// properties checked throughout the project:
//
//   (I)   nonnegative long-run autocovariance mass of the counts:
//         pi D D# D 1 >= 0, where D# is the deviation matrix of Q;
//   (II)  decreasing hazard rate of the event-stationary interval,
//         stated as a sign condition on a quadratic form in alpha e^{Ct};
//   (III) interval variability at least Poisson:
//         (pi C 1)(pi C^{-1} 1) >= 1, i.e. scv >= 1;
//   (IV)  the time-stationary interval dominates the event-stationary one:
//         (pi - alpha) e^{Ct} 1 >= 0 for all t >= 0.
//
// Margins are signed with "healthy" positive: property P holds on the
// evaluated grid iff margin(P) >= -tolerance. For (I) the margin is the
// quantity itself; for (III) it is the product minus one ( = (scv-1)/2 );
// for (II) it is minus the worst value of the quadratic form; for (IV) it
// is the worst gap on the grid.
//
// Scalar quantities that admit two independent derivations (the interval
// scv via raw moments and via the stationary product form) are always
// computed both ways and cross-checked; disagreement is an error, never a
// silent pick.

#include <optional>
#include <string>
#include <vector>

#include "mapkit/model.hpp"

namespace mapkit {

// Deviation matrix D# of the generator Q with stationary vector pi:
// D# = (1 pi - Q)^{-1} - 1 pi. Satisfies D# 1 = 0, pi D# = 0,
// Q D# = D# Q = 1 pi - I. Construction verifies all three.
struct DeviationMatrix {
  Matrix dsharp;
  RowVector pi;
};

DeviationMatrix deviation_matrix(const MapModel& m,
                                 const Tolerances& tol = default_tolerances());
DeviationMatrix deviation_matrix(const MapModel& m, const StationaryPair& sp,
                                 const Tolerances& tol = default_tolerances());

// k-th raw moment of the event-stationary interval,
// M_k = k! alpha (-C)^{-k} 1, via repeated linear solves (never an
// explicit inverse power).
double interval_moment(const MapModel& m, int k,
                       const Tolerances& tol = default_tolerances());

// Squared coefficient of variation of the event-stationary interval.
double scv(const MapModel& m, const Tolerances& tol = default_tolerances());
double scv(const MapModel& m, const StationaryPair& sp,
           const Tolerances& tol = default_tolerances());

// Limiting index of dispersion of counts,
// d2 = 1 + (2/lambda*) pi D D# D 1.
double dispersion_index(const MapModel& m,
                        const Tolerances& tol = default_tolerances());
double dispersion_index(const MapModel& m, const StationaryPair& sp,
                        const DeviationMatrix& dev,
                        const Tolerances& tol = default_tolerances());

// Transient mean and variance of the counting process on a grid.
struct CountsSample {
  double t;
  double mean;
  double variance;
};

std::vector<CountsSample> variance_curve(
    const MapModel& m, const std::vector<double>& ts,
    const Tolerances& tol = default_tolerances());

// Hazard rate h(t) = density/survival of the interval started from eta,
// with its exact derivative. Every analytic derivative is cross-checked
// in place against a finite difference. If survival underflows the curve
// is truncated and `truncated_at` records the first unusable time.
struct HazardSample {
  double t;
  double value;
  double derivative;
};

struct HazardCurve {
  std::vector<HazardSample> samples;
  std::optional<double> truncated_at;
};

HazardCurve hazard_curve(const MapModel& m, const ProbVector& eta,
                         const std::vector<double>& ts,
                         const Tolerances& tol = default_tolerances());

// The ordering gap (pi - alpha) e^{Ct} 1 on a grid, with its minimum.
struct GapCurve {
  std::vector<double> ts;
  std::vector<double> values;
  double min_value;
  double argmin_t;
};

GapCurve stochastic_order_gap(const MapModel& m, const std::vector<double>& ts,
                              const Tolerances& tol = default_tolerances());
GapCurve stochastic_order_gap(const MapModel& m, const StationaryPair& sp,
                              const std::vector<double>& ts,
                              const Tolerances& tol = default_tolerances());

// One property verdict: margin as defined at the top of this header;
// worst_t is the grid point attaining the margin for the t-dependent
// properties (II) and (IV), and absent for (I) and (III).
struct PropertyVerdict {
  std::string property;  // "I", "II", "III", "IV"
  bool holds;
  double margin;
  std::optional<double> worst_t;
};

struct MetricsReport {
  double lambda_star;
  double m1;
  double m2;
  double scv;
  double d2;
  std::vector<PropertyVerdict> verdicts;

  bool all_hold() const;
};

// Full report: descriptors plus all four property verdicts, with the
// t-dependent properties scanned on the given grid. `tolerance` is the
// verdict threshold: holds iff margin >= -tolerance.
MetricsReport property_verdicts(const MapModel& m,
                                const std::vector<double>& ts,
                                double tolerance = 1e-12,
                                const Tolerances& tol = default_tolerances());

// Stable JSON rendering of a report (fixed field names).
std::string report_to_json(const MetricsReport& r);

}  // namespace mapkit
