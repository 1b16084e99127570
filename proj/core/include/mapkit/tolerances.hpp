#pragma once

// Central numeric tolerances. Every kernel and metric takes a
// `const Tolerances&` (defaulted to default_tolerances()) instead of
// hiding magic constants, so a caller with a badly scaled model can
// loosen a single knob in one place.

namespace mapkit {

struct Tolerances {
  // |pivot| < pivot_rel * ||A||_inf  =>  treat the matrix as singular.
  double pivot_rel = 1e-13;

  // Linear solves must satisfy ||Ax - b||_inf <= solve_residual * (1 + ||b||_inf)
  // (after at most one step of iterative refinement).
  double solve_residual = 1e-10;

  // ||pi Q||_inf for the stationary vector, relative to max(1, ||Q||_inf).
  double stationary_residual = 1e-12;

  // Row sums of C + D must vanish to this absolute tolerance.
  double row_sum = 1e-12;

  // Negative probability-vector entries larger than this are clamped to
  // zero during renormalisation; anything more negative is an error.
  double prob_negativity = 1e-12;

  // Agreement between the two independent routes to the stationary
  // post-event vector (via pi D and via the embedded-chain fixed point).
  double pair_agreement = 1e-10;

  // Row sums of the embedded transition matrix.
  double stochastic_row = 1e-10;

  // Agreement between independently derived routes to the same scalar
  // (e.g. the two interval-variability formulas), relative to max(1, |value|).
  double route_agreement = 1e-9;

  // Defect tolerances for the group-inverse identities.
  double deviation_identity = 1e-9;

  // Hazard-derivative finite-difference cross-check: the analytic value
  // must match a centred difference to max(abs, rel * |value|).
  double hazard_fd_abs = 1e-6;
  double hazard_fd_rel = 1e-4;

  // Survival mass below this is treated as underflow and truncates a
  // hazard curve instead of dividing by a denormal.
  double survival_underflow = 1e-300;

  // Mixing cut-off used when an estimator needs e^{Qt} ~ 1*pi.
  double mixing = 1e-6;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace mapkit
