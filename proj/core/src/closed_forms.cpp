#include "mapkit/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mapkit {

void Mmpp2Params::validate() const {
  for (double v : {lambda1, lambda2, sigma1, sigma2})
    if (!std::isfinite(v))
      throw validation_error("mmpp2: parameters must be finite");
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
    throw validation_error("mmpp2: switching rates must be strictly positive");
  if (lambda1 < 0.0 || lambda2 < 0.0)
    throw validation_error("mmpp2: event rates must be nonnegative");
  if (!(lambda1 + lambda2 > 0.0))
    throw validation_error("mmpp2: at least one event rate must be positive");
}

Mmpp2ClosedForms mmpp2_metrics(const Mmpp2Params& p) {
  p.validate();
  const double l1 = p.lambda1, l2 = p.lambda2;
  const double s1 = p.sigma1, s2 = p.sigma2;
  const double ssum = s1 + s2;
  const double dl2 = (l1 - l2) * (l1 - l2);

  Mmpp2ClosedForms f{};
  f.rate_sum = ssum + l1 + l2;                    // trace of -C
  f.rate_mix = s2 * l1 + l2 * (s1 + l1);          // det of -C
  f.c2 = 1.0 + 2.0 * s1 * s2 * dl2 / (ssum * ssum * f.rate_mix);
  f.d2 = 1.0 + 2.0 * s1 * s2 * dl2 / (ssum * ssum * (l1 * s2 + l2 * s1));
  const double cross = s2 * l1 + s1 * l2;
  f.dhr_factor = -f.rate_mix * s1 * s2 * dl2 / (cross * cross);
  const double disc = f.rate_sum * f.rate_sum - 4.0 * f.rate_mix;
  f.gap_coef = s1 * s2 * dl2 / (ssum * cross * std::sqrt(disc));
  return f;
}

double Mmpp2ClosedForms::hazard_condition(double t) const {
  if (!(t >= 0.0))
    throw validation_error("mmpp2: time must be nonnegative");
  return dhr_factor * std::exp(-rate_sum * t);
}

double Mmpp2ClosedForms::gap(double t) const {
  if (!(t >= 0.0))
    throw validation_error("mmpp2: time must be nonnegative");
  // Recover the parameters' combinations from the stored invariants:
  // B = rate_sum, A = rate_mix, and B^2 - 4A = (a - d)^2 + 4 s1 s2 > 0
  // strictly, so the square root never degenerates.
  const double B = rate_sum, A = rate_mix;
  const double disc = B * B - 4.0 * A;
  const double sq = std::sqrt(disc);
  // gap(t) = coef * (e^{t(sq-B)/2} - e^{-t(sq+B)/2}); both exponents are
  // nonpositive (A > 0 implies sq < B), so this form never overflows.
  return gap_coef * (std::exp(0.5 * t * (sq - B)) -
                     std::exp(-0.5 * t * (sq + B)));
}

MapModel mmpp2_model(const Mmpp2Params& p, const Tolerances& tol) {
  p.validate();
  Matrix C(2, 2), D(2, 2);
  C << -(p.lambda1 + p.sigma1), p.sigma1, p.sigma2, -(p.lambda2 + p.sigma2);
  D << p.lambda1, 0.0, 0.0, p.lambda2;
  return validate_model(C, D, tol);
}

MsppScvBounds mspp_scv_bounds(const MapModel& m) {
  const Eigen::Index p = m.order();
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (i != j && m.C()(i, j) != 0.0)
        throw validation_error(
            "scv bounds: model must have diagonal C (phase changes only at "
            "events); C(" +
            std::to_string(i) + "," + std::to_string(j) + ") = " +
            std::to_string(m.C()(i, j)));
  double lo = -m.C()(0, 0), hi = lo;
  for (Eigen::Index i = 1; i < p; ++i) {
    const double c = -m.C()(i, i);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  MsppScvBounds b{};
  b.kappa = 0.5 * (lo + hi);
  b.gamma = std::sqrt(lo * hi);
  b.lower = 1.0;
  b.upper = 2.0 * b.kappa * b.kappa / (b.gamma * b.gamma) - 1.0;
  return b;
}

}  // namespace mapkit
