#include "mapkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace mapkit {

namespace {

void check_grid(const std::vector<double>& ts) {
  if (ts.empty()) throw validation_error("time grid must be non-empty");
  for (size_t k = 0; k < ts.size(); ++k) {
    if (!std::isfinite(ts[k]) || ts[k] < 0.0)
      throw validation_error("time grid point " + std::to_string(k) +
                             " must be finite and nonnegative");
    if (k > 0 && !(ts[k] > ts[k - 1]))
      throw validation_error("time grid must be strictly increasing");
  }
}

// Both derivations of the interval scv; returns the moment-based value
// after checking agreement with the stationary product form.
double scv_checked(const MapModel& m, const StationaryPair& sp,
                   const Tolerances& tol, double* m1_out, double* m2_out) {
  LinearSolver neg_c(Matrix(-m.C()), tol);
  const Vector one = Vector::Ones(m.order());
  const Vector x1 = neg_c.solve(one);          // (-C)^{-1} 1
  const Vector x2 = neg_c.solve(x1);           // (-C)^{-2} 1
  const double m1 = sp.alpha.row() * x1;
  const double ax2 = sp.alpha.row() * x2;
  const double m2 = 2.0 * ax2;
  const double c2_moment = m2 / (m1 * m1) - 1.0;

  // (pi C 1)(pi C^{-1} 1) = lambda* . pi (-C)^{-1} 1 = (scv + 1)/2.
  const double pix1 = sp.pi.row() * x1;
  const double c2_product = 2.0 * sp.lambda_star * pix1 - 1.0;

  if (std::abs(c2_moment - c2_product) >
      tol.route_agreement * std::max(1.0, std::abs(c2_moment)))
    throw numeric_error("scv: moment route " + std::to_string(c2_moment) +
                        " and product route " + std::to_string(c2_product) +
                        " disagree");
  if (m1_out) *m1_out = m1;
  if (m2_out) *m2_out = m2;
  return c2_moment;
}

}  // namespace

DeviationMatrix deviation_matrix(const MapModel& m, const StationaryPair& sp,
                                 const Tolerances& tol) {
  const Eigen::Index p = m.order();
  const Matrix one_pi = Vector::Ones(p) * sp.pi.row();
  const Matrix Z = one_pi - m.Q();
  Matrix fundamental;
  try {
    fundamental = LinearSolver(Z, tol).inverse();
  } catch (const singular_error& e) {
    throw numeric_error(std::string("deviation matrix: (1 pi - Q) is "
                                    "numerically singular: ") +
                        e.what());
  }
  Matrix dsharp = fundamental - one_pi;

  // Group-inverse identities; failure means the generator is too badly
  // conditioned for anything downstream to be trusted.
  const double tol_id = tol.deviation_identity;
  const double rows = (dsharp * Vector::Ones(p)).cwiseAbs().maxCoeff();
  if (rows > tol_id)
    throw numeric_error("deviation matrix: ||D# 1||_inf = " +
                        std::to_string(rows) + " exceeds " +
                        std::to_string(tol_id));
  const double left = (sp.pi.row() * dsharp).cwiseAbs().maxCoeff();
  if (left > tol_id)
    throw numeric_error("deviation matrix: ||pi D#||_inf = " +
                        std::to_string(left) + " exceeds " +
                        std::to_string(tol_id));
  const Matrix defect =
      m.Q() * dsharp - (one_pi - Matrix::Identity(p, p));
  const double qd = defect.cwiseAbs().maxCoeff();
  if (qd > tol_id * std::max(1.0, m.Q().cwiseAbs().maxCoeff()))
    throw numeric_error("deviation matrix: ||Q D# - (1 pi - I)||_inf = " +
                        std::to_string(qd) + " exceeds tolerance");

  return DeviationMatrix{std::move(dsharp), sp.pi.row()};
}

DeviationMatrix deviation_matrix(const MapModel& m, const Tolerances& tol) {
  return deviation_matrix(m, stationary_pair(m, tol), tol);
}

double interval_moment(const MapModel& m, int k, const Tolerances& tol) {
  if (k < 1 || k > 170)
    throw validation_error("interval moment: order must be in [1, 170], got " +
                           std::to_string(k));
  const StationaryPair sp = stationary_pair(m, tol);
  LinearSolver neg_c(Matrix(-m.C()), tol);
  Vector x = Vector::Ones(m.order());
  double factorial = 1.0;
  for (int i = 1; i <= k; ++i) {
    x = neg_c.solve(x);
    factorial *= double(i);
  }
  const double ax = sp.alpha.row() * x;
  return factorial * ax;
}

double scv(const MapModel& m, const StationaryPair& sp,
           const Tolerances& tol) {
  return scv_checked(m, sp, tol, nullptr, nullptr);
}

double scv(const MapModel& m, const Tolerances& tol) {
  return scv(m, stationary_pair(m, tol), tol);
}

double dispersion_index(const MapModel& m, const StationaryPair& sp,
                        const DeviationMatrix& dev, const Tolerances& tol) {
  const RowVector u = sp.pi.row() * m.D();
  const Vector w = m.D() * Vector::Ones(m.order());
  const double mass = u * dev.dsharp * w;
  const double d2 = 1.0 + 2.0 / sp.lambda_star * mass;
  if (m.map_class() != MapClass::GeneralMap && d2 < 1.0 - 1e-12)
    throw numeric_error("dispersion index: " + std::to_string(d2) +
                        " < 1 for a " +
                        std::string(to_string(m.map_class())) +
                        ", which is impossible; the computation is not "
                        "trustworthy");
  return d2;
}

double dispersion_index(const MapModel& m, const Tolerances& tol) {
  const StationaryPair sp = stationary_pair(m, tol);
  return dispersion_index(m, sp, deviation_matrix(m, sp, tol), tol);
}

std::vector<CountsSample> variance_curve(const MapModel& m,
                                         const std::vector<double>& ts,
                                         const Tolerances& tol) {
  check_grid(ts);
  const StationaryPair sp = stationary_pair(m, tol);
  const DeviationMatrix dev = deviation_matrix(m, sp, tol);
  const Eigen::Index p = m.order();
  const RowVector u = sp.pi.row() * m.D();  // pi D
  const Vector w = m.D() * Vector::Ones(p);  // D 1
  const Vector r = dev.dsharp * w;           // D# D 1
  const RowVector s = u * dev.dsharp;        // pi D D#
  const double a = u * r;                    // pi D D# D 1

  std::vector<CountsSample> out;
  out.reserve(ts.size());
  for (double t : ts) {
    const Matrix Et = expm(m.Q(), t, tol);
    // Var N(t) = (lambda* + 2 pi D D# D 1) t - 2 pi D D# (I - e^{Qt}) D# D 1
    const double transient = s * (r - Et * r);
    const double var = (sp.lambda_star + 2.0 * a) * t - 2.0 * transient;
    out.push_back(CountsSample{t, sp.lambda_star * t, var});
  }
  return out;
}

namespace {

// Hazard value at one time for the cross-check path; returns survival too.
struct HazardPoint {
  double survival;
  double value;
};

HazardPoint hazard_at(const RowVector& eta, const Matrix& C, const Vector& w,
                      double t, const Tolerances& tol) {
  const RowVector row = eta * expm(C, t, tol);
  const double surv = row.sum();
  const double dens = row * w;
  return HazardPoint{surv, dens / surv};
}

}  // namespace

HazardCurve hazard_curve(const MapModel& m, const ProbVector& eta,
                         const std::vector<double>& ts,
                         const Tolerances& tol) {
  check_grid(ts);
  if (eta.size() != m.order())
    throw validation_error("hazard: start vector has " +
                           std::to_string(eta.size()) +
                           " entries but the model has " +
                           std::to_string(m.order()) + " phases");
  const Matrix& C = m.C();
  const Vector w = m.D() * Vector::Ones(m.order());  // D 1 = (-C) 1
  const RowVector eta_c = eta.row() * C;

  HazardCurve curve;
  curve.samples.reserve(ts.size());
  const double fd_step = 1e-4;

  for (double t : ts) {
    const Matrix Et = expm(C, t, tol);
    const RowVector row = eta.row() * Et;
    const double surv = row.sum();
    if (!(surv > tol.survival_underflow)) {
      curve.truncated_at = t;
      break;
    }
    const double dens = row * w;
    const double h = dens / surv;

    // h'(t) = [ (eta C e^{Ct} (-C) 1)(eta e^{Ct} 1)
    //          - (eta C e^{Ct} 1)(eta e^{Ct} (-C) 1) ] / (eta e^{Ct} 1)^2
    const RowVector arow = eta_c * Et;
    const double aw = arow * w;
    const double dh = (aw * surv - arow.sum() * dens) / (surv * surv);

    // In-place finite-difference guard on the analytic derivative.
    double fd;
    if (t >= fd_step) {
      const double hp = hazard_at(eta.row(), C, w, t + fd_step, tol).value;
      const double hm = hazard_at(eta.row(), C, w, t - fd_step, tol).value;
      fd = (hp - hm) / (2.0 * fd_step);
    } else {
      const double h1 = hazard_at(eta.row(), C, w, t + fd_step, tol).value;
      const double h2 = hazard_at(eta.row(), C, w, t + 2.0 * fd_step, tol).value;
      fd = (-3.0 * h + 4.0 * h1 - h2) / (2.0 * fd_step);
    }
    const double fd_tol =
        std::max(tol.hazard_fd_abs, tol.hazard_fd_rel * std::abs(dh));
    if (std::abs(dh - fd) > fd_tol)
      throw numeric_error(
          "hazard: analytic derivative " + std::to_string(dh) + " at t = " +
          std::to_string(t) + " disagrees with finite difference " +
          std::to_string(fd));

    curve.samples.push_back(HazardSample{t, h, dh});
  }
  return curve;
}

GapCurve stochastic_order_gap(const MapModel& m, const StationaryPair& sp,
                              const std::vector<double>& ts,
                              const Tolerances& tol) {
  check_grid(ts);
  const RowVector diff = sp.pi.row() - sp.alpha.row();
  GapCurve curve;
  curve.ts = ts;
  curve.values.reserve(ts.size());
  curve.min_value = std::numeric_limits<double>::infinity();
  curve.argmin_t = ts.front();
  for (double t : ts) {
    const double gap = (diff * expm(m.C(), t, tol)).sum();
    curve.values.push_back(gap);
    if (gap < curve.min_value) {
      curve.min_value = gap;
      curve.argmin_t = t;
    }
  }
  return curve;
}

GapCurve stochastic_order_gap(const MapModel& m, const std::vector<double>& ts,
                              const Tolerances& tol) {
  return stochastic_order_gap(m, stationary_pair(m, tol), ts, tol);
}

bool MetricsReport::all_hold() const {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const PropertyVerdict& v) { return v.holds; });
}

MetricsReport property_verdicts(const MapModel& m,
                                const std::vector<double>& ts,
                                double tolerance, const Tolerances& tol) {
  check_grid(ts);
  const StationaryPair sp = stationary_pair(m, tol);
  const DeviationMatrix dev = deviation_matrix(m, sp, tol);
  const Eigen::Index p = m.order();

  MetricsReport rep;
  rep.lambda_star = sp.lambda_star;
  rep.scv = scv_checked(m, sp, tol, &rep.m1, &rep.m2);
  if (std::abs(rep.m1 * sp.lambda_star - 1.0) > 1e-9)
    throw numeric_error(
        "metrics: mean interval and mean rate are inconsistent (m1 * "
        "lambda* = " +
        std::to_string(rep.m1 * sp.lambda_star) + ")");
  rep.d2 = dispersion_index(m, sp, dev, tol);

  // (I): pi D D# D 1 >= 0.
  const RowVector u = sp.pi.row() * m.D();
  const Vector w = m.D() * Vector::Ones(p);
  const double margin_i = u * dev.dsharp * w;

  // (III): (pi C 1)(pi C^{-1} 1) - 1 >= 0, equal to (scv - 1)/2.
  const double margin_iii = (rep.scv - 1.0) / 2.0;

  // (II) and (IV) share the same e^{Ct} sweep.
  const RowVector alpha_c = sp.alpha.row() * m.C();
  const RowVector diff = sp.pi.row() - sp.alpha.row();
  double worst_ii = -std::numeric_limits<double>::infinity();
  double worst_ii_t = ts.front();
  double worst_iv = std::numeric_limits<double>::infinity();
  double worst_iv_t = ts.front();
  for (double t : ts) {
    const Matrix Et = expm(m.C(), t, tol);
    const RowVector srow = sp.alpha.row() * Et;
    const RowVector arow = alpha_c * Et;
    // Hazard of the event-stationary interval is non-increasing iff this
    // quadratic form stays nonpositive.
    const double aw = arow * w;
    const double asum = arow.sum();
    const double ii = aw * srow.sum() + asum * asum;
    if (ii > worst_ii) {
      worst_ii = ii;
      worst_ii_t = t;
    }
    const double gap = (diff * Et).sum();
    if (gap < worst_iv) {
      worst_iv = gap;
      worst_iv_t = t;
    }
  }

  rep.verdicts = {
      PropertyVerdict{"I", margin_i >= -tolerance, margin_i, std::nullopt},
      PropertyVerdict{"II", -worst_ii >= -tolerance, -worst_ii, worst_ii_t},
      PropertyVerdict{"III", margin_iii >= -tolerance, margin_iii,
                      std::nullopt},
      PropertyVerdict{"IV", worst_iv >= -tolerance, worst_iv, worst_iv_t},
  };
  return rep;
}

std::string report_to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["lambda_star"] = r.lambda_star;
  j["m1"] = r.m1;
  j["m2"] = r.m2;
  j["scv"] = r.scv;
  j["d2"] = r.d2;
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : r.verdicts) {
    nlohmann::json jv;
    jv["property"] = v.property;
    jv["holds"] = v.holds;
    jv["margin"] = v.margin;
    if (v.worst_t)
      jv["worst_t"] = *v.worst_t;
    else
      jv["worst_t"] = nullptr;
    verdicts.push_back(std::move(jv));
  }
  j["verdicts"] = std::move(verdicts);
  j["all_hold"] = r.all_hold();
  return j.dump(2);
}

}  // namespace mapkit
