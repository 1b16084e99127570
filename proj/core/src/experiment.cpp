#include "mapkit/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "mapkit/model_io.hpp"

namespace mapkit {

namespace {

using nlohmann::json;

// Draws that hit an exact zero would produce a degenerate rate; redraw
// the whole instance and count it so sweeps can report the frequency.
template <typename Build>
MapModel redraw_loop(SplitRng& rng, std::uint64_t* redraws, Build build) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    if (std::optional<MapModel> m = build(rng)) return std::move(*m);
    if (redraws) ++*redraws;
  }
  throw numeric_error("random model: 64 consecutive degenerate draws; the "
                      "random stream looks broken");
}

MapModel build_mmpp(int order, SplitRng& rng, std::uint64_t* redraws,
                    bool cyclic) {
  if (order < 2)
    throw validation_error("random model: order must be at least 2, got " +
                           std::to_string(order));
  const Eigen::Index p = order;
  return redraw_loop(rng, redraws,
                     [&](SplitRng& r) -> std::optional<MapModel> {
    bool degenerate = false;
    Matrix S = Matrix::Zero(p, p);  // switching generator
    if (cyclic) {
      for (Eigen::Index i = 0; i < p; ++i) {
        const double v = r.next_uniform();
        if (v == 0.0) degenerate = true;
        S(i, (i + 1) % p) = v;
        S(i, i) = -v;
      }
    } else {
      for (Eigen::Index i = 0; i < p; ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
          if (j == i) continue;
          const double v = r.next_uniform();
          if (v == 0.0) degenerate = true;
          S(i, j) = v;
          row += v;
        }
        S(i, i) = -row;
      }
    }
    Matrix D = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      const double l = r.next_exponential(1.0);
      if (l == 0.0) degenerate = true;
      D(i, i) = l;
    }
    if (degenerate) return std::nullopt;
    return validate_model(Matrix(S - D), D);
  });
}

}  // namespace

const char* to_string(GeneratorKind k) {
  return k == GeneratorKind::DenseUniform ? "dense" : "cyclic";
}

MapModel random_mmpp(int order, SplitRng& rng, std::uint64_t* redraws) {
  return build_mmpp(order, rng, redraws, false);
}

MapModel random_cyclic_mmpp(int order, SplitRng& rng,
                            std::uint64_t* redraws) {
  return build_mmpp(order, rng, redraws, true);
}

MapModel random_mspp(int order, SplitRng& rng, std::uint64_t* redraws) {
  if (order < 2)
    throw validation_error("random model: order must be at least 2, got " +
                           std::to_string(order));
  const Eigen::Index p = order;
  return redraw_loop(rng, redraws,
                     [&](SplitRng& r) -> std::optional<MapModel> {
    bool degenerate = false;
    Vector total(p);
    for (Eigen::Index i = 0; i < p; ++i)
      total(i) = r.next_uniform(0.1, 5.0);
    Matrix W(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < p; ++j) {
        const double v = r.next_uniform();
        if (v == 0.0) degenerate = true;
        W(i, j) = v;
      }
    if (degenerate) return std::nullopt;
    Matrix D(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
      D.row(i) = total(i) * W.row(i) / W.row(i).sum();
    Matrix C = Matrix::Zero(p, p);
    C.diagonal() = -total;
    return validate_model(C, D);
  });
}

void SweepConfig::validate() const {
  if (orders.empty())
    throw config_error("sweep: at least one order is required");
  for (int o : orders)
    if (o < 2)
      throw config_error("sweep: orders must be at least 2, got " +
                         std::to_string(o));
  if (n_instances < 1)
    throw config_error("sweep: n_instances must be at least 1");
  if (!std::isfinite(tolerance))
    throw config_error("sweep: tolerance must be finite");
  if (n_threads < 0)
    throw config_error("sweep: n_threads must be nonnegative");
  grid.validate();
}

namespace {

void default_evaluator(const MapModel& m, const SweepConfig& cfg,
                       const Tolerances& tol, InstanceOutcome& out) {
  const StationaryPair sp = stationary_pair(m, tol);
  const Eigen::Index p = m.order();
  const Vector one = Vector::Ones(p);

  out.c2 = scv(m, sp, tol);
  out.margin_iii = (out.c2 - 1.0) / 2.0;

  const DeviationMatrix dev = deviation_matrix(m, sp, tol);
  const RowVector u = sp.pi.row() * m.D();
  const Vector w = m.D() * one;
  out.margin_i = u * dev.dsharp * w;

  // Mean-interval identity: the time-stationary mean interval equals
  // half the mean rate times the second event-stationary moment, and its
  // excess over the event-stationary mean has the sign of scv - 1.
  LinearSolver neg_c(Matrix(-m.C()), tol);
  const Vector x1 = neg_c.solve(one);
  const Vector x2 = neg_c.solve(x1);
  const double lhs = sp.pi.row() * x1;
  const double m1 = sp.alpha.row() * x1;
  const double ax2 = sp.alpha.row() * x2;
  const double rhs = sp.lambda_star * ax2;
  out.lemma_residual = std::abs(lhs - rhs) / m1;
  if (out.c2 - 1.0 > 1e-6)
    out.lemma_sign_ok = lhs - m1 > 0.0;
  else if (out.c2 - 1.0 < -1e-6)
    out.lemma_sign_ok = lhs - m1 < 0.0;
  else
    out.lemma_sign_ok = true;

  // (IV) on the uniform grid via one step matrix and row propagation.
  const std::vector<double> ts = cfg.grid.points();
  const Matrix step = expm(m.C(), cfg.grid.step, tol);
  RowVector v = sp.pi.row() - sp.alpha.row();
  if (cfg.grid.start > 0.0) v = v * expm(m.C(), cfg.grid.start, tol);
  out.min_gap = std::numeric_limits<double>::infinity();
  out.argmin_t = ts.front();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double gap = v.sum();
    if (gap < out.min_gap) {
      out.min_gap = gap;
      out.argmin_t = ts[k];
    }
    if (k + 1 < ts.size()) v = v * step;
  }
}

}  // namespace

namespace detail {

SweepOutcome run_sweep_with(const SweepConfig& cfg, const Tolerances& tol,
                            const InstanceEvaluator& eval) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const std::size_t per_order = std::size_t(cfg.n_instances);
  const std::size_t total = cfg.orders.size() * per_order;

  SweepOutcome out;
  out.config = cfg;
  out.instances.resize(total);
  std::vector<std::uint64_t> redraws(total, 0);

  auto run_one = [&](std::size_t g) {
    const int order = cfg.orders[g / per_order];
    const int index = int(g % per_order);
    InstanceOutcome& rec = out.instances[g];
    rec.order = order;
    rec.index = index;
    SplitRng rng(SplitRng::derive(cfg.seed, std::uint64_t(order),
                                  std::uint64_t(index)));
    try {
      const MapModel m =
          (cfg.generator == GeneratorKind::DenseUniform)
              ? random_mmpp(order, rng, &redraws[g])
              : random_cyclic_mmpp(order, rng, &redraws[g]);
      eval(m, cfg, tol, rec);
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  };

  unsigned n_threads = cfg.n_threads > 0
                           ? unsigned(cfg.n_threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, unsigned(std::max<std::size_t>(
                                                total, 1)));
  if (n_threads <= 1) {
    for (std::size_t g = 0; g < total; ++g) run_one(g);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
      pool.emplace_back([&, w] {
        const std::size_t lo = total * w / n_threads;
        const std::size_t hi = total * (w + 1) / n_threads;
        for (std::size_t g = lo; g < hi; ++g) run_one(g);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Deterministic single-pass aggregation in instance order.
  out.min_margin_i = std::numeric_limits<double>::infinity();
  out.min_margin_iii = std::numeric_limits<double>::infinity();
  out.min_gap = std::numeric_limits<double>::infinity();
  auto tally = [&](double margin, MarginCount& c) {
    if (margin < -cfg.tolerance)
      ++c.hard;
    else if (margin < 0.0)
      ++c.noise;
  };
  for (std::size_t g = 0; g < total; ++g) {
    const InstanceOutcome& rec = out.instances[g];
    out.redraws += redraws[g];
    if (rec.failed) {
      ++out.n_failed;
      continue;
    }
    tally(rec.margin_i, out.count_i);
    tally(rec.margin_iii, out.count_iii);
    tally(rec.min_gap, out.count_iv);
    if (rec.margin_i < out.min_margin_i) {
      out.min_margin_i = rec.margin_i;
      out.min_margin_i_order = rec.order;
      out.min_margin_i_index = rec.index;
    }
    if (rec.margin_iii < out.min_margin_iii) {
      out.min_margin_iii = rec.margin_iii;
      out.min_margin_iii_order = rec.order;
      out.min_margin_iii_index = rec.index;
    }
    if (rec.min_gap < out.min_gap) {
      out.min_gap = rec.min_gap;
      out.min_gap_t = rec.argmin_t;
      out.min_gap_order = rec.order;
      out.min_gap_index = rec.index;
    }
    out.max_lemma_residual = std::max(out.max_lemma_residual,
                                      rec.lemma_residual);
  }

  out.runtime_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return out;
}

}  // namespace detail

SweepOutcome run_sweep(const SweepConfig& cfg, const Tolerances& tol) {
  return detail::run_sweep_with(cfg, tol, &default_evaluator);
}

namespace {

json grid_to_json(const TimeGrid& g) {
  json j;
  j["start"] = g.start;
  j["stop"] = g.stop;
  j["step"] = g.step;
  return j;
}

json instance_to_json(const InstanceOutcome& r) {
  json j;
  j["order"] = r.order;
  j["index"] = r.index;
  j["failed"] = r.failed;
  if (r.failed) {
    j["error"] = r.error;
    return j;
  }
  j["c2"] = r.c2;
  j["margin_i"] = r.margin_i;
  j["margin_iii"] = r.margin_iii;
  j["min_gap"] = r.min_gap;
  j["argmin_t"] = r.argmin_t;
  j["lemma_residual"] = r.lemma_residual;
  j["lemma_sign_ok"] = r.lemma_sign_ok;
  return j;
}

}  // namespace

std::string sweep_to_json(const SweepOutcome& out, bool include_instances) {
  json j;
  json cfg;
  cfg["orders"] = out.config.orders;
  cfg["n_instances"] = out.config.n_instances;
  cfg["generator"] = to_string(out.config.generator);
  cfg["grid"] = grid_to_json(out.config.grid);
  cfg["tolerance"] = out.config.tolerance;
  cfg["seed"] = out.config.seed;
  // n_threads and runtime are intentionally absent: the canonical record
  // must be identical for any worker count.
  j["config"] = std::move(cfg);

  json agg;
  auto count_json = [](const MarginCount& c) {
    json cj;
    cj["hard"] = c.hard;
    cj["noise"] = c.noise;
    return cj;
  };
  agg["counts"]["I"] = count_json(out.count_i);
  agg["counts"]["III"] = count_json(out.count_iii);
  agg["counts"]["IV"] = count_json(out.count_iv);
  agg["n_failed"] = out.n_failed;
  agg["redraws"] = out.redraws;
  agg["any_hard_violation"] = out.any_hard_violation();
  agg["max_lemma_residual"] = out.max_lemma_residual;
  agg["min_margin_i"] = {{"value", out.min_margin_i},
                         {"order", out.min_margin_i_order},
                         {"index", out.min_margin_i_index}};
  agg["min_margin_iii"] = {{"value", out.min_margin_iii},
                           {"order", out.min_margin_iii_order},
                           {"index", out.min_margin_iii_index}};
  agg["min_gap"] = {{"value", out.min_gap},
                    {"t", out.min_gap_t},
                    {"order", out.min_gap_order},
                    {"index", out.min_gap_index}};
  j["aggregates"] = std::move(agg);

  json failures = json::array();
  for (const auto& r : out.instances)
    if (r.failed)
      failures.push_back(json{{"order", r.order},
                              {"index", r.index},
                              {"error", r.error}});
  j["failures"] = std::move(failures);

  if (include_instances) {
    json inst = json::array();
    for (const auto& r : out.instances) inst.push_back(instance_to_json(r));
    j["instances"] = std::move(inst);
  }
  return j.dump(2);
}

void write_sweep_csv(std::ostream& out, const SweepOutcome& sweep) {
  out << "order,index,c2,margin_i,margin_iii,min_gap,argmin_t,"
         "lemma_residual,lemma_sign_ok,verdict\n";
  const double tol = sweep.config.tolerance;
  for (const auto& r : sweep.instances) {
    if (r.failed) {
      out << r.order << ',' << r.index << ",,,,,,,,failed\n";
      continue;
    }
    const double worst = std::min({r.margin_i, r.margin_iii, r.min_gap});
    const char* verdict =
        worst < -tol ? "hard" : (worst < 0.0 ? "noise" : "ok");
    out << r.order << ',' << r.index << ',';
    char buf[400];
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%s\n", r.c2,
                  r.margin_i, r.margin_iii, r.min_gap, r.argmin_t,
                  r.lemma_residual, int(r.lemma_sign_ok), verdict);
    out << buf;
  }
}

MapModel counterexample_model(const Tolerances& tol) {
  const Eigen::Index p = 4;
  Matrix S = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    S(i, (i + 1) % p) = 1.0;
    S(i, i) = -1.0;
  }
  Matrix D = Matrix::Zero(p, p);
  D.diagonal() << 0.01, 0.01, 1.0, 1.0;
  return validate_model(Matrix(S - D), D, tol);
}

CounterexampleResult reproduce_counterexample(const Tolerances& tol) {
  MapModel m = counterexample_model(tol);
  const StationaryPair sp = stationary_pair(m, tol);

  const TimeGrid fine{0.0, 10.0, 0.01};
  HazardCurve hc = hazard_curve(m, sp.alpha, fine.points(), tol);

  // Non-monotonicity scan: a strict fall from the running maximum, then a
  // strict rise from the running minimum, both beyond numeric noise.
  const double thresh = 1e-9;
  bool fell = false, rose = false;
  double fall_t = 0.0, rise_t = 0.0;
  double running_max = -std::numeric_limits<double>::infinity();
  double running_min = std::numeric_limits<double>::infinity();
  for (const auto& s : hc.samples) {
    if (!fell) {
      if (s.value < running_max - thresh) {
        fell = true;
        fall_t = s.t;
        running_min = s.value;
      } else {
        running_max = std::max(running_max, s.value);
      }
    } else {
      if (s.value > running_min + thresh) {
        rose = true;
        rise_t = s.t;
        break;
      }
      running_min = std::min(running_min, s.value);
    }
  }

  MetricsReport rep = property_verdicts(m, TimeGrid{}.points(), 1e-12, tol);
  return CounterexampleResult{std::move(m), std::move(hc), fell && rose,
                              fall_t, rise_t, std::move(rep)};
}

std::string counterexample_to_json(const CounterexampleResult& r) {
  json j;
  j["model"] = json::parse(model_to_json(r.model));
  j["non_monotone"] = r.non_monotone;
  j["fall_t"] = r.fall_t;
  j["rise_t"] = r.rise_t;
  j["report"] = json::parse(report_to_json(r.report));
  j["hazard_samples"] = r.hazard.samples.size();
  j["hazard_truncated"] = r.hazard.truncated_at.has_value();
  return j.dump(2);
}

}  // namespace mapkit
