#include "mapkit/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "mapkit/metrics.hpp"

namespace mapkit {

namespace {

void require_budget(const SimConfig& cfg) {
  if (cfg.n_events.has_value() == cfg.horizon.has_value())
    throw config_error(
        "simulation: exactly one of n_events and horizon must be set");
  if (cfg.n_events && *cfg.n_events == 0)
    throw config_error("simulation: n_events must be positive");
  if (cfg.horizon && !(*cfg.horizon > 0.0 && std::isfinite(*cfg.horizon)))
    throw config_error("simulation: horizon must be positive and finite");
}

Eigen::Index sample_categorical(const ProbVector& p, double u) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p(i);
    if (u < acc) return i;
  }
  return p.size() - 1;
}

// Sample variance machinery on centred block sums: numerically stable and
// O(1) per jackknife deletion.
struct CentredSums {
  double mean = 0.0;   // grand mean of the data
  double a2 = 0.0;     // sum of squared deviations from `mean`
  std::uint64_t n = 0;
};

double jackknife_se(const std::vector<double>& replicates) {
  const std::size_t b = replicates.size();
  double bar = 0.0;
  for (double v : replicates) bar += v;
  bar /= double(b);
  double ss = 0.0;
  for (double v : replicates) ss += (v - bar) * (v - bar);
  return std::sqrt(double(b - 1) / double(b) * ss);
}

void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

MapSimulator::MapSimulator(const MapModel& m, SimStart start, SplitRng rng,
                           const Tolerances& tol)
    : rng_(rng) {
  const Eigen::Index p = m.order();
  exit_rate_.resize(std::size_t(p));
  arcs_.resize(std::size_t(p));
  for (Eigen::Index i = 0; i < p; ++i) {
    const double exit = -m.C()(i, i);
    exit_rate_[std::size_t(i)] = exit;
    auto& arcs = arcs_[std::size_t(i)];
    double acc = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (j != i && m.C()(i, j) > 0.0) {
        acc += m.C()(i, j) / exit;
        arcs.push_back(Arc{acc, j, false});
      }
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      if (m.D()(i, j) > 0.0) {
        acc += m.D()(i, j) / exit;
        arcs.push_back(Arc{acc, j, true});
      }
    }
    if (arcs.empty())
      throw numeric_error("simulator: phase " + std::to_string(i) +
                          " has no outgoing rates");
    arcs.back().cum_prob = 1.0;  // absorb row-sum round-off
  }

  switch (start.kind) {
    case SimStart::Kind::FixedPhase:
      if (start.phase < 0 || start.phase >= p)
        throw config_error("simulator: start phase " +
                           std::to_string(start.phase) +
                           " out of range for order " + std::to_string(p));
      phase_ = start.phase;
      break;
    case SimStart::Kind::TimeStationary: {
      const StationaryPair sp = stationary_pair(m, tol);
      phase_ = sample_categorical(sp.pi, rng_.next_uniform());
      break;
    }
    case SimStart::Kind::EventStationary: {
      const StationaryPair sp = stationary_pair(m, tol);
      phase_ = sample_categorical(sp.alpha, rng_.next_uniform());
      break;
    }
  }
}

MapSimulator::Step MapSimulator::step() {
  const auto i = std::size_t(phase_);
  const double dt = rng_.next_exponential(exit_rate_[i]);
  const double u = rng_.next_uniform();
  const auto& arcs = arcs_[i];
  std::size_t k = 0;
  while (k + 1 < arcs.size() && !(u < arcs[k].cum_prob)) ++k;
  phase_ = arcs[k].target;
  return Step{dt, phase_, arcs[k].event};
}

EventStream simulate_events(const MapModel& m, const SimConfig& cfg,
                            const Tolerances& tol) {
  require_budget(cfg);
  MapSimulator sim(m, cfg.start, SplitRng(cfg.seed), tol);

  EventStream out;
  out.initial_phase = sim.phase();
  if (cfg.n_events) {
    out.inter_event_times.reserve(*cfg.n_events);
    out.phase_after_event.reserve(*cfg.n_events);
  }

  double pending = 0.0;
  double t = 0.0;
  while (true) {
    if (cfg.n_events && out.inter_event_times.size() >= *cfg.n_events) break;
    const auto s = sim.step();
    t += s.dt;
    if (cfg.horizon && t > *cfg.horizon) break;
    pending += s.dt;
    if (s.event) {
      out.inter_event_times.push_back(pending);
      out.phase_after_event.push_back(s.phase);
      pending = 0.0;
    }
  }
  return out;
}

SimEstimate estimate_scv(const MapModel& m, const SimConfig& cfg,
                         const Tolerances& tol) {
  if (cfg.start.kind != SimStart::Kind::EventStationary)
    throw config_error(
        "scv estimator: requires an event-stationary start (the statistic "
        "is a property of the event-stationary interval)");
  if (cfg.n_batches < 2)
    throw config_error("scv estimator: need at least 2 jackknife blocks");
  const EventStream stream = simulate_events(m, cfg, tol);
  const std::vector<double>& x = stream.inter_event_times;
  const std::uint64_t n = x.size();
  if (n < 1000)
    throw config_error(
        "scv estimator: only " + std::to_string(n) +
        " inter-event times; at least 1000 are required for a meaningful "
        "standard error");

  const std::uint64_t b =
      std::min<std::uint64_t>(std::uint64_t(cfg.n_batches), n / 10);

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= double(n);

  // Per-block sums of centred values and their squares.
  std::vector<double> s1(b, 0.0), s2(b, 0.0);
  std::vector<std::uint64_t> cnt(b, 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t k = i * b / n;
    const double d = x[i] - mean;
    s1[k] += d;
    s2[k] += d * d;
    ++cnt[k];
  }
  double a1 = 0.0, a2 = 0.0;
  for (std::uint64_t k = 0; k < b; ++k) {
    a1 += s1[k];
    a2 += s2[k];
  }

  const double var = (a2 - a1 * a1 / double(n)) / double(n - 1);
  const double c2 = var / (mean * mean);

  std::vector<double> reps(b);
  for (std::uint64_t k = 0; k < b; ++k) {
    const double n1 = double(n - cnt[k]);
    const double d1 = a1 - s1[k];
    const double d2 = a2 - s2[k];
    const double mean_k = mean + d1 / n1;
    const double var_k = (d2 - d1 * d1 / n1) / (n1 - 1.0);
    reps[k] = var_k / (mean_k * mean_k);
  }
  return SimEstimate{c2, jackknife_se(reps), n};
}

DispersionEstimate estimate_dispersion(const MapModel& m,
                                       const SimConfig& cfg,
                                       const Tolerances& tol) {
  if (cfg.start.kind != SimStart::Kind::TimeStationary)
    throw config_error(
        "dispersion estimator: requires a time-stationary start (window "
        "counts of the stationary counting process)");
  require_budget(cfg);

  const StationaryPair sp = stationary_pair(m, tol);
  const DeviationMatrix dev = deviation_matrix(m, sp, tol);
  const double lambda = sp.lambda_star;
  const double budget_events =
      cfg.n_events ? double(*cfg.n_events) : lambda * *cfg.horizon;

  // Mixing requirement: smallest power-of-two t with e^{Qt} ~ 1 pi.
  const Eigen::Index p = m.order();
  const Matrix one_pi = Vector::Ones(p) * sp.pi.row();
  double t_mix = 1.0;
  while ((expm(m.Q(), t_mix, tol) - one_pi).cwiseAbs().maxCoeff() >
         tol.mixing) {
    t_mix *= 2.0;
    if (t_mix > 1e12)
      throw numeric_error(
          "dispersion estimator: the generator does not mix within any "
          "reasonable window");
  }

  // Bias requirement. The finite-window ratio underestimates the limit by
  // about K/T with K = (2/lambda) pi D D# D# D 1; pick T so that this is
  // at most half the forecast sampling error of the full budget.
  const RowVector u = sp.pi.row() * m.D();
  const Vector w = m.D() * Vector::Ones(p);
  const double mass = u * dev.dsharp * (dev.dsharp * w);
  const double k_bias = std::abs(2.0 / lambda * mass);
  const double d2_a = dispersion_index(m, sp, dev, tol);
  double t_bias = 0.0;
  if (k_bias > 0.0)
    t_bias = std::pow(
        2.0 * k_bias * std::sqrt(budget_events / (2.0 * lambda)) / d2_a,
        2.0 / 3.0);

  const double t_window = std::max(t_mix, t_bias);
  const auto n_windows =
      std::uint64_t(budget_events / (lambda * t_window));
  if (n_windows < 1000)
    throw config_error(
        "dispersion estimator: budget yields only " +
        std::to_string(n_windows) + " windows of length " +
        std::to_string(t_window) + "; increase the budget to at least " +
        std::to_string(std::uint64_t(std::ceil(1000.0 * lambda * t_window))) +
        " events");

  const double horizon = double(n_windows) * t_window;
  MapSimulator sim(m, cfg.start, SplitRng(cfg.seed), tol);
  std::vector<std::uint64_t> counts(n_windows, 0);
  double t = 0.0;
  while (true) {
    const auto s = sim.step();
    t += s.dt;
    if (t > horizon) break;
    if (s.event) {
      auto idx = std::uint64_t(t / t_window);
      if (idx >= n_windows) idx = n_windows - 1;
      ++counts[idx];
    }
  }

  double mean = 0.0;
  for (auto c : counts) mean += double(c);
  mean /= double(n_windows);
  double a2 = 0.0;
  for (auto c : counts) {
    const double d = double(c) - mean;
    a2 += d * d;
  }
  const double var = a2 / double(n_windows - 1);
  const double d2_hat = var / mean;

  std::vector<double> reps(n_windows);
  const double n1 = double(n_windows - 1);
  for (std::uint64_t k = 0; k < n_windows; ++k) {
    const double d = double(counts[k]) - mean;
    const double mean_k = mean - d / n1;
    const double var_k = (a2 - d * d - d * d / n1) / (n1 - 1.0);
    reps[k] = var_k / mean_k;
  }
  return DispersionEstimate{SimEstimate{d2_hat, jackknife_se(reps), n_windows},
                            t_window, n_windows};
}

std::vector<double> sample_first_event_times(const MapModel& m,
                                             SimStart start, std::uint64_t n,
                                             std::uint64_t seed,
                                             const Tolerances& tol) {
  if (n == 0)
    throw config_error("first-event sampler: n must be positive");
  std::vector<double> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    MapSimulator sim(m, start, SplitRng(SplitRng::derive(seed, i)), tol);
    double t = 0.0;
    while (true) {
      const auto s = sim.step();
      t += s.dt;
      if (s.event) break;
    }
    out.push_back(t);
  }
  return out;
}

double ks_distance(std::vector<double> samples, const PhaseTypeDist& ph,
                   const Tolerances& tol) {
  if (samples.empty())
    throw config_error("ks distance: sample set is empty");
  std::sort(samples.begin(), samples.end());
  const double n = double(samples.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = ph.cdf(samples[i], tol);
    dist = std::max(dist, std::max(f - double(i) / n,
                                   double(i + 1) / n - f));
  }
  return dist;
}

double ks_critical_1pct(std::uint64_t n) {
  // Asymptotic Kolmogorov critical value at the 1% level.
  return 1.62762 / std::sqrt(double(n));
}

void write_event_csv(std::ostream& out, const EventStream& stream) {
  std::string buf;
  buf.reserve(64);
  out << "event_index,time,phase_after_event\n";
  double t = 0.0;
  for (std::size_t i = 0; i < stream.inter_event_times.size(); ++i) {
    t += stream.inter_event_times[i];
    buf.clear();
    buf += std::to_string(i);
    buf += ',';
    append_number(buf, t);
    buf += ',';
    buf += std::to_string(stream.phase_after_event[i]);
    buf += '\n';
    out << buf;
  }
}

}  // namespace mapkit
