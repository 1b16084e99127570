#pragma once

// Seeded Monte Carlo simulation of a model and estimators for the two
// second-order descriptors, each with a defensible standard error:
//
//  * the interval scv from an event-stationary run, with a block-deletion
//    jackknife (inter-event times are serially correlated, so a naive
//    iid formula would understate the error);
//
//  * the limiting index of dispersion from window counts of a
//    time-stationary run. The window length balances two demands: windows
//    long enough that e^{Q T} has essentially mixed (count correlation is
//    negligible) AND long enough that the O(1/T) transient bias of
//    Var/Mean is small next to the sampling error of the planned budget.
//    The second demand is the binding one for slowly mixing models.
//
// All randomness flows from a single u64 seed through SplitRng; identical
// (seed, config) pairs reproduce identical streams and estimates, and
// replication streams are derived, never shared.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mapkit/model.hpp"
#include "mapkit/rng.hpp"

namespace mapkit {

struct SimStart {
  enum class Kind { TimeStationary, EventStationary, FixedPhase };
  Kind kind = Kind::EventStationary;
  Eigen::Index phase = -1;  // used by FixedPhase only

  static SimStart time_stationary() {
    return SimStart{Kind::TimeStationary, -1};
  }
  static SimStart event_stationary() {
    return SimStart{Kind::EventStationary, -1};
  }
  static SimStart fixed_phase(Eigen::Index i) {
    return SimStart{Kind::FixedPhase, i};
  }
};

struct SimConfig {
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> n_events;  // exactly one of these two
  std::optional<double> horizon;
  SimStart start = SimStart::event_stationary();
  int n_batches = 100;  // jackknife blocks for the scv estimator
};

// One step of the phase process: dwell time, phase entered, and whether
// the transition emitted an event.
class MapSimulator {
 public:
  MapSimulator(const MapModel& m, SimStart start, SplitRng rng,
               const Tolerances& tol = default_tolerances());

  struct Step {
    double dt;
    Eigen::Index phase;
    bool event;
  };

  Step step();
  Eigen::Index phase() const { return phase_; }

 private:
  struct Arc {
    double cum_prob;
    Eigen::Index target;
    bool event;
  };
  std::vector<double> exit_rate_;
  std::vector<std::vector<Arc>> arcs_;
  Eigen::Index phase_;
  SplitRng rng_;
};

struct EventStream {
  Eigen::Index initial_phase;
  std::vector<double> inter_event_times;
  std::vector<Eigen::Index> phase_after_event;
};

EventStream simulate_events(const MapModel& m, const SimConfig& cfg,
                            const Tolerances& tol = default_tolerances());

struct SimEstimate {
  double estimate;
  double std_error;  // jackknife
  std::uint64_t n_samples;
};

// Interval scv from an event-stationary stream. Requires an
// event-stationary start and at least 1000 inter-event times.
SimEstimate estimate_scv(const MapModel& m, const SimConfig& cfg,
                         const Tolerances& tol = default_tolerances());

// Limiting index of dispersion from window counts of a time-stationary
// stream. Requires a time-stationary start and a budget yielding at
// least 1000 windows. The struct reports the window length chosen.
struct DispersionEstimate {
  SimEstimate value;
  double window_length;
  std::uint64_t n_windows;
};

DispersionEstimate estimate_dispersion(
    const MapModel& m, const SimConfig& cfg,
    const Tolerances& tol = default_tolerances());

// n independent replications of the time to the first event.
std::vector<double> sample_first_event_times(
    const MapModel& m, SimStart start, std::uint64_t n, std::uint64_t seed,
    const Tolerances& tol = default_tolerances());

// Kolmogorov-Smirnov distance between an empirical sample and the
// analytic first-event distribution, plus the asymptotic 1% critical
// value for a sample of size n.
double ks_distance(std::vector<double> samples, const PhaseTypeDist& ph,
                   const Tolerances& tol = default_tolerances());
double ks_critical_1pct(std::uint64_t n);

// CSV export: "event_index,time,phase_after_event", cumulative times.
void write_event_csv(std::ostream& out, const EventStream& stream);

}  // namespace mapkit
