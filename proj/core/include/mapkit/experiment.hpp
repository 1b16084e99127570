#pragma once

// Randomized verification sweeps and the fixed counter-example.
//
// A sweep draws many random instances per order, evaluates the ordering
// margins -- (I) autocovariance mass, (III) scv margin, (IV) worst gap on
// a time grid -- plus the mean-interval identity residual, and aggregates
// worst cases. Margins below -tolerance are hard violations (one would
// disprove the ordering conjectures); margins in [-tolerance, 0) are
// counted separately as numerical noise. A per-instance failure (a model
// that trips a kernel check) lands in a failure ledger with its (seed,
// order, index) fingerprint; it never aborts the sweep.
//
// Sweeps are deterministic functions of (config, seed): every instance
// has its own generator derived from (seed, order, index), results are
// written by index, and the worker count cannot change any output bit.
//
// The counter-example is a fixed four-phase modulated-Poisson model with
// two slow and two fast phases whose event-stationary interval has a
// provably non-monotone hazard rate: hazard-rate monotonicity (property
// II) fails for modulated Poisson models even though (I), (III) and (IV)
// hold. reproduce_counterexample() re-derives this from scratch.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mapkit/grid.hpp"
#include "mapkit/metrics.hpp"
#include "mapkit/model.hpp"
#include "mapkit/rng.hpp"

namespace mapkit {

enum class GeneratorKind {
  DenseUniform,   // all-to-all switching, uniform(0,1) rates, Exp(1) events
  CyclicUniform,  // one-directional cycle switching, same rate laws
};

const char* to_string(GeneratorKind k);

// Random modulated-Poisson model: switching generator with uniform(0,1)
// off-diagonal rates (dense or cyclic support), event rates Exp(1).
// Degenerate draws (an exact zero) are redrawn and counted.
MapModel random_mmpp(int order, SplitRng& rng,
                     std::uint64_t* redraws = nullptr);
MapModel random_cyclic_mmpp(int order, SplitRng& rng,
                            std::uint64_t* redraws = nullptr);

// Random diagonal-C model: total rates uniform(0.1, 5), event-routing
// rows proportional to uniform(0,1) weights (all positive, so Q is
// irreducible by construction).
MapModel random_mspp(int order, SplitRng& rng,
                     std::uint64_t* redraws = nullptr);

struct SweepConfig {
  std::vector<int> orders = {3, 4, 5, 6};
  int n_instances = 10000;  // per order
  GeneratorKind generator = GeneratorKind::DenseUniform;
  TimeGrid grid;  // for the (IV) gap scan

  // Hard-violation threshold: an instance is flagged when a margin falls
  // below -tolerance. Negative values move the boundary into positive
  // margins (e.g. -1 flags every instance whose margin is below +1), which
  // exercises the flagging machinery end to end.
  double tolerance = 1e-9;

  std::uint64_t seed = 1;
  int n_threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct InstanceOutcome {
  int order = 0;
  int index = 0;
  bool failed = false;
  std::string error;

  double c2 = 0.0;
  double margin_i = 0.0;    // (I)  pi D D# D 1
  double margin_iii = 0.0;  // (III) product margin = (scv - 1)/2
  double min_gap = 0.0;     // (IV) worst gap on the grid
  double argmin_t = 0.0;
  double lemma_residual = 0.0;  // mean-interval identity, relative to m1
  bool lemma_sign_ok = true;
};

struct MarginCount {
  std::uint64_t hard = 0;   // margin < -tolerance
  std::uint64_t noise = 0;  // -tolerance <= margin < 0
};

struct SweepOutcome {
  SweepConfig config;
  std::vector<InstanceOutcome> instances;

  MarginCount count_i, count_iii, count_iv;
  std::uint64_t n_failed = 0;
  std::uint64_t redraws = 0;

  double min_margin_i = 0.0;
  double min_margin_iii = 0.0;
  double min_gap = 0.0;
  double min_gap_t = 0.0;
  int min_margin_i_order = 0, min_margin_i_index = 0;
  int min_margin_iii_order = 0, min_margin_iii_index = 0;
  int min_gap_order = 0, min_gap_index = 0;
  double max_lemma_residual = 0.0;

  // Wall-clock milliseconds; informational only and deliberately excluded
  // from the canonical serialization so reruns are byte-comparable.
  double runtime_ms = 0.0;

  bool any_hard_violation() const {
    return count_i.hard + count_iii.hard + count_iv.hard > 0;
  }
};

SweepOutcome run_sweep(const SweepConfig& cfg,
                       const Tolerances& tol = default_tolerances());

namespace detail {
// Evaluation seam: run_sweep with a custom per-instance evaluator, used
// to test the failure ledger. The evaluator fills the outcome fields for
// a generated model and may throw mapkit::error.
using InstanceEvaluator =
    std::function<void(const MapModel&, const SweepConfig&, const Tolerances&,
                       InstanceOutcome&)>;
SweepOutcome run_sweep_with(const SweepConfig& cfg, const Tolerances& tol,
                            const InstanceEvaluator& eval);
}  // namespace detail

// Canonical JSON for a sweep: config, aggregates and failure ledger, and
// (optionally) every per-instance record. Deterministic byte-for-byte for
// a fixed (config, seed) regardless of thread count or wall time.
std::string sweep_to_json(const SweepOutcome& out,
                          bool include_instances = true);

// Per-instance margins as CSV.
void write_sweep_csv(std::ostream& out, const SweepOutcome& sweep);

// The fixed counter-example model: four phases on a switching cycle with
// unit rates, event rates (0.01, 0.01, 1, 1).
MapModel counterexample_model(const Tolerances& tol = default_tolerances());

struct CounterexampleResult {
  MapModel model;
  HazardCurve hazard;      // event-stationary start, t in [0, 10] step 0.01
  bool non_monotone;       // hazard falls then rises again
  double fall_t;           // first grid point confirming a strict fall
  double rise_t;           // first grid point confirming a later rise
  MetricsReport report;    // verdicts on the default grid
};

CounterexampleResult reproduce_counterexample(
    const Tolerances& tol = default_tolerances());

std::string counterexample_to_json(const CounterexampleResult& r);

}  // namespace mapkit
