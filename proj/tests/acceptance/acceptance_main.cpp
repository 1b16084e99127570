// Acceptance suite: eight end-to-end checks of the library's central
// claims, each reported as a single [PASS]/[FAIL] line. Run all with no
// arguments or one with `--criterion N`. The process exits nonzero if any
// executed criterion fails.
//
// Every criterion is self-contained and deterministic: corpora are drawn
// from fixed seeds, so two runs of this binary see identical instances.

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <mapkit/closed_forms.hpp>
#include <mapkit/experiment.hpp>
#include <mapkit/grid.hpp>
#include <mapkit/linalg.hpp>
#include <mapkit/metrics.hpp>
#include <mapkit/model.hpp>
#include <mapkit/rng.hpp>
#include <mapkit/simulate.hpp>

using mapkit::MapModel;
using mapkit::Matrix;
using mapkit::Vector;

namespace {

// ---------------------------------------------------------------------
// Reporting helpers.

int g_checks_failed = 0;

void detail_fail(const std::string& what) {
  ++g_checks_failed;
  if (g_checks_failed <= 10)
    std::printf("       detail: %s\n", what.c_str());
  if (g_checks_failed == 11)
    std::printf("       detail: (further failures suppressed)\n");
}

bool expect(bool ok, const std::string& what) {
  if (!ok) detail_fail(what);
  return ok;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Fixed corpus seeds: changing any of these changes the corpora, so they
// are part of the acceptance definition.
constexpr std::uint64_t kSeedTwoPhase = 101;
constexpr std::uint64_t kSeedDense = 301;
constexpr std::uint64_t kSeedCyclic = 302;
constexpr std::uint64_t kSeedSwitched = 401;
constexpr std::uint64_t kSeedSim = 601;
constexpr std::uint64_t kSeedKernel = 701;

mapkit::Mmpp2Params draw_two_phase(mapkit::SplitRng& rng) {
  return mapkit::Mmpp2Params{
      rng.next_uniform(0.01, 5.0), rng.next_uniform(0.01, 5.0),
      rng.next_uniform(0.01, 4.0), rng.next_uniform(0.01, 4.0)};
}

mapkit::SweepConfig dense_protocol() {
  mapkit::SweepConfig cfg;
  cfg.orders = {3, 4, 5, 6};
  cfg.n_instances = 10000;
  cfg.generator = mapkit::GeneratorKind::DenseUniform;
  cfg.tolerance = 1e-9;
  cfg.seed = kSeedDense;
  cfg.n_threads = 0;
  return cfg;
}

mapkit::SweepConfig cyclic_protocol() {
  mapkit::SweepConfig cfg;
  cfg.orders = {4};
  cfg.n_instances = 10000;
  cfg.generator = mapkit::GeneratorKind::CyclicUniform;
  cfg.tolerance = 1e-9;
  cfg.seed = kSeedCyclic;
  cfg.n_threads = 0;
  return cfg;
}

// Mean-interval identity and its sign link to scv - 1.
struct LemmaCheck {
  double residual_rel;
  bool sign_ok;
};

LemmaCheck lemma_check(const MapModel& m) {
  const auto sp = mapkit::stationary_pair(m);
  mapkit::LinearSolver neg_c(Matrix(-m.C()));
  const Vector one = Vector::Ones(m.order());
  const Vector x1 = neg_c.solve(one);
  const Vector x2 = neg_c.solve(x1);
  const double lhs = sp.pi.row() * x1;    // time-stationary mean interval
  const double m1 = sp.alpha.row() * x1;  // event-stationary mean interval
  const double ax2 = sp.alpha.row() * x2;
  const double rhs = sp.lambda_star * ax2;
  LemmaCheck r{};
  r.residual_rel = std::abs(lhs - rhs) / m1;
  const double c2 = mapkit::scv(m, sp);
  if (c2 - 1.0 > 1e-6)
    r.sign_ok = lhs - m1 > 0.0;
  else if (c2 - 1.0 < -1e-6)
    r.sign_ok = lhs - m1 < 0.0;
  else
    r.sign_ok = true;
  return r;
}

// ---------------------------------------------------------------------
// Criteria.

bool criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  mapkit::SplitRng rng(kSeedTwoPhase);
  const int n = 10000;
  bool ok = true;
  for (int i = 0; i < n; ++i) {
    const auto p = draw_two_phase(rng);
    const auto cf = mapkit::mmpp2_metrics(p);
    const auto m = mapkit::mmpp2_model(p);
    const double c2 = mapkit::scv(m);
    const double d2 = mapkit::dispersion_index(m);
    const double e_c2 = std::abs(c2 - cf.c2) / std::abs(cf.c2);
    const double e_d2 = std::abs(d2 - cf.d2) / std::abs(cf.d2);
    ok &= expect(e_c2 <= 1e-8, "instance " + std::to_string(i) +
                                   ": scv relative gap " + fmt(e_c2));
    ok &= expect(e_d2 <= 1e-8, "instance " + std::to_string(i) +
                                   ": dispersion relative gap " + fmt(e_d2));
  }
  const double dt = seconds_since(t0);
  ok &= expect(dt < 60.0, "runtime " + fmt(dt) + "s exceeds one minute");
  std::printf("       info: %d instances in %.2fs\n", n, dt);
  return ok;
}

bool criterion_2() {
  const auto r = mapkit::reproduce_counterexample();
  bool ok = expect(r.non_monotone,
                   "hazard should fall then rise beyond 1e-9 margins");
  ok &= expect(!r.hazard.truncated_at.has_value(),
               "hazard curve should cover all of [0, 10]");

  // Re-derive the fall and rise depths straight from the curve.
  if (!r.hazard.samples.empty()) {
    const auto& s = r.hazard.samples;
    std::size_t k_min = 0;
    for (std::size_t k = 1; k < s.size(); ++k)
      if (s[k].value < s[k_min].value) k_min = k;
    double later_max = s[k_min].value;
    for (std::size_t k = k_min; k < s.size(); ++k)
      later_max = std::max(later_max, s[k].value);
    const double fall = s.front().value - s[k_min].value;
    const double rise = later_max - s[k_min].value;
    ok &= expect(fall > 1e-9, "hazard fall depth " + fmt(fall));
    ok &= expect(rise > 1e-9, "hazard rise height " + fmt(rise));
    std::printf(
        "       info: h(0) %.6f, min %.6f at t=%.2f, later max %.6f\n",
        s.front().value, s[k_min].value, s[k_min].t, later_max);
  } else {
    ok = expect(false, "hazard curve is empty");
  }

  const auto& v = r.report.verdicts;
  ok &= expect(v.size() == 4, "expected four verdicts");
  if (v.size() == 4) {
    ok &= expect(v[0].margin >= -1e-12,
                 "(I) margin " + fmt(v[0].margin) + " below -1e-12");
    ok &= expect(v[2].margin >= -1e-12,
                 "(III) margin " + fmt(v[2].margin) + " below -1e-12");
    ok &= expect(v[3].margin >= -1e-12,
                 "(IV) margin " + fmt(v[3].margin) + " below -1e-12");
    ok &= expect(v[1].margin < -1e-9, "(II) margin " + fmt(v[1].margin) +
                                          " should be decisively negative");
  }
  return ok;
}

bool criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dense = mapkit::run_sweep(dense_protocol());
  const auto cyclic = mapkit::run_sweep(cyclic_protocol());
  const double dt = seconds_since(t0);
  bool ok = true;
  for (const auto* out : {&dense, &cyclic}) {
    const char* tag = (out == &dense) ? "dense" : "cyclic";
    ok &= expect(out->n_failed == 0, std::string(tag) + ": " +
                                         std::to_string(out->n_failed) +
                                         " instances failed");
    ok &= expect(out->count_iii.hard == 0,
                 std::string(tag) + ": (III) margins below -1e-9, min " +
                     fmt(out->min_margin_iii));
    ok &= expect(out->count_iv.hard == 0,
                 std::string(tag) + ": (IV) margins below -1e-9, min " +
                     fmt(out->min_gap));
  }
  ok &= expect(dt < 600.0, "runtime " + fmt(dt) + "s exceeds ten minutes");
  std::printf(
      "       info: 50000 instances in %.1fs; dense min margins (I) %.2e "
      "(III) %.2e (IV) %.2e; cyclic (III) %.2e (IV) %.2e; (I) hard counts "
      "%" PRIu64 "/%" PRIu64 "\n",
      dt, dense.min_margin_i, dense.min_margin_iii, dense.min_gap,
      cyclic.min_margin_iii, cyclic.min_gap, dense.count_i.hard,
      cyclic.count_i.hard);
  return ok;
}

bool criterion_4() {
  const auto ts = mapkit::TimeGrid{}.points();
  const int n = 10000;
  bool ok = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_band = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const int order = 2 + i % 5;  // orders 2..6
    mapkit::SplitRng rng(
        mapkit::SplitRng::derive(kSeedSwitched, std::uint64_t(i)));
    const auto m = mapkit::random_mspp(order, rng);
    const auto report = mapkit::property_verdicts(m, ts, 1e-9);
    for (const auto& verdict : report.verdicts) {
      worst_margin = std::min(worst_margin, verdict.margin);
      ok &= expect(verdict.holds, "instance " + std::to_string(i) + ": (" +
                                      verdict.property + ") margin " +
                                      fmt(verdict.margin));
    }
    const auto bounds = mapkit::mspp_scv_bounds(m);
    worst_band = std::max(worst_band, report.scv - bounds.upper);
    ok &= expect(report.scv >= bounds.lower - 1e-9,
                 "instance " + std::to_string(i) + ": scv " +
                     fmt(report.scv) + " below 1");
    ok &= expect(report.scv <= bounds.upper + 1e-9,
                 "instance " + std::to_string(i) + ": scv " +
                     fmt(report.scv) + " above bracket " + fmt(bounds.upper));
  }
  std::printf(
      "       info: worst property margin %.2e, worst scv distance to the "
      "upper bracket %.2e\n",
      worst_margin, worst_band);
  return ok;
}

bool criterion_5() {
  bool ok = true;
  double worst = 0.0;
  std::uint64_t checked = 0;

  auto check_one = [&](const MapModel& m, const std::string& tag) {
    const auto r = lemma_check(m);
    worst = std::max(worst, r.residual_rel);
    ++checked;
    ok &= expect(r.residual_rel <= 1e-9,
                 tag + ": identity residual " + fmt(r.residual_rel));
    ok &= expect(r.sign_ok, tag + ": sign of scv - 1 does not match the "
                            "mean-interval ordering");
  };

  // Corpus of criterion 1: two-phase models.
  {
    mapkit::SplitRng rng(kSeedTwoPhase);
    for (int i = 0; i < 10000; ++i)
      check_one(mapkit::mmpp2_model(draw_two_phase(rng)),
                "two-phase " + std::to_string(i));
  }
  // Corpus of criterion 2: the fixed counter-example.
  check_one(mapkit::counterexample_model(), "four-phase cycle");
  // Corpora of criterion 3: the dense and cyclic sweep instances.
  for (const auto& cfg : {dense_protocol(), cyclic_protocol()}) {
    for (int order : cfg.orders) {
      for (int i = 0; i < cfg.n_instances; ++i) {
        mapkit::SplitRng rng(mapkit::SplitRng::derive(
            cfg.seed, std::uint64_t(order), std::uint64_t(i)));
        const MapModel m =
            cfg.generator == mapkit::GeneratorKind::DenseUniform
                ? mapkit::random_mmpp(order, rng)
                : mapkit::random_cyclic_mmpp(order, rng);
        check_one(m, mapkit::to_string(cfg.generator) + std::string(" p") +
                         std::to_string(order) + " #" + std::to_string(i));
      }
    }
  }
  // Corpus of criterion 4: event-switching models.
  for (int i = 0; i < 10000; ++i) {
    mapkit::SplitRng rng(
        mapkit::SplitRng::derive(kSeedSwitched, std::uint64_t(i)));
    check_one(mapkit::random_mspp(2 + i % 5, rng),
              "switched " + std::to_string(i));
  }

  std::printf("       info: %" PRIu64
              " models checked, worst identity residual %.3e\n",
              checked, worst);
  return ok;
}

struct SimRunRecord {
  std::string name;
  mapkit::SimEstimate c2;
  mapkit::DispersionEstimate d2;
  double ks_alpha;
  double ks_pi;
};

SimRunRecord run_sim_fixture(const char* name, const MapModel& m,
                             std::uint64_t seed_tag) {
  SimRunRecord rec;
  rec.name = name;

  mapkit::SimConfig scv_cfg;
  scv_cfg.seed = mapkit::SplitRng::derive(kSeedSim, seed_tag, 0);
  scv_cfg.n_events = 1000000;
  scv_cfg.start = mapkit::SimStart::event_stationary();
  rec.c2 = mapkit::estimate_scv(m, scv_cfg);

  mapkit::SimConfig disp_cfg;
  disp_cfg.seed = mapkit::SplitRng::derive(kSeedSim, seed_tag, 1);
  disp_cfg.n_events = 1000000;
  disp_cfg.start = mapkit::SimStart::time_stationary();
  rec.d2 = mapkit::estimate_dispersion(m, disp_cfg);

  const std::uint64_t n_ks = 100000;
  const auto t_alpha = mapkit::sample_first_event_times(
      m, mapkit::SimStart::event_stationary(), n_ks,
      mapkit::SplitRng::derive(kSeedSim, seed_tag, 2));
  const auto t_pi = mapkit::sample_first_event_times(
      m, mapkit::SimStart::time_stationary(), n_ks,
      mapkit::SplitRng::derive(kSeedSim, seed_tag, 3));
  rec.ks_alpha = mapkit::ks_distance(
      t_alpha, mapkit::ph_distribution(m, mapkit::Start::EventStationary));
  rec.ks_pi = mapkit::ks_distance(
      t_pi, mapkit::ph_distribution(m, mapkit::Start::TimeStationary));
  return rec;
}

// Canonical text form of a record, used for the determinism comparison.
std::string record_to_text(const SimRunRecord& r) {
  std::string out = r.name;
  for (double v :
       {r.c2.estimate, r.c2.std_error, double(r.c2.n_samples),
        r.d2.value.estimate, r.d2.value.std_error, r.d2.window_length,
        double(r.d2.n_windows), r.ks_alpha, r.ks_pi}) {
    out += ' ';
    out += fmt(v);
  }
  return out;
}

struct SimFixtures {
  MapModel poisson;
  MapModel two_phase;
  MapModel cycle4;
};

SimFixtures sim_fixtures() {
  Matrix C1(1, 1), D1(1, 1);
  C1 << -2.0;
  D1 << 2.0;
  return SimFixtures{mapkit::validate_model(C1, D1),
                     mapkit::mmpp2_model({1.0, 3.0, 1.0, 1.0}),
                     mapkit::counterexample_model()};
}

bool criterion_6() {
  const auto fx = sim_fixtures();
  struct Expected {
    const char* name;
    const MapModel* m;
    double c2;
    double d2;
    std::uint64_t tag;
  };
  const Expected fixtures[] = {
      {"memoryless", &fx.poisson, 1.0, 1.0, 0},
      {"two-phase", &fx.two_phase, 9.0 / 7.0, 1.5, 1},
      {"four-phase cycle", &fx.cycle4, 1.560779850019478,
       1.4851980198019803, 2},
  };

  const double ks_crit = mapkit::ks_critical_1pct(100000);
  bool ok = true;
  for (const auto& f : fixtures) {
    const auto rec = run_sim_fixture(f.name, *f.m, f.tag);
    const double z_c2 = std::abs(rec.c2.estimate - f.c2) / rec.c2.std_error;
    const double z_d2 =
        std::abs(rec.d2.value.estimate - f.d2) / rec.d2.value.std_error;
    ok &= expect(z_c2 <= 4.0, std::string(f.name) + ": scv estimate " +
                                  fmt(rec.c2.estimate) + " is " + fmt(z_c2) +
                                  " standard errors from " + fmt(f.c2));
    ok &= expect(z_d2 <= 4.0, std::string(f.name) +
                                  ": dispersion estimate " +
                                  fmt(rec.d2.value.estimate) + " is " +
                                  fmt(z_d2) + " standard errors from " +
                                  fmt(f.d2));
    ok &= expect(rec.ks_alpha < ks_crit,
                 std::string(f.name) + ": event-stationary KS distance " +
                     fmt(rec.ks_alpha) + " exceeds 1% critical " +
                     fmt(ks_crit));
    ok &= expect(rec.ks_pi < ks_crit,
                 std::string(f.name) + ": time-stationary KS distance " +
                     fmt(rec.ks_pi) + " exceeds 1% critical " + fmt(ks_crit));
    std::printf(
        "       info: %s scv %.6f+-%.6f (z=%.2f), d2 %.6f+-%.6f (z=%.2f), "
        "KS %.4f/%.4f (crit %.4f)\n",
        f.name, rec.c2.estimate, rec.c2.std_error, z_c2,
        rec.d2.value.estimate, rec.d2.value.std_error, z_d2, rec.ks_alpha,
        rec.ks_pi, ks_crit);
  }
  return ok;
}

bool criterion_7() {
  const int n = 1000;
  bool ok = true;
  for (int i = 0; i < n; ++i) {
    const int order = 2 + i % 7;  // orders 2..8
    mapkit::SplitRng rng(
        mapkit::SplitRng::derive(kSeedKernel, std::uint64_t(i)));
    const Eigen::Index p = order;

    // Random conservative generator, split into a valid model so the
    // deviation identities can be checked through the public API.
    Matrix Q = Matrix::Zero(p, p);
    for (Eigen::Index r = 0; r < p; ++r) {
      for (Eigen::Index c = 0; c < p; ++c)
        if (r != c) Q(r, c) = 0.01 + rng.next_uniform();
      Q(r, r) = -Q.row(r).sum();
    }
    Matrix D = Matrix::Zero(p, p);
    for (Eigen::Index r = 0; r < p; ++r)
      D(r, r) = rng.next_uniform(0.5, 1.5);
    const MapModel m = mapkit::validate_model(Matrix(Q - D), D);

    // Semigroup property.
    const double s = 0.4, t = 1.3;
    const Matrix whole = mapkit::expm(Q, s + t);
    const Matrix split = mapkit::expm(Q, s) * mapkit::expm(Q, t);
    const double sg = (whole - split).cwiseAbs().maxCoeff();
    ok &= expect(sg <= 1e-12, "generator " + std::to_string(i) +
                                  ": semigroup defect " + fmt(sg));

    // Row-sum conservation across time scales.
    for (double tt : {0.1, 1.0, 10.0, 100.0}) {
      const Matrix E = mapkit::expm(Q, tt);
      const double defect =
          (E.rowwise().sum() - Vector::Ones(p)).cwiseAbs().maxCoeff();
      ok &= expect(defect <= 1e-12, "generator " + std::to_string(i) +
                                        ": row-sum defect " + fmt(defect) +
                                        " at t=" + fmt(tt));
    }

    // Deviation-matrix identities (construction already verifies them at
    // the kernel tolerance; re-check explicitly against 1e-9 here).
    const auto dev = mapkit::deviation_matrix(m);
    const Vector one = Vector::Ones(p);
    const double id1 = (dev.dsharp * one).cwiseAbs().maxCoeff();
    const double id2 = (dev.pi * dev.dsharp).cwiseAbs().maxCoeff();
    const Matrix inv_rel =
        m.Q() * dev.dsharp - (one * dev.pi - Matrix::Identity(p, p));
    const double id3 = inv_rel.cwiseAbs().maxCoeff();
    ok &= expect(id1 <= 1e-9, "generator " + std::to_string(i) +
                                  ": D# 1 defect " + fmt(id1));
    ok &= expect(id2 <= 1e-9, "generator " + std::to_string(i) +
                                  ": pi D# defect " + fmt(id2));
    ok &= expect(id3 <= 1e-9, "generator " + std::to_string(i) +
                                  ": inverse-relation defect " + fmt(id3));
  }
  return ok;
}

bool criterion_8() {
  // Criterion 3 reruns: the canonical sweep serialization must be
  // byte-identical, including every per-instance record.
  const auto dense_a =
      mapkit::sweep_to_json(mapkit::run_sweep(dense_protocol()));
  const auto dense_b =
      mapkit::sweep_to_json(mapkit::run_sweep(dense_protocol()));
  bool ok = expect(dense_a == dense_b,
                   "dense sweep serialization differs between reruns");

  auto cyc_cfg = cyclic_protocol();
  cyc_cfg.n_threads = 1;
  const auto cyc_a = mapkit::sweep_to_json(mapkit::run_sweep(cyc_cfg));
  cyc_cfg.n_threads = 4;  // worker count must not leak into the bytes
  const auto cyc_b = mapkit::sweep_to_json(mapkit::run_sweep(cyc_cfg));
  ok &= expect(cyc_a == cyc_b,
               "cyclic sweep serialization depends on the worker count");

  // Criterion 6 reruns: every estimate, window choice and KS distance
  // must reproduce bit-for-bit from the same seeds.
  const auto fx = sim_fixtures();
  struct Fixture {
    const char* name;
    const MapModel* m;
    std::uint64_t tag;
  };
  const Fixture fixtures[] = {{"memoryless", &fx.poisson, 0},
                              {"two-phase", &fx.two_phase, 1},
                              {"four-phase cycle", &fx.cycle4, 2}};
  for (const auto& f : fixtures) {
    const auto a = record_to_text(run_sim_fixture(f.name, *f.m, f.tag));
    const auto b = record_to_text(run_sim_fixture(f.name, *f.m, f.tag));
    ok &= expect(a == b, std::string(f.name) +
                             " simulation record differs between reruns:\n" +
                             a + "\n" + b);
  }
  return ok;
}

struct Criterion {
  int number;
  const char* description;
  bool (*fn)();
};

const Criterion kCriteria[] = {
    {1, "two-phase closed forms match the pipeline to 1e-8 relative "
        "(10000 instances)",
     &criterion_1},
    {2, "four-phase counter-example: non-monotone hazard with (I)/(III)/"
        "(IV) intact",
     &criterion_2},
    {3, "randomized sweep, 10000 instances per order {3,4,5,6} dense plus "
        "10000 cyclic order-4: no (III)/(IV) margins below -1e-9",
     &criterion_3},
    {4, "10000 random event-switching models: properties hold and scv sits "
        "in the Kantorovich bracket",
     &criterion_4},
    {5, "mean-interval identity within 1e-9 of the mean and sign-linked to "
        "scv - 1 across all corpora",
     &criterion_5},
    {6, "simulation estimates within 4 standard errors and KS at the 1% "
        "level on three fixtures",
     &criterion_6},
    {7, "kernel numerics: semigroup, row sums, deviation identities over "
        "1000 random generators of orders 2-8",
     &criterion_7},
    {8, "byte-identical reruns of the sweep and simulation records",
     &criterion_8},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
      if (only < 1 || only > 8) {
        std::fprintf(stderr, "error: --criterion takes a number in 1..8\n");
        return 1;
      }
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 1;
    }
  }

  int failures = 0;
  for (const auto& c : kCriteria) {
    if (only != 0 && c.number != only) continue;
    g_checks_failed = 0;
    bool ok = false;
    try {
      ok = c.fn();
    } catch (const std::exception& e) {
      detail_fail(std::string("unexpected exception: ") + e.what());
      ok = false;
    }
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", c.number,
                c.description);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
