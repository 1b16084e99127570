// mapkit CLI: exact analysis, randomized sweeps and seeded simulation of
// two-matrix (C, D) point-process models from the command line.
//
// Exit codes:
//   0  success (analyze: all properties hold; sweep: no hard violation;
//      counterexample: reproduced)
//   1  input or usage error (bad flags, unreadable model, bad config)
//   2  analyze: at least one property violated on the grid;
//      counterexample: the expected signature did not reproduce
//   3  sweep: at least one hard violation (margin < -tolerance)

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mapkit/closed_forms.hpp"
#include "mapkit/experiment.hpp"
#include "mapkit/grid.hpp"
#include "mapkit/metrics.hpp"
#include "mapkit/model_io.hpp"
#include "mapkit/simulate.hpp"

namespace {

using nlohmann::json;

mapkit::TimeGrid parse_grid(const std::string& text) {
  mapkit::TimeGrid g;
  double a = 0, b = 0, c = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &a, &b, &c) != 3)
    throw mapkit::config_error("grid must be START:STOP:STEP, got '" + text +
                               "'");
  g.start = a;
  g.stop = b;
  g.step = c;
  g.validate();
  return g;
}

mapkit::ProbVector parse_start(const std::string& text,
                               const mapkit::MapModel& m) {
  if (text == "alpha")
    return mapkit::stationary_pair(m).alpha;
  if (text == "pi")
    return mapkit::stationary_pair(m).pi;
  if (text.rfind("phase:", 0) == 0) {
    const long k = std::strtol(text.c_str() + 6, nullptr, 10);
    return mapkit::ProbVector::point_mass(m.order(), k);
  }
  throw mapkit::config_error(
      "start must be 'alpha', 'pi' or 'phase:K', got '" + text + "'");
}

mapkit::SimStart parse_sim_start(const std::string& text) {
  if (text == "alpha") return mapkit::SimStart::event_stationary();
  if (text == "pi") return mapkit::SimStart::time_stationary();
  if (text.rfind("phase:", 0) == 0)
    return mapkit::SimStart::fixed_phase(
        std::strtol(text.c_str() + 6, nullptr, 10));
  throw mapkit::config_error(
      "start must be 'alpha', 'pi' or 'phase:K', got '" + text + "'");
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw mapkit::config_error("cannot open output file: " + path);
  out << content << "\n";
}

std::ofstream open_file(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw mapkit::config_error("cannot open output file: " + path);
  return out;
}

void print_row(std::ostream& os, double t, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, a);
  os << buf;
}

void print_row(std::ostream& os, double t, double a, double b) {
  char buf[144];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t, a, b);
  os << buf;
}

struct CurveSink {
  std::ofstream file;
  std::ostream& stream() { return file.is_open() ? file : std::cout; }
  explicit CurveSink(const std::string& path) {
    if (!path.empty() && path != "-") file = open_file(path);
  }
};

int cmd_analyze(const std::string& model_path, const std::string& grid_text,
                double tolerance, const std::string& out_path) {
  const mapkit::MapModel m = mapkit::load_model_file(model_path);
  const mapkit::TimeGrid grid = parse_grid(grid_text);
  const mapkit::MetricsReport rep =
      mapkit::property_verdicts(m, grid.points(), tolerance);

  json j = json::parse(mapkit::report_to_json(rep));
  j["order"] = m.order();
  j["class"] = mapkit::to_string(m.map_class());
  j["grid"] = {{"start", grid.start}, {"stop", grid.stop},
               {"step", grid.step}};
  j["tolerance"] = tolerance;
  if (m.map_class() == mapkit::MapClass::Mspp) {
    const auto b = mapkit::mspp_scv_bounds(m);
    j["scv_bounds"] = {{"lower", b.lower}, {"upper", b.upper}};
  }
  write_text(out_path, j.dump(2));
  return rep.all_hold() ? 0 : 2;
}

int cmd_sweep(const mapkit::SweepConfig& cfg, const std::string& out_path,
              const std::string& csv_path, bool include_instances) {
  const mapkit::SweepOutcome out = mapkit::run_sweep(cfg);
  write_text(out_path, mapkit::sweep_to_json(out, include_instances));
  if (!csv_path.empty()) {
    auto f = open_file(csv_path);
    mapkit::write_sweep_csv(f, out);
  }
  std::cerr << "sweep: " << out.instances.size() << " instances in "
            << out.runtime_ms << " ms\n";
  return out.any_hard_violation() ? 3 : 0;
}

int cmd_hazard(const std::string& model_path, const std::string& grid_text,
               const std::string& start_text, const std::string& csv_path) {
  const mapkit::MapModel m = mapkit::load_model_file(model_path);
  const mapkit::ProbVector eta = parse_start(start_text, m);
  const auto curve =
      mapkit::hazard_curve(m, eta, parse_grid(grid_text).points());
  CurveSink sink(csv_path);
  sink.stream() << "t,value,derivative\n";
  for (const auto& s : curve.samples)
    print_row(sink.stream(), s.t, s.value, s.derivative);
  if (curve.truncated_at)
    std::cerr << "hazard: survival underflow, curve truncated at t = "
              << *curve.truncated_at << "\n";
  return 0;
}

int cmd_gap(const std::string& model_path, const std::string& grid_text,
            const std::string& csv_path) {
  const mapkit::MapModel m = mapkit::load_model_file(model_path);
  const auto curve =
      mapkit::stochastic_order_gap(m, parse_grid(grid_text).points());
  CurveSink sink(csv_path);
  sink.stream() << "t,value\n";
  for (std::size_t i = 0; i < curve.ts.size(); ++i)
    print_row(sink.stream(), curve.ts[i], curve.values[i]);
  std::cerr << "gap: min " << curve.min_value << " at t = " << curve.argmin_t
            << "\n";
  return 0;
}

int cmd_variance(const std::string& model_path, const std::string& grid_text,
                 const std::string& csv_path) {
  const mapkit::MapModel m = mapkit::load_model_file(model_path);
  const auto curve = mapkit::variance_curve(m, parse_grid(grid_text).points());
  CurveSink sink(csv_path);
  sink.stream() << "t,mean,variance\n";
  for (const auto& s : curve) print_row(sink.stream(), s.t, s.mean, s.variance);
  return 0;
}

int cmd_simulate(const std::string& model_path,
                 std::optional<std::uint64_t> events,
                 std::optional<double> horizon, std::uint64_t seed,
                 const std::string& estimate, int batches,
                 const std::string& export_path,
                 const std::string& start_text) {
  const mapkit::MapModel m = mapkit::load_model_file(model_path);
  json j;
  j["seed"] = seed;
  j["class"] = mapkit::to_string(m.map_class());

  const bool want_scv = estimate == "scv" || estimate == "both";
  const bool want_disp = estimate == "dispersion" || estimate == "both";
  if (!want_scv && !want_disp && estimate != "none")
    throw mapkit::config_error(
        "estimate must be scv, dispersion, both or none");
  if (estimate == "none" && export_path.empty())
    throw mapkit::config_error(
        "--estimate none requires --export (nothing to do)");

  if (want_scv) {
    mapkit::SimConfig cfg;
    cfg.seed = mapkit::SplitRng::derive(seed, 0);
    cfg.n_events = events;
    cfg.horizon = horizon;
    cfg.start = mapkit::SimStart::event_stationary();
    cfg.n_batches = batches;
    const auto est = mapkit::estimate_scv(m, cfg);
    j["scv"] = {{"estimate", est.estimate},
                {"std_error", est.std_error},
                {"n_samples", est.n_samples},
                {"stream_seed", cfg.seed}};
  }
  if (want_disp) {
    mapkit::SimConfig cfg;
    cfg.seed = mapkit::SplitRng::derive(seed, 1);
    cfg.n_events = events;
    cfg.horizon = horizon;
    cfg.start = mapkit::SimStart::time_stationary();
    const auto est = mapkit::estimate_dispersion(m, cfg);
    j["dispersion"] = {{"estimate", est.value.estimate},
                       {"std_error", est.value.std_error},
                       {"n_windows", est.n_windows},
                       {"window_length", est.window_length},
                       {"stream_seed", cfg.seed}};
  }
  if (!export_path.empty()) {
    mapkit::SimConfig cfg;
    cfg.seed = mapkit::SplitRng::derive(seed, 2);
    cfg.n_events = events;
    cfg.horizon = horizon;
    cfg.start = parse_sim_start(start_text);
    const auto stream = mapkit::simulate_events(m, cfg);
    auto f = open_file(export_path);
    mapkit::write_event_csv(f, stream);
    j["export"] = {{"path", export_path},
                   {"n_events", stream.inter_event_times.size()},
                   {"stream_seed", cfg.seed}};
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_counterexample(const std::string& out_path,
                       const std::string& csv_path) {
  const auto r = mapkit::reproduce_counterexample();
  write_text(out_path, mapkit::counterexample_to_json(r));
  if (!csv_path.empty()) {
    auto f = open_file(csv_path);
    f << "t,value,derivative\n";
    for (const auto& s : r.hazard.samples)
      print_row(f, s.t, s.value, s.derivative);
  }
  bool expected = r.non_monotone;
  for (const auto& v : r.report.verdicts) {
    if (v.property == "II")
      expected = expected && !v.holds;
    else
      expected = expected && v.holds;
  }
  return expected ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "mapkit: exact and simulated analysis of two-matrix (C, D) "
      "point-process models"};
  app.require_subcommand(1);

  std::string model_path, grid_text = "0:10:0.2", out_path, csv_path;
  std::string start_text = "alpha";
  double tolerance = 1e-12;

  auto* analyze = app.add_subcommand(
      "analyze", "Second-order descriptors and property verdicts");
  analyze->add_option("--model", model_path, "model JSON file")->required();
  analyze->add_option("--grid", grid_text, "time grid START:STOP:STEP");
  analyze->add_option("--tolerance", tolerance,
                      "verdict threshold: holds iff margin >= -tolerance");
  analyze->add_option("--out", out_path, "output path (default stdout)");

  mapkit::SweepConfig sweep_cfg;
  std::string generator_text = "dense", sweep_grid_text = "0:10:0.2";
  bool include_instances = false;
  auto* sweep = app.add_subcommand(
      "sweep", "Randomized verification sweep over model instances");
  sweep->add_option("--orders", sweep_cfg.orders,
                    "model orders (default 3 4 5 6)")
      ->delimiter(',');
  sweep->add_option("--n", sweep_cfg.n_instances, "instances per order");
  sweep->add_option("--generator", generator_text, "dense or cyclic");
  sweep->add_option("--seed", sweep_cfg.seed, "base seed");
  sweep->add_option("--grid", sweep_grid_text, "gap grid START:STOP:STEP");
  sweep->add_option("--tolerance", sweep_cfg.tolerance,
                    "hard-violation threshold");
  sweep->add_option("--threads", sweep_cfg.n_threads,
                    "worker threads (0 = hardware)");
  sweep->add_option("--out", out_path, "JSON output path (default stdout)");
  sweep->add_option("--csv", csv_path, "per-instance CSV path");
  sweep->add_flag("--instances", include_instances,
                  "embed per-instance records in the JSON");

  auto* hazard = app.add_subcommand(
      "hazard", "Hazard-rate curve of the first event time (CSV)");
  hazard->add_option("--model", model_path, "model JSON file")->required();
  hazard->add_option("--grid", grid_text, "time grid START:STOP:STEP");
  hazard->add_option("--start", start_text, "alpha, pi or phase:K");
  hazard->add_option("--csv", csv_path, "CSV path (default stdout)");

  auto* gap = app.add_subcommand(
      "gap", "Interval stochastic-order gap curve (CSV)");
  gap->add_option("--model", model_path, "model JSON file")->required();
  gap->add_option("--grid", grid_text, "time grid START:STOP:STEP");
  gap->add_option("--csv", csv_path, "CSV path (default stdout)");

  auto* variance = app.add_subcommand(
      "variance", "Transient mean/variance of counts (CSV)");
  variance->add_option("--model", model_path, "model JSON file")->required();
  variance->add_option("--grid", grid_text, "time grid START:STOP:STEP");
  variance->add_option("--csv", csv_path, "CSV path (default stdout)");

  std::uint64_t sim_events_opt = 0;
  double sim_horizon_opt = 0.0;
  std::uint64_t sim_seed = 1;
  std::string estimate = "both";
  int batches = 100;
  std::string export_path;
  auto* simulate = app.add_subcommand(
      "simulate", "Seeded simulation estimates of scv and dispersion");
  simulate->add_option("--model", model_path, "model JSON file")->required();
  auto* ev_opt = simulate->add_option("--events", sim_events_opt,
                                      "event budget");
  auto* hz_opt = simulate->add_option("--horizon", sim_horizon_opt,
                                      "time budget");
  simulate->add_option("--seed", sim_seed, "base seed (echoed in output)");
  simulate->add_option("--estimate", estimate,
                       "scv, dispersion, both or none");
  simulate->add_option("--batches", batches, "jackknife blocks for scv");
  simulate->add_option("--export", export_path, "event-stream CSV path");
  simulate->add_option("--start", start_text,
                       "start for --export stream: alpha, pi or phase:K");

  auto* counter = app.add_subcommand(
      "counterexample",
      "Reproduce the fixed four-phase hazard-rate counter-example");
  counter->add_option("--out", out_path, "JSON output path (default stdout)");
  counter->add_option("--csv", csv_path, "hazard CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(analyze))
      return cmd_analyze(model_path, grid_text, tolerance, out_path);
    if (app.got_subcommand(sweep)) {
      if (generator_text == "dense")
        sweep_cfg.generator = mapkit::GeneratorKind::DenseUniform;
      else if (generator_text == "cyclic")
        sweep_cfg.generator = mapkit::GeneratorKind::CyclicUniform;
      else
        throw mapkit::config_error("generator must be dense or cyclic");
      sweep_cfg.grid = parse_grid(sweep_grid_text);
      return cmd_sweep(sweep_cfg, out_path, csv_path, include_instances);
    }
    if (app.got_subcommand(hazard))
      return cmd_hazard(model_path, grid_text, start_text, csv_path);
    if (app.got_subcommand(gap))
      return cmd_gap(model_path, grid_text, csv_path);
    if (app.got_subcommand(variance))
      return cmd_variance(model_path, grid_text, csv_path);
    if (app.got_subcommand(simulate)) {
      std::optional<std::uint64_t> events;
      std::optional<double> horizon;
      if (ev_opt->count()) events = sim_events_opt;
      if (hz_opt->count()) horizon = sim_horizon_opt;
      return cmd_simulate(model_path, events, horizon, sim_seed, estimate,
                          batches, export_path, start_text);
    }
    if (app.got_subcommand(counter))
      return cmd_counterexample(out_path, csv_path);
  } catch (const mapkit::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
