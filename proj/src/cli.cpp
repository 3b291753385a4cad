#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "relguide/cli.hpp"
#include "relguide/errors.hpp"
#include "relguide/flight_sim.hpp"
#include "relguide/live_bridge.hpp"

namespace relguide {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Invocation {
  std::string command;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> inputs;
  bool intent = false;
  unsigned short port = 8080;
  double time_scale = 1.0;
  std::string ui_dir;
};

struct Prepared {
  RunConfig cfg;
  std::vector<std::string> inputs;
  bool intent = false;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw missing_file(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw missing_file(path.string());
  out << text;
}

// Resolves config, inputs and flags, pulling anything missing from a
// manifest when --config points at one.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Prepared prepare(const Invocation& inv, std::size_t n_inputs) {
  Prepared p;
  std::vector<std::string> manifest_inputs;
  if (!inv.config_path.empty()) {
    p.cfg = load_run_config(inv.config_path);
    const json j = json::parse(slurp(inv.config_path));
    if (j.contains("resolved_config")) {
      if (j.value("command", "") != inv.command) {
        throw schema_error("manifest " + inv.config_path + " was written by '" +
                           j.value("command", "?") + "', not '" + inv.command + "'");
      }
      for (const auto& s : j.value("inputs", json::array())) manifest_inputs.push_back(s.get<std::string>());
      p.intent = j.value("flags", json::object()).value("intent", false);
    }
  }
  if (inv.seed) p.cfg.seed = *inv.seed;
  p.cfg.train.seed = p.cfg.seed;
  p.cfg.rdp.seed = p.cfg.seed;
  const Exec exec = p.cfg.parallel ? Exec::kParallel : Exec::kSerial;
  p.cfg.rdp.exec = exec;
  p.cfg.train.exec = exec;
  p.inputs = inv.inputs.empty() ? manifest_inputs : inv.inputs;
  p.intent = p.intent || inv.intent;
  if (p.inputs.size() < n_inputs) {
    throw UsageError(inv.command + ": expected " + std::to_string(n_inputs) + " input file(s)");
  }
  for (const auto& in : p.inputs) {
    if (!fs::exists(in)) throw missing_file(in);
  }
  return p;
}

void write_manifest(const fs::path& dir, const Invocation& inv, const Prepared& p,
                    const std::vector<std::string>& outputs) {
  json inputs = json::array();
  for (const auto& in : p.inputs) inputs.push_back(fs::absolute(in).lexically_normal().string());
  json manifest = {
      {"tool", "relguide"},
      {"version", kToolVersion},
      {"command", inv.command},
      {"config_path", inv.config_path},
      {"output_dir", dir.string()},
      {"seed", p.cfg.seed},
      {"inputs", inputs},
      {"flags", {{"intent", p.intent}}},
      {"outputs", outputs},
      {"resolved_config", json::parse(run_config_to_json(p.cfg))},
  };
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

fs::path out_dir(const Invocation& inv) {
  fs::path dir(inv.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kMissingFile, "cannot create " + dir.string());
  return dir;
}

int cmd_gen(const Invocation& inv, std::ostream& out) {
  const Prepared p = prepare(inv, 0);
  const RdpResult res = generate_tree(p.cfg.rdp);
  if (!res.stats.diagnostic.empty()) throw Error(ErrorKind::kInfeasible, res.stats.diagnostic);
  const fs::path dir = out_dir(inv);
  export_dataset(res.samples, (dir / "dataset.csv").string());
  const CoverageReport cov = coverage_report(res.samples, p.cfg.rdp.cell);
  std::size_t max_count = 0;
  for (const auto& [cell, n] : cov.counts) max_count = std::max(max_count, n);
  json coverage = {
      {"samples", cov.total},
      {"occupied_cells", cov.counts.size()},
      {"max_per_cell", max_count},
      {"reach_m", cov.reach()},
      {"min", {cov.min_extent.dx, cov.min_extent.dy, cov.min_extent.dpsi}},
      {"max", {cov.max_extent.dx, cov.max_extent.dy, cov.max_extent.dpsi}},
      {"candidates_per_level", res.stats.candidates_per_level},
      {"winners_per_level", res.stats.winners_per_level},
      {"pruned_region", res.stats.pruned_region},
      {"pruned_separation", res.stats.pruned_separation},
  };
  write_text(dir / "coverage.json", coverage.dump(2) + "\n");
  write_manifest(dir, inv, p, {"dataset.csv", "coverage.json"});
  out << "gen: samples=" << res.samples.size() << " cells=" << cov.counts.size()
      << " reach_km=" << cov.reach() / 1000.0 << " -> " << (dir / "dataset.csv").string() << "\n";
  return kExitOk;
}

int cmd_train(const Invocation& inv, std::ostream& out) {
  const Prepared p = prepare(inv, 1);
  const double r_min = p.cfg.rdp.r_min();
  const auto data = import_dataset(p.inputs[0], r_min);
  const TrainResult res = train(data, p.cfg.train, r_min);
  const fs::path dir = out_dir(inv);
  save_weights(res.params, (dir / "weights.json").string());
  std::string loss = "epoch,train,validation\n";
  char buf[128];
  for (const auto& e : res.history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", e.epoch, e.train, e.validation);
    loss += buf;
  }
  write_text(dir / "loss.csv", loss);
  std::vector<TrainingSample> held;
  for (std::size_t i : res.validation_indices) held.push_back(data[i]);
  std::vector<std::string> outputs{"weights.json", "loss.csv"};
  if (!held.empty()) {
    export_dataset(held, (dir / "heldout.csv").string());
    outputs.push_back("heldout.csv");
  }
  write_manifest(dir, inv, p, outputs);
  const double first = res.history.front().train;
  const double last = res.history.back().train;
  out << "train: samples=" << data.size() << " epochs=" << p.cfg.train.epochs
      << " loss " << first << " -> " << last << " (" << 100.0 * last / first << "%)\n";
  return kExitOk;
}

std::vector<std::size_t> strided(std::size_t n, std::size_t max_states) {
  std::vector<std::size_t> idx;
  if (max_states == 0 || max_states >= n) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    return idx;
  }
  for (std::size_t k = 0; k < max_states; ++k) idx.push_back(k * n / max_states);
  return idx;
}

json stats_json(const CostRatioStats& s) {
  return {{"evaluated", s.evaluated}, {"infeasible", s.infeasible}, {"mean", s.mean},
          {"min", s.min},             {"max", s.max},               {"p50", s.p50},
          {"p90", s.p90},             {"p99", s.p99}};
}

int cmd_eval(const Invocation& inv, std::ostream& out) {
  const Prepared p = prepare(inv, 1);
  const double r_min = p.cfg.rdp.r_min();
  const auto all = import_dataset(p.inputs[0], r_min);
  std::vector<TrainingSample> data;
  for (std::size_t i : strided(all.size(), p.cfg.eval.max_states)) data.push_back(all[i]);

  OracleConfig oc = oracle_config_from(p.cfg.rdp);
  oc.position_tolerance = p.cfg.eval.position_tolerance;
  oc.heading_tolerance = p.cfg.eval.heading_tolerance;
  std::vector<RelativeState> states;
  for (const auto& s : data) states.push_back(s.state);
  const double v_p = p.cfg.rdp.spec.speeds.v_p;
  auto oracle = oracle_costs(states, oc, p.cfg.rdp.exec);
  for (auto& o : oracle) {
    if (o) *o /= v_p;  // path length to flight time
  }

  std::vector<double> dataset_costs;
  for (const auto& s : data) dataset_costs.push_back(plan_time(s.plan, v_p));
  const CostRatioStats ds = cost_ratios(dataset_costs, oracle);
  if (ds.evaluated == 0) throw Error(ErrorKind::kInfeasible, "eval: no state has a feasible oracle plan");

  json report = {{"states", data.size()}, {"dataset", stats_json(ds)}};
  std::string csv = "dx_m,dy_m,dpsi_rad,oracle_s,dataset_s";
  std::vector<double> net_costs;
  std::vector<double> residuals;
  if (p.inputs.size() > 1) {
    const NetworkParams net = load_weights(p.inputs[1]);
    csv += ",network_s,closure_m";
    for (const auto& s : data) {
      const ManeuverPlan plan = forward(net, s.state);
      net_costs.push_back(plan_time(plan, v_p));
      residuals.push_back(
          convergence_residual(plan, canonical_pose(s.state), p.cfg.rdp.spec, 0.0).position_norm());
    }
    const CostRatioStats ns = cost_ratios(net_costs, oracle);
    std::size_t within = 0;
    for (double r : ns.ratios) within += r <= p.cfg.eval.ratio_bound ? 1 : 0;
    std::vector<double> sorted = residuals;
    std::sort(sorted.begin(), sorted.end());
    report["network"] = stats_json(ns);
    report["network"]["within_bound"] = within;
    report["network"]["within_fraction"] =
        ns.evaluated ? static_cast<double>(within) / static_cast<double>(ns.evaluated) : 0.0;
    report["network"]["closure_p50_m"] = sorted[sorted.size() / 2];
    out << "eval: network within " << p.cfg.eval.ratio_bound << "x oracle on " << within << "/"
        << ns.evaluated << " states, mean ratio " << ns.mean << ", median closure "
        << sorted[sorted.size() / 2] << " m\n";
  }
  csv += "\n";
  char buf[256];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double o = oracle[i] ? *oracle[i] : std::nan("");
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g", data[i].state.dx,
                  data[i].state.dy, data[i].state.dpsi, o, dataset_costs[i]);
    csv += buf;
    if (!net_costs.empty()) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", net_costs[i], residuals[i]);
      csv += buf;
    }
    csv += "\n";
  }
  const fs::path dir = out_dir(inv);
  write_text(dir / "eval.json", report.dump(2) + "\n");
  write_text(dir / "ratios.csv", csv);
  write_manifest(dir, inv, p, {"eval.json", "ratios.csv"});
  out << "eval: dataset mean ratio " << ds.mean << " (min " << ds.min << ", max " << ds.max
      << ") over " << ds.evaluated << " states, " << ds.infeasible << " infeasible\n";
  return kExitOk;
}

int cmd_sim(const Invocation& inv, std::ostream& out) {
  const Prepared p = prepare(inv, 2);
  const Scenario scn = load_scenario(p.inputs[0]);
  const NetworkParams net = load_weights(p.inputs[1]);
  const SimTrace trace = run_scenario(scn, net, p.intent);
  const fs::path dir = out_dir(inv);
  write_trace_csv(trace, (dir / "trace.csv").string());
  const SimMetrics& m = trace.metrics;
  json metrics = {{"converged", m.converged},
                  {"t_f_s", m.t_f},
                  {"min_separation_m", m.min_separation},
                  {"sway_rad", m.sway},
                  {"intent", p.intent},
                  {"records", trace.records.size()}};
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");
  write_manifest(dir, inv, p, {"trace.csv", "metrics.json"});
  out << metrics_line(m) << "\n";
  return kExitOk;
}

int cmd_serve(const Invocation& inv, std::ostream& out) {
  const Prepared p = prepare(inv, 2);
  const Scenario scn = load_scenario(p.inputs[0]);
  const NetworkParams net = load_weights(p.inputs[1]);
  if (!(inv.time_scale > 0.0 && inv.time_scale <= kMaxTimeScale)) {
    throw schema_error("serve: --time-scale must be in (0, 20]");
  }
  ServeOptions opts;
  opts.port = inv.port;
  opts.time_scale = inv.time_scale;
  opts.ui_dir = inv.ui_dir;
  opts.intent_mode = p.intent;
  out << "serve: http://localhost:" << inv.port << "/ (websocket /ws), Ctrl-C to stop\n";
  out.flush();
  serve(scn, net, opts);
  return kExitOk;
}

int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::kMissingFile: return kExitMissingFile;
    case ErrorKind::kSchema: return kExitSchema;
    case ErrorKind::kDivergence: return kExitDivergence;
    case ErrorKind::kInfeasible: return kExitInfeasible;
  }
  return kExitOther;
}

const char* label_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::kMissingFile: return "missing file";
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kInfeasible: return "infeasible";
  }
  return "error";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"relative guidance toolkit: dataset generation, training, evaluation, simulation"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  Invocation inv;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", inv.config_path, "config file or a previous run's manifest.json");
    sub->add_option("--out", inv.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", inv.seed, "overrides the config seed");
  };
  CLI::App* gen = app.add_subcommand("gen", "generate the training dataset");
  common(gen);
  CLI::App* trn = app.add_subcommand("train", "train the guidance network");
  common(trn);
  trn->add_option("dataset", inv.inputs, "dataset CSV")->expected(0, 1);
  CLI::App* ev = app.add_subcommand("eval", "cost ratios against the oracle");
  common(ev);
  ev->add_option("files", inv.inputs, "dataset CSV [weights JSON]")->expected(0, 2);
  CLI::App* sim = app.add_subcommand("sim", "batch closed-loop simulation");
  common(sim);
  sim->add_option("files", inv.inputs, "scenario JSON and weights JSON")->expected(0, 2);
  sim->add_flag("--intent", inv.intent, "plan against announced leader intent");
  CLI::App* srv = app.add_subcommand("serve", "live simulation over WebSocket");
  common(srv);
  srv->add_option("files", inv.inputs, "scenario JSON and weights JSON")->expected(0, 2);
  srv->add_flag("--intent", inv.intent, "start with intent mode on");
  srv->add_option("--port", inv.port, "listen port")->capture_default_str();
  srv->add_option("--time-scale", inv.time_scale, "sim seconds per wall second (max 20)")
      ->capture_default_str();
  srv->add_option("--ui", inv.ui_dir, "static UI bundle directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return inv.command = "gen", cmd_gen(inv, out);
    if (trn->parsed()) return inv.command = "train", cmd_train(inv, out);
    if (ev->parsed()) return inv.command = "eval", cmd_eval(inv, out);
    if (sim->parsed()) return inv.command = "sim", cmd_sim(inv, out);
    if (srv->parsed()) return inv.command = "serve", cmd_serve(inv, out);
  } catch (const UsageError& e) {
    err << "relguide: usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "relguide: " << label_for(e.kind()) << ": " << e.what() << "\n";
    return exit_for(e.kind());
  } catch (const json::exception& e) {
    err << "relguide: schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::invalid_argument& e) {
    err << "relguide: schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    err << "relguide: error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitUsage;
}

}  // namespace relguide
