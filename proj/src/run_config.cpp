#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "relguide/cli.hpp"
#include "relguide/errors.hpp"

namespace relguide {

using nlohmann::json;

namespace {

// Reads fields from one config section and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& parent, const char* name) : name_(name) {
    if (parent.contains(name)) {
      if (!parent.at(name).is_object()) throw schema_error(std::string("config: '") + name + "' must be an object");
      node_ = &parent.at(name);
    }
  }

  template <class T>
  void read(const char* key, T& into) {
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    try {
      into = node_->at(key).get<T>();
    } catch (const json::exception&) {
      throw schema_error("config: " + name_ + "." + key + " has the wrong type");
    }
  }

  void finish() const {
    if (!node_) return;
    for (auto it = node_->begin(); it != node_->end(); ++it) {
      if (!seen_.count(it.key())) throw schema_error("config: unknown key " + name_ + "." + it.key());
    }
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw schema_error(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw schema_error("config: top level must be an object");
  static const std::set<std::string> kSections{"aircraft", "convergence", "grid", "cell", "region",
                                               "training", "evaluation", "seed", "parallel"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kSections.count(it.key())) throw schema_error("config: unknown section '" + it.key() + "'");
  }

  RunConfig cfg;
  RdpConfig& r = cfg.rdp;

  Section air(j, "aircraft");
  air.read("leader_speed_mps", r.spec.speeds.v_l);
  air.read("pursuer_speed_mps", r.spec.speeds.v_p);
  air.read("phi_max_rad", r.phi_max);
  air.finish();

  Section conv(j, "convergence");
  conv.read("capture_distance_m", r.spec.capture_distance);
  conv.read("min_separation_m", r.spec.min_separation);
  conv.finish();

  Section grid(j, "grid");
  grid.read("delta_theta_rad", r.grid.delta_theta);
  grid.read("n_theta", r.grid.n_theta);
  grid.read("delta_len_m", r.grid.delta_len);
  grid.read("n_len", r.grid.n_len);
  grid.read("max_order", r.grid.max_order);
  grid.finish();

  Section cell(j, "cell");
  cell.read("dx_m", r.cell.dx);
  cell.read("dy_m", r.cell.dy);
  cell.read("dpsi_rad", r.cell.dpsi);
  cell.finish();

  Section region(j, "region");
  region.read("along_min_m", r.region.along_min);
  region.read("along_max_m", r.region.along_max);
  region.read("cross_max_m", r.region.cross_max);
  region.read("enabled", r.region.enabled);
  region.finish();

  Section tr(j, "training");
  tr.read("hidden", cfg.train.hidden);
  tr.read("learning_rate", cfg.train.learning_rate);
  std::string optimizer = cfg.train.optimizer == Optimizer::kAdam ? "adam" : "momentum";
  tr.read("optimizer", optimizer);
  if (optimizer == "adam") {
    cfg.train.optimizer = Optimizer::kAdam;
  } else if (optimizer == "momentum") {
    cfg.train.optimizer = Optimizer::kMomentum;
  } else {
    throw schema_error("config: training.optimizer must be 'adam' or 'momentum'");
  }
  tr.read("momentum", cfg.train.momentum);
  tr.read("beta2", cfg.train.beta2);
  tr.read("final_lr_fraction", cfg.train.final_lr_fraction);
  tr.read("epochs", cfg.train.epochs);
  tr.read("batch_size", cfg.train.batch_size);
  tr.read("validation_split", cfg.train.validation_split);
  tr.finish();

  Section ev(j, "evaluation");
  ev.read("position_tolerance_m", cfg.eval.position_tolerance);
  ev.read("heading_tolerance_rad", cfg.eval.heading_tolerance);
  ev.read("ratio_bound", cfg.eval.ratio_bound);
  ev.read("max_states", cfg.eval.max_states);
  ev.finish();

  try {
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("parallel")) cfg.parallel = j.at("parallel").get<bool>();
  } catch (const json::exception&) {
    throw schema_error("config: seed must be an unsigned integer and parallel a boolean");
  }

  try {
    validate_grid(r.grid);
    validate_spec(r.spec);
  } catch (const std::invalid_argument& e) {
    throw schema_error(std::string("config: ") + e.what());
  }
  if (!(r.phi_max > 0.0 && r.phi_max < 1.5)) throw schema_error("config: phi_max_rad out of range");
  if (!(r.cell.dx > 0.0 && r.cell.dy > 0.0 && r.cell.dpsi > 0.0)) {
    throw schema_error("config: cell sizes must be positive");
  }
  if (cfg.train.epochs < 0 || cfg.train.batch_size < 1 || !(cfg.train.learning_rate > 0.0) ||
      cfg.train.validation_split < 0.0 || cfg.train.validation_split >= 1.0) {
    throw schema_error("config: training values out of range");
  }
  for (int h : cfg.train.hidden) {
    if (h < 1) throw schema_error("config: hidden layer sizes must be positive");
  }
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
  const RdpConfig& r = cfg.rdp;
  json j = {
      {"aircraft",
       {{"leader_speed_mps", r.spec.speeds.v_l},
        {"pursuer_speed_mps", r.spec.speeds.v_p},
        {"phi_max_rad", r.phi_max}}},
      {"convergence",
       {{"capture_distance_m", r.spec.capture_distance},
        {"min_separation_m", r.spec.min_separation}}},
      {"grid",
       {{"delta_theta_rad", r.grid.delta_theta},
        {"n_theta", r.grid.n_theta},
        {"delta_len_m", r.grid.delta_len},
        {"n_len", r.grid.n_len},
        {"max_order", r.grid.max_order}}},
      {"cell", {{"dx_m", r.cell.dx}, {"dy_m", r.cell.dy}, {"dpsi_rad", r.cell.dpsi}}},
      {"region",
       {{"along_min_m", r.region.along_min},
        {"along_max_m", r.region.along_max},
        {"cross_max_m", r.region.cross_max},
        {"enabled", r.region.enabled}}},
      {"training",
       {{"hidden", cfg.train.hidden},
        {"learning_rate", cfg.train.learning_rate},
        {"optimizer", cfg.train.optimizer == Optimizer::kAdam ? "adam" : "momentum"},
        {"momentum", cfg.train.momentum},
        {"beta2", cfg.train.beta2},
        {"final_lr_fraction", cfg.train.final_lr_fraction},
        {"epochs", cfg.train.epochs},
        {"batch_size", cfg.train.batch_size},
        {"validation_split", cfg.train.validation_split}}},
      {"evaluation",
       {{"position_tolerance_m", cfg.eval.position_tolerance},
        {"heading_tolerance_rad", cfg.eval.heading_tolerance},
        {"ratio_bound", cfg.eval.ratio_bound},
        {"max_states", cfg.eval.max_states}}},
      {"seed", cfg.seed},
      {"parallel", cfg.parallel},
  };
  return j.dump(2);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw missing_file(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw schema_error(path + ": " + e.what());
  }
  if (j.is_object() && j.contains("resolved_config")) {
    return run_config_from_json(j.at("resolved_config").dump());
  }
  return run_config_from_json(buf.str());
}

}  // namespace relguide
