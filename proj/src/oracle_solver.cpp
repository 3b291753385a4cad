#include "relguide/oracle_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "relguide/angles.hpp"

namespace relguide {

double OracleConfig::r_min() const { return min_turn_radius(spec.speeds.v_p, phi_max); }

OracleConfig oracle_config_from(const RdpConfig& rdp) {
  OracleConfig cfg;
  cfg.grid = rdp.grid;
  cfg.spec = rdp.spec;
  cfg.phi_max = rdp.phi_max;
  return cfg;
}

Rewind advance_triplet(const RelativeState& start, const PlanTriplet& tr, double r_min,
                       const SpeedPair& speeds) {
  PlanarPose p = fly_straight(fly_arc(canonical_pose(start), tr.eps, tr.theta, r_min), tr.len);
  const double duration = (tr.len + r_min * tr.theta) / speeds.v_p;
  p.x -= speeds.v_l * duration;
  return Rewind{from_canonical(p), duration};
}

namespace {

class Search {
 public:
  explicit Search(const OracleConfig& cfg)
      : cfg_(cfg),
        grid_(cfg.grid),
        r_min_(cfg.r_min()),
        alpha_(cfg.spec.speeds.ratio()),
        max_triplets_(cfg.grid.max_order - 1) {}

  OracleResult run() {
    const RelativeState& s = cfg_.start;
    if (closes(s)) {
      const ManeuverPlan empty{{}, r_min_};
      if (separation_ok(empty, canonical_pose(s), cfg_.spec, 0.0).ok) {
        result_.feasible = true;
        result_.plan = empty;
        result_.cost = 0.0;
        return result_;
      }
    }
    if (max_triplets_ > 0) descend(s, 0.0);
    return result_;
  }

 private:
  bool closes(const RelativeState& s) const {
    return std::abs(s.dx + cfg_.spec.capture_distance) <= cfg_.position_tolerance &&
           std::abs(s.dy) <= cfg_.position_tolerance &&
           std::abs(wrap_pi(s.dpsi)) <= cfg_.heading_tolerance;
  }

  bool beats(double cost, const ManeuverPlan& plan) const {
    if (!result_.feasible) return true;
    const double tol = 1e-9 * std::max(1.0, result_.cost);
    if (cost < result_.cost - tol) return true;
    if (cost > result_.cost + tol) return false;
    return plan_less(plan, result_.plan);
  }

  double bound() const {
    if (!result_.feasible) return std::numeric_limits<double>::infinity();
    return result_.cost + 1e-9 * std::max(1.0, result_.cost);
  }

  void try_close(const RelativeState& s, double cost) {
    for (int eps : {-1, 1}) {
      const double needed = wrap_two_pi(eps * s.dpsi);
      long k = std::lround(needed / grid_.delta_theta);
      const double snapped = k * grid_.delta_theta;
      if (std::abs(needed - kTwoPi) <= cfg_.heading_tolerance ||
          std::abs(snapped - kTwoPi) <= cfg_.heading_tolerance) {
        k = 0;  // a full turn closes the heading like no turn at all
      } else if (std::abs(needed - snapped) > cfg_.heading_tolerance) {
        continue;
      }
      if (k >= grid_.n_theta) continue;
      if (k == 0 && eps == -1) continue;
      const double theta = grid_.theta(static_cast<int>(k));
      if (cost + r_min_ * theta > bound()) continue;
      const PlanTriplet arc_only{eps, theta, 0.0};
      const RelativeState after_arc = advance_triplet(s, arc_only, r_min_, cfg_.spec.speeds).state;
      if (std::abs(after_arc.dy) > cfg_.position_tolerance) continue;

      long h = 0;
      if (std::abs(1.0 - alpha_) > 1e-12) {
        const double len = (-cfg_.spec.capture_distance - after_arc.dx) / (1.0 - alpha_);
        h = std::lround(len / grid_.delta_len);
      }
      if (h < 0 || h >= grid_.n_len) continue;
      if (k == 0 && h == 0) continue;  // no-op triplet; the shorter plan covers it
      const PlanTriplet last{eps, theta, grid_.len(static_cast<int>(h))};
      ++result_.closures_tested;
      const RelativeState end = advance_triplet(s, last, r_min_, cfg_.spec.speeds).state;
      if (!closes(end)) continue;
      const double total = cost + last.len + r_min_ * last.theta;
      prefix_.push_back(last);
      const ManeuverPlan plan{prefix_, r_min_};
      prefix_.pop_back();
      if (!beats(total, plan)) continue;
      if (!separation_ok(plan, canonical_pose(cfg_.start), cfg_.spec, 0.0).ok) continue;
      result_.feasible = true;
      result_.plan = plan;
      result_.cost = total;
    }
  }

  void descend(const RelativeState& s, double cost) {
    const int used = static_cast<int>(prefix_.size());
    try_close(s, cost);
    if (used + 1 >= max_triplets_) return;
    for (int eps : {-1, 1}) {
      for (int k = 0; k < grid_.n_theta; ++k) {
        if (k == 0 && eps == -1) continue;
        const double arc_cost = r_min_ * grid_.theta(k);
        if (cost + arc_cost > bound()) break;
        for (int h = 0; h < grid_.n_len; ++h) {
          if (k == 0 && h == 0) continue;
          const PlanTriplet tr{eps, grid_.theta(k), grid_.len(h)};
          const double step = tr.len + arc_cost;
          if (cost + step > bound()) break;
          const RelativeState next = advance_triplet(s, tr, r_min_, cfg_.spec.speeds).state;
          prefix_.push_back(tr);
          descend(next, cost + step);
          prefix_.pop_back();
        }
      }
    }
  }

  const OracleConfig& cfg_;
  const PlanGrid& grid_;
  double r_min_;
  double alpha_;
  int max_triplets_;
  std::vector<PlanTriplet> prefix_;
  OracleResult result_;
};

double quantile(std::vector<double> sorted_values, double q) {
  if (sorted_values.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted_values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(sorted_values.size() - 1, lo + 1);
  const double w = pos - static_cast<double>(lo);
  return sorted_values[lo] * (1.0 - w) + sorted_values[hi] * w;
}

}  // namespace

OracleResult best_plan(const OracleConfig& cfg) {
  validate_grid(cfg.grid);
  validate_spec(cfg.spec);
  if (cfg.grid.max_order > kOracleMaxOrder) {
    throw std::invalid_argument("oracle: max_order is limited to 4");
  }
  Search search(cfg);
  return search.run();
}

std::vector<std::optional<double>> oracle_costs(const std::vector<RelativeState>& states,
                                                const OracleConfig& cfg, Exec exec) {
  std::vector<std::optional<double>> out(states.size());
  const auto n = static_cast<std::ptrdiff_t>(states.size());
  auto solve = [&](std::ptrdiff_t i) {
    OracleConfig c = cfg;
    c.start = states[static_cast<std::size_t>(i)];
    const OracleResult r = best_plan(c);
    if (r.feasible) out[static_cast<std::size_t>(i)] = r.cost;
  };
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) solve(i);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) solve(i);
  }
  return out;
}

CostRatioStats cost_ratios(const std::vector<double>& plan_costs,
                           const std::vector<std::optional<double>>& oracle) {
  if (plan_costs.size() != oracle.size()) throw std::invalid_argument("cost_ratios: size mismatch");
  CostRatioStats st;
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    if (!oracle[i]) {
      ++st.infeasible;
      continue;
    }
    const double o = *oracle[i];
    double ratio;
    if (o > 0.0) {
      ratio = plan_costs[i] / o;
    } else {
      ratio = plan_costs[i] == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    st.ratios.push_back(ratio);
  }
  st.evaluated = st.ratios.size();
  if (st.evaluated == 0) return st;
  std::vector<double> sorted = st.ratios;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double r : sorted) sum += r;
  st.mean = sum / static_cast<double>(sorted.size());
  st.min = sorted.front();
  st.max = sorted.back();
  st.p50 = quantile(sorted, 0.5);
  st.p90 = quantile(sorted, 0.9);
  st.p99 = quantile(sorted, 0.99);
  return st;
}

CostRatioStats evaluate_against(const std::vector<TrainingSample>& samples,
                                const OracleConfig& cfg, Exec exec) {
  std::vector<RelativeState> states;
  std::vector<double> costs;
  states.reserve(samples.size());
  costs.reserve(samples.size());
  for (const auto& s : samples) {
    states.push_back(s.state);
    costs.push_back(plan_cost(s.plan));
  }
  return cost_ratios(costs, oracle_costs(states, cfg, exec));
}

}  // namespace relguide
