#include "relguide/rdp_generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "relguide/angles.hpp"

namespace relguide {

void validate_grid(const PlanGrid& grid) {
  if (!(grid.delta_theta > 0.0) || grid.n_theta < 1) {
    throw std::invalid_argument("grid: delta_theta must be positive and n_theta >= 1");
  }
  if ((grid.n_theta - 1) * grid.delta_theta > kTwoPi + 1e-12) {
    throw std::invalid_argument("grid: turn angles are capped at 2 pi");
  }
  if (!(grid.delta_len > 0.0) || grid.n_len < 1) {
    throw std::invalid_argument("grid: delta_len must be positive and n_len >= 1");
  }
  if (grid.max_order < 1) throw std::invalid_argument("grid: max_order must be >= 1");
}

bool RegionBox::contains(const RelativeState& s) const {
  if (!enabled) return true;
  return s.dx >= along_min && s.dx <= along_max && std::abs(s.dy) <= cross_max;
}

double RdpConfig::r_min() const { return min_turn_radius(spec.speeds.v_p, phi_max); }

CellIndex cell_of(const RelativeState& s, const CellSize& cell) {
  return CellIndex{std::lround(s.dx / cell.dx), std::lround(s.dy / cell.dy),
                   std::lround(wrap_pi(s.dpsi) / cell.dpsi)};
}

Rewind rewind_triplet(const RelativeState& parent, const PlanTriplet& tr, double r_min,
                      const SpeedPair& speeds) {
  const PlanarPose end = canonical_pose(parent);
  const PlanarPose before_segment = fly_straight(end, -tr.len);
  const PlanarPose start = fly_arc(before_segment, tr.eps, -tr.theta, r_min);
  const double duration = (tr.len + r_min * tr.theta) / speeds.v_p;
  // The leader was duration * v_l further back along its track.
  PlanarPose rel = start;
  rel.x += speeds.v_l * duration;
  return Rewind{from_canonical(rel), duration};
}

bool pair_separation_ok(const RelativeState& start, const PlanTriplet& tr, double r_min,
                        const ConvergenceSpec& spec) {
  if (std::hypot(start.dx, start.dy) < spec.min_separation) return false;
  const PlanarPose pose = canonical_pose(start);
  auto exact = [&] {
    SeparationReport report;
    report.min_distance = std::numeric_limits<double>::infinity();
    return check_triplet_separation(tr, 0, pose, 0.0, r_min, spec, 0.0, report);
  };
  // Walk the arc in steps short enough that the range cannot drop below
  // d_min + margin before the next sample, given the bounded closing speed.
  // Anything closer goes to the exact check, so decisions match it.
  constexpr double kMargin = 1000.0;
  const double v_p = spec.speeds.v_p;
  const double v_l = spec.speeds.v_l;
  const double closing = v_p + v_l;
  const double floor = spec.min_separation + kMargin;
  double a = 0.0;
  while (true) {
    const PlanarPose q = a > 0.0 ? fly_arc(pose, tr.eps, a, r_min) : pose;
    const double d = std::hypot(q.x - v_l * r_min * a / v_p, q.y);
    if (d < floor) return exact();
    if (a >= tr.theta) break;
    const double step = (d - floor) / closing * v_p / r_min;
    a = std::min(tr.theta, a + std::max(step, 1e-6));
  }
  if (tr.len <= 0.0) return true;
  const double t_arc = r_min * tr.theta / v_p;
  SeparationReport report;
  report.min_distance = std::numeric_limits<double>::infinity();
  return check_triplet_separation({tr.eps, 0.0, tr.len}, 0, fly_arc(pose, tr.eps, tr.theta, r_min),
                                  t_arc, r_min, spec, 0.0, report);
}

namespace {

struct Node {
  RelativeState state;
  double time = 0.0;
  std::int32_t parent = -1;
  PlanTriplet triplet;
};

struct CellEntry {
  Node node;
  int level = 0;
  std::int32_t index = -1;  // position in the node table once materialized
};

std::uint64_t pack(const CellIndex& c) {
  constexpr long kBias = 1L << 20;
  auto field = [](long v) {
    return static_cast<std::uint64_t>(std::clamp(v + kBias, 0L, (1L << 21) - 1));
  };
  return (field(c[0]) << 42) | (field(c[1]) << 21) | field(c[2]);
}

ManeuverPlan chain_plan(const std::vector<Node>& nodes, const Node& leaf, double r_min) {
  ManeuverPlan plan;
  plan.r_min = r_min;
  const Node* n = &leaf;
  while (n->parent >= 0) {
    plan.triplets.push_back(n->triplet);
    n = &nodes[static_cast<std::size_t>(n->parent)];
  }
  return plan;
}

bool better(const std::vector<Node>& nodes, const Node& cand, const Node& incumbent,
            double r_min) {
  if (cand.time != incumbent.time) return cand.time < incumbent.time;
  return plan_less(chain_plan(nodes, cand, r_min), chain_plan(nodes, incumbent, r_min));
}

struct ExpandCounters {
  std::size_t region = 0;
  std::size_t separation = 0;
};

void expand_node(const std::vector<Node>& nodes, std::int32_t parent_index, const RdpConfig& cfg,
                 double r_min, std::vector<Node>& out, ExpandCounters& counters) {
  const Node& parent = nodes[static_cast<std::size_t>(parent_index)];
  const PlanGrid& g = cfg.grid;
  for (int k = 0; k < g.n_theta; ++k) {
    for (int eps : {1, -1}) {
      if (k == 0 && eps == -1) continue;  // a zero turn has no direction
      for (int h = 0; h < g.n_len; ++h) {
        if (k == 0 && h == 0) continue;
        const PlanTriplet tr{eps, g.theta(k), g.len(h)};
        const Rewind rw = rewind_triplet(parent.state, tr, r_min, cfg.spec.speeds);
        if (!cfg.region.contains(rw.state)) {
          ++counters.region;
          continue;
        }
        if (!pair_separation_ok(rw.state, tr, r_min, cfg.spec)) {
          ++counters.separation;
          continue;
        }
        out.push_back(Node{rw.state, parent.time + rw.duration, parent_index, tr});
      }
    }
  }
}

}  // namespace

RdpResult generate_tree(const RdpConfig& cfg) {
  validate_grid(cfg.grid);
  validate_spec(cfg.spec);
  const double r_min = cfg.r_min();

  RdpResult result;
  std::vector<Node> nodes;
  std::unordered_map<std::uint64_t, CellEntry> table;
  std::vector<std::uint64_t> order;  // cell keys in first-touch order

  const Node root{RelativeState{-cfg.spec.capture_distance, 0.0, 0.0}, 0.0, -1, PlanTriplet{}};
  nodes.push_back(root);
  const std::uint64_t root_key = pack(cell_of(root.state, cfg.cell));
  table.emplace(root_key, CellEntry{root, 1, 0});
  order.push_back(root_key);

  std::vector<std::int32_t> frontier{0};
  constexpr std::size_t kChunk = 256;

  for (int level = 2; level <= cfg.grid.max_order && !frontier.empty(); ++level) {
    std::size_t candidates = 0;
    std::vector<std::uint64_t> touched;
    for (std::size_t begin = 0; begin < frontier.size(); begin += kChunk) {
      const std::size_t end = std::min(frontier.size(), begin + kChunk);
      const auto count = static_cast<std::ptrdiff_t>(end - begin);
      std::vector<std::vector<Node>> children(static_cast<std::size_t>(count));
      std::vector<ExpandCounters> counters(static_cast<std::size_t>(count));
      if (cfg.exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
          const auto u = static_cast<std::size_t>(i);
          expand_node(nodes, frontier[begin + u], cfg, r_min, children[u], counters[u]);
        }
      } else {
        for (std::ptrdiff_t i = 0; i < count; ++i) {
          const auto u = static_cast<std::size_t>(i);
          expand_node(nodes, frontier[begin + u], cfg, r_min, children[u], counters[u]);
        }
      }
      // Serial merge in frontier order keeps the table independent of scheduling.
      for (std::size_t i = 0; i < children.size(); ++i) {
        result.stats.pruned_region += counters[i].region;
        result.stats.pruned_separation += counters[i].separation;
        candidates += children[i].size();
        for (const Node& c : children[i]) {
          const std::uint64_t key = pack(cell_of(c.state, cfg.cell));
          auto it = table.find(key);
          if (it == table.end()) {
            table.emplace(key, CellEntry{c, level, -1});
            order.push_back(key);
            touched.push_back(key);
          } else if (better(nodes, c, it->second.node, r_min)) {
            if (it->second.level != level) touched.push_back(key);
            it->second = CellEntry{c, level, -1};
          }
        }
      }
    }
    std::vector<std::int32_t> next;
    for (std::uint64_t key : touched) {
      CellEntry& e = table.at(key);
      if (e.level != level || e.index >= 0) continue;
      e.index = static_cast<std::int32_t>(nodes.size());
      nodes.push_back(e.node);
      next.push_back(e.index);
    }
    result.stats.candidates_per_level.push_back(candidates);
    result.stats.winners_per_level.push_back(next.size());
    frontier = std::move(next);
  }

  std::vector<std::int32_t> kept;
  kept.reserve(table.size());
  for (std::uint64_t key : order) {
    const CellEntry& e = table.at(key);
    if (e.index >= 0) kept.push_back(e.index);
  }
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  result.samples.reserve(kept.size());
  for (std::int32_t idx : kept) {
    const Node& n = nodes[static_cast<std::size_t>(idx)];
    result.samples.push_back(
        TrainingSample{n.state, chain_plan(nodes, n, r_min), n.time});
  }
  if (result.samples.size() <= 1 && cfg.grid.max_order > 1) {
    result.stats.diagnostic =
        "no admissible state beyond the root: check the grid, region box and separation";
  }
  return result;
}

double CoverageReport::reach() const {
  return std::max({-min_extent.dx, std::abs(min_extent.dy), std::abs(max_extent.dy)});
}

CoverageReport coverage_report(const std::vector<TrainingSample>& samples, const CellSize& cell) {
  if (samples.empty()) throw std::invalid_argument("coverage_report: empty dataset");
  CoverageReport rep;
  rep.cell = cell;
  rep.min_extent = rep.max_extent = samples.front().state;
  for (const auto& s : samples) {
    ++rep.counts[cell_of(s.state, cell)];
    ++rep.total;
    rep.min_extent.dx = std::min(rep.min_extent.dx, s.state.dx);
    rep.min_extent.dy = std::min(rep.min_extent.dy, s.state.dy);
    rep.min_extent.dpsi = std::min(rep.min_extent.dpsi, s.state.dpsi);
    rep.max_extent.dx = std::max(rep.max_extent.dx, s.state.dx);
    rep.max_extent.dy = std::max(rep.max_extent.dy, s.state.dy);
    rep.max_extent.dpsi = std::max(rep.max_extent.dpsi, s.state.dpsi);
  }
  return rep;
}

}  // namespace relguide
