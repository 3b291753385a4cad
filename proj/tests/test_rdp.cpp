#include <algorithm>
#include <array>
#include <functional>
#include <stdexcept>
#include <vector>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "relguide/angles.hpp"
#include "relguide/errors.hpp"
#include "relguide/rdp_generator.hpp"

using namespace relguide;

namespace {

RdpConfig tiny_config() {
  RdpConfig cfg;
  cfg.grid.delta_theta = kPi / 2;
  cfg.grid.n_theta = 2;
  cfg.grid.delta_len = 5000.0;
  cfg.grid.n_len = 2;
  cfg.grid.max_order = 2;
  cfg.cell = CellSize{10.0, 10.0, 0.001};
  return cfg;
}

RdpConfig small_config() {
  RdpConfig cfg;
  cfg.grid.delta_theta = kPi / 4;
  cfg.grid.n_theta = 8;
  cfg.grid.delta_len = 5000.0;
  cfg.grid.n_len = 5;
  cfg.grid.max_order = 3;
  cfg.cell = CellSize{500.0, 500.0, deg2rad(1.0)};
  return cfg;
}

// Backward single-triplet start state computed by integrating the arc and
// segment in reverse.
RelativeState hand_rewind(const PlanTriplet& tr, const RdpConfig& cfg) {
  const double r_min = cfg.r_min();
  const double v_p = cfg.spec.speeds.v_p, v_l = cfg.spec.speeds.v_l;
  oracle::Pose p{-cfg.spec.capture_distance, 0.0, kPi / 2};
  p = oracle::integrate(p, 1.0, 0.0, -tr.len, 1);
  p = oracle::integrate(p, 1.0, -tr.eps / r_min, -r_min * tr.theta, 4000);
  const double tau = (tr.len + r_min * tr.theta) / v_p;
  return {p.x + v_l * tau, p.y, wrap_pi(p.psi - kPi / 2)};
}

}  // namespace

TEST_CASE("order one dataset is the converged root only") {
  RdpConfig cfg = tiny_config();
  cfg.grid.max_order = 1;
  const RdpResult r = generate_tree(cfg);
  REQUIRE(r.samples.size() == 1);
  CHECK(r.samples[0].state == RelativeState{-cfg.spec.capture_distance, 0.0, 0.0});
  CHECK(r.samples[0].plan.triplets.empty());
  CHECK(r.samples[0].time_to_converge == 0.0);
}

TEST_CASE("order two enumeration matches a hand rewind of every admissible triplet") {
  const RdpConfig cfg = tiny_config();
  // Candidates: straight 5 km; left/right 90 deg with 0 or 5 km segment.
  std::vector<PlanTriplet> expected;
  for (const PlanTriplet tr : {PlanTriplet{1, 0.0, 5000.0}, PlanTriplet{1, kPi / 2, 0.0},
                               PlanTriplet{1, kPi / 2, 5000.0}, PlanTriplet{-1, kPi / 2, 0.0},
                               PlanTriplet{-1, kPi / 2, 5000.0}}) {
    const RelativeState s = hand_rewind(tr, cfg);
    ManeuverPlan plan{{tr}, cfg.r_min()};
    oracle::Pose start{s.dx, s.dy, kPi / 2 + s.dpsi};
    const double d = oracle::min_distance(oracle::sweep(plan, start, cfg.spec.speeds.v_p,
                                                        cfg.spec.speeds.v_l, 0.0, 0.01));
    if (d > cfg.spec.min_separation + 2.0) expected.push_back(tr);
  }
  const RdpResult r = generate_tree(cfg);
  REQUIRE(r.samples.size() == 1 + expected.size());
  CHECK(expected.size() == 5);
  for (std::size_t i = 1; i < r.samples.size(); ++i) {
    const TrainingSample& s = r.samples[i];
    REQUIRE(s.plan.triplets.size() == 1);
    const PlanTriplet tr = s.plan.triplets[0];
    CHECK(std::find(expected.begin(), expected.end(), tr) != expected.end());
    const RelativeState h = hand_rewind(tr, cfg);
    CHECK(s.state.dx == doctest::Approx(h.dx).epsilon(1e-9).scale(1e3));
    CHECK(s.state.dy == doctest::Approx(h.dy).epsilon(1e-9).scale(1e3));
    CHECK(wrap_pi(s.state.dpsi - h.dpsi) == doctest::Approx(0.0).scale(1.0));
    CHECK(s.time_to_converge ==
          doctest::Approx((tr.len + cfg.r_min() * tr.theta) / cfg.spec.speeds.v_p));
  }
}

TEST_CASE("every generated plan converges, keeps separation and matches its time") {
  const RdpConfig cfg = small_config();
  const RdpResult r = generate_tree(cfg);
  CHECK(r.samples.size() > 500);
  for (const auto& s : r.samples) {
    const PlanarPose start = canonical_pose(s.state);
    const ConvergenceResidual res = convergence_residual(s.plan, start, cfg.spec, 0.0);
    CHECK(res.position_norm() < 1e-6);
    CHECK(std::abs(res.psi) < 1e-9);
    CHECK(plan_time(s.plan, cfg.spec.speeds.v_p) ==
          doctest::Approx(s.time_to_converge).epsilon(1e-12));
    CHECK(separation_ok(s.plan, start, cfg.spec, 0.0).ok);
    CHECK(cfg.region.contains(s.state));
  }
}

TEST_CASE("no two samples share a cell") {
  const RdpConfig cfg = small_config();
  const RdpResult r = generate_tree(cfg);
  std::set<CellIndex> cells;
  for (const auto& s : r.samples) cells.insert(cell_of(s.state, cfg.cell));
  CHECK(cells.size() == r.samples.size());
}

TEST_CASE("serial and parallel generation agree exactly") {
  RdpConfig cfg = small_config();
  cfg.exec = Exec::kSerial;
  const RdpResult a = generate_tree(cfg);
  cfg.exec = Exec::kParallel;
  const RdpResult b = generate_tree(cfg);
  CHECK(a.samples == b.samples);
  CHECK(a.stats.pruned_separation == b.stats.pruned_separation);
}

TEST_CASE("dataset is symmetric about the leader track") {
  const RdpConfig cfg = small_config();
  const RdpResult r = generate_tree(cfg);
  std::set<CellIndex> cells;
  for (const auto& s : r.samples) cells.insert(cell_of(s.state, cfg.cell));
  std::size_t mirrored_found = 0;
  for (const auto& s : r.samples) mirrored_found += cells.count(cell_of(mirrored(s.state), cfg.cell));
  CHECK(static_cast<double>(mirrored_found) >= 0.99 * static_cast<double>(r.samples.size()));
}

TEST_CASE("disabled region box only adds samples") {
  RdpConfig cfg = small_config();
  cfg.region.along_max = 0.0;
  const RdpResult boxed = generate_tree(cfg);
  cfg.region.enabled = false;
  const RdpResult open = generate_tree(cfg);
  CHECK(boxed.stats.pruned_region > 0);
  CHECK(open.stats.pruned_region == 0);
  CHECK(open.samples.size() > boxed.samples.size());
}

TEST_CASE("grid validation") {
  PlanGrid g;
  g.delta_theta = deg2rad(15.0);
  g.n_theta = 26;  // 25 * 15 deg exceeds the 360 deg cap
  CHECK_THROWS_AS(validate_grid(g), std::invalid_argument);
  g = PlanGrid{};
  g.delta_len = 0.0;
  CHECK_THROWS_AS(validate_grid(g), std::invalid_argument);
  g = PlanGrid{};
  g.max_order = 0;
  CHECK_THROWS_AS(validate_grid(g), std::invalid_argument);
}

TEST_CASE("dataset round trip is lossless") {
  const RdpConfig cfg = small_config();
  const RdpResult r = generate_tree(cfg);
  const auto path = (std::filesystem::temp_directory_path() / "relguide_rt.csv").string();
  export_dataset(r.samples, path);
  const auto back = import_dataset(path, cfg.r_min());
  CHECK(back == r.samples);
  std::filesystem::remove(path);
}

TEST_CASE("dataset import reports malformed rows") {
  const auto path = (std::filesystem::temp_directory_path() / "relguide_bad.csv").string();
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("dx_m,dy_m,dpsi_rad,time_s,plan\n1,2,3,4,1:0.5:10\n1,2,x,4,\n", f);
    std::fclose(f);
  }
  try {
    import_dataset(path, 1000.0);
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSchema);
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  std::filesystem::remove(path);
  try {
    import_dataset(path, 1000.0);
    FAIL("expected a missing file error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingFile);
  }
}

TEST_CASE("plan field format") {
  const ManeuverPlan p{{{1, 0.5, 100.0}, {-1, 0.25, 0.0}}, 10.0};
  CHECK(parse_plan_field(format_plan_field(p), 10.0) == p);
  CHECK(parse_plan_field("", 10.0).triplets.empty());
  CHECK_THROWS(parse_plan_field("2:0.5:1", 10.0));
  CHECK_THROWS(parse_plan_field("1:0.5", 10.0));
}

TEST_CASE("coverage report") {
  const RdpConfig cfg = small_config();
  const RdpResult r = generate_tree(cfg);
  const CoverageReport c = coverage_report(r.samples, cfg.cell);
  CHECK(c.total == r.samples.size());
  std::size_t sum = 0;
  for (const auto& [cell, n] : c.counts) sum += n;
  CHECK(sum == c.total);
  CHECK(c.reach() >= cfg.spec.capture_distance);
  CHECK_THROWS_AS(coverage_report({}, cfg.cell), std::invalid_argument);
}
