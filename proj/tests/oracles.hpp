#pragma once

// Independent reference computations shared by the tests. Nothing here calls
// into the library's geometry; each oracle integrates or samples from first
// principles.

#include <cmath>
#include <random>
#include <vector>

#include "relguide/plan_geometry.hpp"

namespace oracle {

struct Pose {
  double x, y, psi;
};

/// RK4 on x' = v sin psi, y' = v cos psi, psi' = r.
inline Pose integrate(Pose p, double v, double r, double duration, int steps) {
  const double h = duration / steps;
  auto f = [&](const Pose& s) { return Pose{v * std::sin(s.psi), v * std::cos(s.psi), r}; };
  for (int i = 0; i < steps; ++i) {
    const Pose k1 = f(p);
    const Pose k2 = f({p.x + h / 2 * k1.x, p.y + h / 2 * k1.y, p.psi + h / 2 * k1.psi});
    const Pose k3 = f({p.x + h / 2 * k2.x, p.y + h / 2 * k2.y, p.psi + h / 2 * k2.psi});
    const Pose k4 = f({p.x + h * k3.x, p.y + h * k3.y, p.psi + h * k3.psi});
    p.x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    p.y += h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
    p.psi += h / 6 * (k1.psi + 2 * k2.psi + 2 * k3.psi + k4.psi);
  }
  return p;
}

/// Time-stamped pursuer samples along a plan flown at v_p, leader at
/// (x_l0 + v_l t, 0). Plain Euler-free closed form per step of dt seconds.
struct Sample {
  double t, px, py, lx, ly;
};

inline std::vector<Sample> sweep(const relguide::ManeuverPlan& plan, Pose start, double v_p,
                                 double v_l, double x_l0, double dt) {
  std::vector<Sample> out;
  double t = 0.0;
  Pose p = start;
  out.push_back({0.0, p.x, p.y, x_l0, 0.0});
  for (const auto& tr : plan.triplets) {
    const double r = -tr.eps * v_p / plan.r_min;
    for (int pass = 0; pass < 2; ++pass) {
      const double duration = pass == 0 ? plan.r_min * tr.theta / v_p : tr.len / v_p;
      const double rate = pass == 0 ? r : 0.0;
      const int n = static_cast<int>(std::ceil(duration / dt));
      if (n == 0) continue;
      const double h = duration / n;
      for (int i = 0; i < n; ++i) {
        p = integrate(p, v_p, rate, h, 1);
        t += h;
        out.push_back({t, p.x, p.y, x_l0 + v_l * t, 0.0});
      }
    }
  }
  return out;
}

inline double min_distance(const std::vector<Sample>& s) {
  double m = INFINITY;
  for (const auto& q : s) m = std::min(m, std::hypot(q.px - q.lx, q.py - q.ly));
  return m;
}

inline relguide::ManeuverPlan random_plan(std::mt19937_64& rng, int max_triplets, double r_min,
                                          double max_len) {
  std::uniform_int_distribution<int> n(1, max_triplets);
  std::uniform_real_distribution<double> th(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> len(0.0, max_len);
  relguide::ManeuverPlan plan;
  plan.r_min = r_min;
  const int k = n(rng);
  for (int i = 0; i < k; ++i) {
    plan.triplets.push_back({rng() % 2 ? 1 : -1, th(rng), len(rng)});
  }
  return plan;
}

}  // namespace oracle
