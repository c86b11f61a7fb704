#pragma once

// Independent reference computations used by the tests. These deliberately
// avoid the library's analytic code paths: curvature comes from finite
// differences of sampled positions, image sums from naive double loops.

#include <cmath>
#include <vector>

#include "midsim/core/tensor.hpp"
#include "midsim/geom/pose.hpp"

namespace oracles {

using midsim::geom::Vec2;

// Central-difference curvature |x'y'' - y'x''| / speed^3 over uniformly
// time-sampled positions. Endpoints copy neighbors.
inline std::vector<double> fd_curvature(const std::vector<Vec2>& pts,
                                        double dt) {
  const int n = static_cast<int>(pts.size());
  std::vector<double> kappa(n, 0.0);
  for (int i = 1; i + 1 < n; ++i) {
    const double dx = (pts[i + 1].x - pts[i - 1].x) / (2 * dt);
    const double dy = (pts[i + 1].y - pts[i - 1].y) / (2 * dt);
    const double ddx = (pts[i + 1].x - 2 * pts[i].x + pts[i - 1].x) / (dt * dt);
    const double ddy = (pts[i + 1].y - 2 * pts[i].y + pts[i - 1].y) / (dt * dt);
    const double sp2 = dx * dx + dy * dy;
    if (sp2 < 1e-12) continue;
    kappa[i] = std::abs(dx * ddy - dy * ddx) / std::pow(sp2, 1.5);
  }
  if (n >= 3) {
    kappa[0] = kappa[1];
    kappa[n - 1] = kappa[n - 2];
  }
  return kappa;
}

inline double fd_max_curvature(const std::vector<Vec2>& pts, double dt) {
  double best = 0.0;
  for (double k : fd_curvature(pts, dt)) best = std::max(best, k);
  return best;
}

inline std::vector<Vec2> positions(const midsim::geom::Trajectory& traj) {
  std::vector<Vec2> pts;
  pts.reserve(traj.poses.size());
  for (const auto& p : traj.poses) pts.push_back(p.position());
  return pts;
}

// Naive double-loop image sums, the references for the overlap losses.
template <typename T>
double naive_overlap_mean(const midsim::Tensor<T>& b,
                          const midsim::Tensor<T>& mask, bool complement) {
  double acc = 0.0;
  for (int y = 0; y < b.h; ++y)
    for (int x = 0; x < b.w; ++x) {
      const double m = complement ? 1.0 - mask.at(0, y, x) : mask.at(0, y, x);
      acc += static_cast<double>(b.at(0, y, x)) * m;
    }
  return acc / (static_cast<double>(b.h) * b.w);
}

template <typename T>
double naive_bce_mean(const midsim::Tensor<T>& p, const midsim::Tensor<T>& t) {
  double acc = 0.0;
  for (int y = 0; y < p.h; ++y)
    for (int x = 0; x < p.w; ++x) {
      double pc = static_cast<double>(p.at(0, y, x));
      pc = std::min(std::max(pc, 1e-7), 1.0 - 1e-7);
      const double tv = static_cast<double>(t.at(0, y, x));
      acc += -tv * std::log(pc) - (1.0 - tv) * std::log(1.0 - pc);
    }
  return acc / (static_cast<double>(p.h) * p.w);
}

}  // namespace oracles
