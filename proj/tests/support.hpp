#pragma once

// Small brute-force oracles shared by the test binaries. Everything here is
// deliberately naive: the point is to be obviously correct, not fast.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "retrotrack/correspond.hpp"
#include "retrotrack/geometry.hpp"
#include "retrotrack/rng.hpp"
#include "retrotrack/sim.hpp"

namespace testsupport {

// Random target pose (in the camera frame) whose three markers are all
// comfortably visible: projected radii inside [min_r_px, max_r_px], centers
// clear of the borders, pairwise separation over four radii. Rejection
// sampling; throws after too many attempts.
struct PosedTarget {
  retrotrack::Pose pose;  // target body -> camera frame
  std::array<retrotrack::Pixel, 3> centers;
  std::array<double, 3> radii_px;
};

inline PosedTarget random_visible_target(retrotrack::detail::Rng& rng,
                                         const retrotrack::MarkerGeometry& g,
                                         const retrotrack::CameraModel& cam,
                                         double min_r_px = 2.2,
                                         double max_r_px = 45.0) {
  const double z_near = cam.fx * g.marker_radius() / max_r_px;
  const double z_far = cam.fx * g.marker_radius() / min_r_px;
  for (int attempt = 0; attempt < 20000; ++attempt) {
    retrotrack::Pose pose;
    const double zc = rng.uniform(z_near, z_far);
    pose.translation = {rng.uniform(-0.35, 0.35) * zc,
                        rng.uniform(-0.25, 0.25) * zc, zc};
    const double ax = rng.normal(), ay = rng.normal(), az = rng.normal();
    const double an = std::sqrt(ax * ax + ay * ay + az * az);
    if (an < 1e-9) continue;
    pose.rotation = retrotrack::UnitQuaternion::from_axis_angle(
        {ax / an, ay / an, az / an}, rng.uniform(0.0, 1.0));

    PosedTarget out;
    out.pose = pose;
    bool ok = true;
    double max_r = 0.0;
    for (int i = 0; i < 3 && ok; ++i) {
      const retrotrack::Point3 c =
          retrotrack::transform_point(pose, g.points()[i]);
      if (c.z < 0.9 * z_near) {
        ok = false;
        break;
      }
      out.centers[i] = retrotrack::project(c, cam);
      out.radii_px[i] = cam.fx * g.marker_radius() / c.z;
      max_r = std::max(max_r, out.radii_px[i]);
      if (out.radii_px[i] < min_r_px || out.radii_px[i] > max_r_px) ok = false;
      const double margin = out.radii_px[i] + 3.0;
      if (out.centers[i].u < margin || out.centers[i].u > cam.width - 1 - margin ||
          out.centers[i].v < margin || out.centers[i].v > cam.height - 1 - margin)
        ok = false;
    }
    if (!ok) continue;
    for (int i = 0; i < 3 && ok; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        const double du = out.centers[i].u - out.centers[j].u;
        const double dv = out.centers[i].v - out.centers[j].v;
        if (std::hypot(du, dv) <= 4.0 * max_r + 2.0) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return out;
  }
  throw std::runtime_error("random_visible_target: rejection sampling stuck");
}

// Minimum-cost full assignment between two feature sets, by trying every
// injection of the smaller side into the larger (sides capped at ~7).
// Returns pairs (i, j) sorted by i, and the total cost.
struct AssignmentResult {
  std::vector<std::pair<int, int>> pairs;
  double cost = std::numeric_limits<double>::infinity();
};

inline AssignmentResult brute_force_assignment(
    const std::vector<std::vector<double>>& cost) {
  const int m = static_cast<int>(cost.size());
  const int n = m > 0 ? static_cast<int>(cost[0].size()) : 0;
  AssignmentResult best;
  if (m == 0 || n == 0) {
    best.cost = 0.0;
    return best;
  }
  if (m <= n) {
    std::vector<int> cols(n);
    std::iota(cols.begin(), cols.end(), 0);
    std::sort(cols.begin(), cols.end());
    do {
      double total = 0.0;
      for (int i = 0; i < m; ++i) total += cost[i][cols[i]];
      if (total < best.cost) {
        best.cost = total;
        best.pairs.clear();
        for (int i = 0; i < m; ++i) best.pairs.emplace_back(i, cols[i]);
      }
    } while (std::next_permutation(cols.begin(), cols.end()));
  } else {
    std::vector<int> rows(m);
    std::iota(rows.begin(), rows.end(), 0);
    do {
      double total = 0.0;
      for (int j = 0; j < n; ++j) total += cost[rows[j]][j];
      if (total < best.cost) {
        best.cost = total;
        best.pairs.clear();
        for (int j = 0; j < n; ++j) best.pairs.emplace_back(rows[j], j);
        std::sort(best.pairs.begin(), best.pairs.end());
      }
    } while (std::next_permutation(rows.begin(), rows.end()));
  }
  return best;
}

// Exact smallest enclosing circle of 2D points, O(n^3) over boundary pairs
// and triples.
struct Circle {
  double cx = 0.0, cy = 0.0, r = 0.0;
};

inline bool circle_contains(const Circle& c, double x, double y) {
  const double dx = x - c.cx, dy = y - c.cy;
  return dx * dx + dy * dy <= c.r * c.r * (1.0 + 1e-12) + 1e-12;
}

inline std::optional<Circle> circum_circle(double ax, double ay, double bx,
                                           double by, double cx, double cy) {
  const double d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
  if (std::abs(d) < 1e-12) return std::nullopt;
  const double a2 = ax * ax + ay * ay;
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  Circle out;
  out.cx = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
  out.cy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
  out.r = std::hypot(ax - out.cx, ay - out.cy);
  return out;
}

inline Circle min_enclosing_circle(const std::vector<retrotrack::Pixel>& pts) {
  const int n = static_cast<int>(pts.size());
  Circle best;
  best.r = std::numeric_limits<double>::infinity();
  auto consider = [&](const Circle& c) {
    if (c.r >= best.r) return;
    for (const auto& p : pts) {
      if (!circle_contains(c, p.u, p.v)) return;
    }
    best = c;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Circle c;
      c.cx = (pts[i].u + pts[j].u) / 2.0;
      c.cy = (pts[i].v + pts[j].v) / 2.0;
      c.r = std::hypot(pts[i].u - pts[j].u, pts[i].v - pts[j].v) / 2.0;
      consider(c);
      for (int k = j + 1; k < n; ++k) {
        const auto cc =
            circum_circle(pts[i].u, pts[i].v, pts[j].u, pts[j].v, pts[k].u,
                          pts[k].v);
        if (cc) consider(*cc);
      }
    }
  }
  return best;
}

}  // namespace testsupport
