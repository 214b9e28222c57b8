#include "retrotrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "retrotrack/errors.hpp"
#include "retrotrack/rng.hpp"

namespace retrotrack {

namespace {

double edge_span(const Point3& a, const Point3& b) { return norm(a - b); }

}  // namespace

MarkerGeometry::MarkerGeometry(const std::array<Point3, 3>& points,
                               double marker_radius_m,
                               double min_edge_difference_m)
    : points_(points), marker_radius_m_(marker_radius_m) {
  if (!(marker_radius_m_ > 0.0)) {
    throw std::invalid_argument("marker radius must be positive");
  }
  const auto e = edge_lengths();
  for (int k = 0; k < 3; ++k) {
    if (!(e[k] > 0.0)) {
      throw std::invalid_argument("marker positions must be distinct");
    }
  }
  // Non-collinear: triangle area well above numerical noise.
  const Point3 ab = points_[1] - points_[0];
  const Point3 ac = points_[2] - points_[0];
  if (!(norm(cross(ab, ac)) > 1e-8)) {
    throw std::invalid_argument("markers are collinear");
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      if (std::abs(e[a] - e[b]) < min_edge_difference_m) {
        throw std::invalid_argument(
            "marker triangle is not scalene enough: edge lengths must "
            "differ pairwise by the minimum margin");
      }
    }
  }
}

std::array<double, 3> MarkerGeometry::edge_lengths() const {
  return {edge_span(points_[1], points_[2]), edge_span(points_[2], points_[0]),
          edge_span(points_[0], points_[1])};
}

MarkerGeometry default_marker_geometry() {
  return MarkerGeometry(
      {Point3{-0.0591, -0.0215, 0.0}, Point3{0.0709, -0.0215, 0.0},
       Point3{-0.0118, 0.0430, 0.0}},
      0.015);
}

TrialTrajectory static_trajectory(double distance_m, double yaw_rad,
                                  double duration_s, double frame_rate_hz) {
  if (!(distance_m > 0.0) || !(duration_s > 0.0) || !(frame_rate_hz > 0.0)) {
    throw std::invalid_argument("static trajectory parameters must be positive");
  }
  TrialTrajectory t;
  t.kind = TrajectoryKind::static_hold;
  t.distance_m = distance_m;
  t.yaw_rad = yaw_rad;
  t.duration_s = duration_s;
  t.frame_rate_hz = frame_rate_hz;
  return t;
}

TrialTrajectory angular_trajectory(double distance_m,
                                   double angular_velocity_rad_s,
                                   double sweep_range_rad,
                                   double frame_rate_hz) {
  if (!(distance_m > 0.0) || !(angular_velocity_rad_s > 0.0) ||
      !(sweep_range_rad > 0.0) || !(frame_rate_hz > 0.0)) {
    throw std::invalid_argument(
        "angular trajectory parameters must be positive");
  }
  TrialTrajectory t;
  t.kind = TrajectoryKind::angular_sweep;
  t.distance_m = distance_m;
  t.angular_velocity_rad_s = angular_velocity_rad_s;
  t.sweep_range_rad = sweep_range_rad;
  t.duration_s = sweep_range_rad / angular_velocity_rad_s;
  t.frame_rate_hz = frame_rate_hz;
  return t;
}

TrialTrajectory linear_trajectory(double velocity_m_s, double start_distance_m,
                                  double end_distance_m,
                                  double frame_rate_hz) {
  if (!(velocity_m_s > 0.0) || !(start_distance_m > 0.0) ||
      !(end_distance_m > start_distance_m) || !(frame_rate_hz > 0.0)) {
    throw std::invalid_argument("linear trajectory parameters must be valid");
  }
  TrialTrajectory t;
  t.kind = TrajectoryKind::linear_retreat;
  t.linear_velocity_m_s = velocity_m_s;
  t.start_distance_m = start_distance_m;
  t.end_distance_m = end_distance_m;
  t.duration_s = (end_distance_m - start_distance_m) / velocity_m_s;
  t.frame_rate_hz = frame_rate_hz;
  return t;
}

Pose rig_pose_at(const TrialTrajectory& traj, double t) {
  // The rig sits on the +z axis of the world (= target body) frame and
  // looks back toward the origin: a yaw of pi about the rig's vertical
  // (camera y) axis, plus the trial's own yaw offset. Yaw composes on the
  // right because it spins the rig about its own axis.
  const UnitQuaternion about_face =
      UnitQuaternion::from_axis_angle({0.0, 1.0, 0.0}, 3.14159265358979323846);
  Pose p;
  switch (traj.kind) {
    case TrajectoryKind::static_hold:
      p.translation = {0.0, 0.0, traj.distance_m};
      p.rotation = about_face * UnitQuaternion::from_axis_angle(
                                    {0.0, 1.0, 0.0}, traj.yaw_rad);
      return p;
    case TrajectoryKind::angular_sweep: {
      const double yaw = -0.5 * traj.sweep_range_rad +
                         traj.angular_velocity_rad_s * t;
      p.translation = {0.0, 0.0, traj.distance_m};
      p.rotation =
          about_face * UnitQuaternion::from_axis_angle({0.0, 1.0, 0.0}, yaw);
      return p;
    }
    case TrajectoryKind::linear_retreat:
      p.translation = {0.0, 0.0,
                       traj.start_distance_m + traj.linear_velocity_m_s * t};
      p.rotation = about_face;
      return p;
  }
  throw std::invalid_argument("unsupported trajectory kind");
}

std::vector<double> sample_times(const TrialTrajectory& traj) {
  if (!(traj.duration_s > 0.0) || !(traj.frame_rate_hz > 0.0)) {
    throw std::invalid_argument("trajectory has no sampling window");
  }
  const long n = std::lround(traj.duration_s * traj.frame_rate_hz);
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) {
    times.push_back(static_cast<double>(k) / traj.frame_rate_hz);
  }
  return times;
}

std::vector<PoseSample> sample_trajectory(const TrialTrajectory& traj) {
  std::vector<PoseSample> out;
  for (double t : sample_times(traj)) {
    out.push_back({t, rig_pose_at(traj, t)});
  }
  return out;
}

std::array<Pixel, 3> exact_feature_centers(const MarkerGeometry& geometry,
                                           const Pose& target_pose,
                                           const Pose& rig_pose,
                                           const CameraModel& camera) {
  const Pose world_to_rig = invert(rig_pose);
  std::array<Pixel, 3> out;
  for (int i = 0; i < 3; ++i) {
    const Point3 world = transform_point(target_pose, geometry.points()[i]);
    out[i] = project(transform_point(world_to_rig, world), camera);
  }
  return out;
}

Frame render_markers(const MarkersFn& markers_at, const PoseFn& rig_pose_at_time,
                     const CameraModel& camera, double timestamp,
                     double exposure_s, const NoiseSpec& noise,
                     std::uint64_t frame_index, int subexposure_samples) {
  if (!(exposure_s > 0.0)) {
    throw std::invalid_argument("exposure must be positive");
  }
  if (subexposure_samples < 1) {
    throw std::invalid_argument("need at least one sub-exposure sample");
  }

  Frame frame;
  frame.width = camera.width;
  frame.height = camera.height;
  frame.timestamp = timestamp;
  frame.intensities.assign(
      static_cast<std::size_t>(camera.width) * camera.height, 0.0);

  const double gain = 1.0 / subexposure_samples;
  const Pose cam_in_rig = camera.extrinsics;

  for (int s = 0; s < subexposure_samples; ++s) {
    const double t =
        timestamp + exposure_s * (s + 0.5) / subexposure_samples;
    const Pose world_to_cam =
        invert(compose(rig_pose_at_time(t), cam_in_rig));
    for (const WorldMarker& m : markers_at(t)) {
      const Point3 c = transform_point(world_to_cam, m.position);
      if (!(c.z > 0.0)) continue;  // behind the camera: renders nothing
      const double u = camera.cx + camera.fx * c.x / c.z;
      const double v = camera.cy + camera.fy * c.y / c.z;
      const double r = camera.fx * m.radius_m / c.z;
      const int x0 = std::max(0, static_cast<int>(std::ceil(u - r)));
      const int x1 = std::min(camera.width - 1,
                              static_cast<int>(std::floor(u + r)));
      const int y0 = std::max(0, static_cast<int>(std::ceil(v - r)));
      const int y1 = std::min(camera.height - 1,
                              static_cast<int>(std::floor(v + r)));
      const double r2 = r * r;
      for (int y = y0; y <= y1; ++y) {
        const double dy = y - v;
        for (int x = x0; x <= x1; ++x) {
          const double dx = x - u;
          if (dx * dx + dy * dy <= r2) frame.at(x, y) += gain;
        }
      }
    }
  }
  for (double& p : frame.intensities) p = std::min(p, 1.0);

  // Spurious reflections: uniform-intensity discs at uniform positions.
  // Their stream is separate from the pixel-noise stream so frames stay
  // comparable across noise settings.
  if (noise.spurious_blob_rate > 0.0) {
    if (!(noise.spurious_blob_radius_max_px >=
          noise.spurious_blob_radius_min_px) ||
        !(noise.spurious_blob_radius_min_px > 0.0)) {
      throw std::invalid_argument("bad spurious blob radius range");
    }
    detail::Rng blob_rng(
        detail::mix_seed(detail::mix_seed(noise.rng_seed, frame_index), 1));
    const int count = blob_rng.poisson(noise.spurious_blob_rate);
    for (int b = 0; b < count; ++b) {
      const double u = blob_rng.uniform(0.0, camera.width);
      const double v = blob_rng.uniform(0.0, camera.height);
      const double r = blob_rng.uniform(noise.spurious_blob_radius_min_px,
                                        noise.spurious_blob_radius_max_px);
      const int x0 = std::max(0, static_cast<int>(std::ceil(u - r)));
      const int x1 = std::min(camera.width - 1,
                              static_cast<int>(std::floor(u + r)));
      const int y0 = std::max(0, static_cast<int>(std::ceil(v - r)));
      const int y1 = std::min(camera.height - 1,
                              static_cast<int>(std::floor(v + r)));
      const double r2 = r * r;
      for (int y = y0; y <= y1; ++y) {
        const double dy = y - v;
        for (int x = x0; x <= x1; ++x) {
          const double dx = x - u;
          if (dx * dx + dy * dy <= r2) frame.at(x, y) = 1.0;
        }
      }
    }
  }

  if (noise.pixel_noise_sigma > 0.0) {
    detail::Rng pixel_rng(
        detail::mix_seed(detail::mix_seed(noise.rng_seed, frame_index), 2));
    const double sigma = noise.pixel_noise_sigma;
    for (double& p : frame.intensities) {
      p = std::clamp(p + sigma * pixel_rng.normal(), 0.0, 1.0);
    }
  }
  return frame;
}

Frame render_markers(const std::vector<WorldMarker>& markers,
                     const PoseFn& rig_pose_at_time, const CameraModel& camera,
                     double timestamp, double exposure_s,
                     const NoiseSpec& noise, std::uint64_t frame_index,
                     int subexposure_samples) {
  return render_markers([&markers](double) { return markers; },
                        rig_pose_at_time, camera, timestamp, exposure_s, noise,
                        frame_index, subexposure_samples);
}

Frame render_frame(const MarkerGeometry& geometry, const PoseFn& target_pose_at,
                   const PoseFn& rig_pose_at_time, const CameraModel& camera,
                   double timestamp, double exposure_s, const NoiseSpec& noise,
                   std::uint64_t frame_index, int subexposure_samples) {
  const double radius = geometry.marker_radius();
  MarkersFn markers_at = [&geometry, &target_pose_at, radius](double t) {
    const Pose target = target_pose_at(t);
    std::vector<WorldMarker> out;
    out.reserve(3);
    for (const Point3& p : geometry.points()) {
      out.push_back({transform_point(target, p), radius});
    }
    return out;
  };
  return render_markers(markers_at, rig_pose_at_time, camera, timestamp,
                        exposure_s, noise, frame_index, subexposure_samples);
}

void write_pgm(const Frame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(frame.width));
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const double v = std::clamp(frame.at(x, y), 0.0, 1.0);
      row[static_cast<std::size_t>(x)] =
          static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

}  // namespace retrotrack
