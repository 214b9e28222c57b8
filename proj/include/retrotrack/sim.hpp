#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "retrotrack/geometry.hpp"

namespace retrotrack {

// Grayscale frame, intensities in [0, 1], row-major.
struct Frame {
  int width = 0;
  int height = 0;
  double timestamp = 0.0;
  std::vector<double> intensities;

  double at(int x, int y) const { return intensities[y * width + x]; }
  double& at(int x, int y) { return intensities[y * width + x]; }
};

// Three retroreflective markers rigidly mounted on a plate, coordinates in
// the target body frame (meters). The triangle must be scalene: marker
// identity is recovered from edge lengths alone, so every pair of edges has
// to differ by at least min_edge_difference_m.
class MarkerGeometry {
 public:
  MarkerGeometry(const std::array<Point3, 3>& points, double marker_radius_m,
                 double min_edge_difference_m = 0.005);

  const std::array<Point3, 3>& points() const { return points_; }
  double marker_radius() const { return marker_radius_m_; }

  // Edge k is the one opposite vertex k: |points[k+1] - points[k+2]| mod 3.
  std::array<double, 3> edge_lengths() const;

 private:
  std::array<Point3, 3> points_;
  double marker_radius_m_;
};

// Built-in target plate: scalene triangle with edges 13 / 10.5 / 8 cm,
// centered on its centroid, markers of 15 mm radius.
MarkerGeometry default_marker_geometry();

struct NoiseSpec {
  double pixel_noise_sigma = 0.0;       // additive Gaussian, intensity units
  double spurious_blob_rate = 0.0;      // expected spurious blobs per frame
  double spurious_blob_radius_min_px = 1.0;
  double spurious_blob_radius_max_px = 3.0;
  std::uint64_t rng_seed = 0;
};

enum class TrajectoryKind { static_hold, angular_sweep, linear_retreat };

// One benchmark trial's rig motion. The target sits at the world origin;
// the rig starts on the +z axis looking back at it.
struct TrialTrajectory {
  TrajectoryKind kind = TrajectoryKind::static_hold;
  double distance_m = 1.0;           // static + angular
  double yaw_rad = 0.0;              // static
  double angular_velocity_rad_s = 0; // angular
  double sweep_range_rad = 0.0;      // angular, total range centered on 0
  double linear_velocity_m_s = 0.0;  // linear
  double start_distance_m = 0.0;     // linear
  double end_distance_m = 0.0;       // linear
  double duration_s = 0.0;
  double frame_rate_hz = 30.0;
};

TrialTrajectory static_trajectory(double distance_m, double yaw_rad,
                                  double duration_s, double frame_rate_hz);
TrialTrajectory angular_trajectory(double distance_m,
                                   double angular_velocity_rad_s,
                                   double sweep_range_rad,
                                   double frame_rate_hz);
TrialTrajectory linear_trajectory(double velocity_m_s, double start_distance_m,
                                  double end_distance_m, double frame_rate_hz);

// Rig pose in the world frame at time t (continuous in t; t may fall
// anywhere in [0, duration], including mid-exposure instants).
Pose rig_pose_at(const TrialTrajectory& traj, double t);

// Frame-start timestamps: k / frame_rate for k = 0 .. round(duration*rate)-1.
std::vector<double> sample_times(const TrialTrajectory& traj);

// (timestamp, rig pose) at each sample time.
std::vector<PoseSample> sample_trajectory(const TrialTrajectory& traj);

using PoseFn = std::function<Pose(double)>;

// Continuous projections of the three marker centers, geometry order.
// Throws BehindCameraError if any marker has non-positive depth.
std::array<Pixel, 3> exact_feature_centers(const MarkerGeometry& geometry,
                                           const Pose& target_pose,
                                           const Pose& rig_pose,
                                           const CameraModel& camera);

// One sphere to rasterize: world-frame center and physical radius.
struct WorldMarker {
  Point3 position;
  double radius_m;
};

// Renders markers as filled unit-intensity discs. A pixel is covered by a
// disc at a sub-exposure instant iff its integer-coordinate center lies
// within the projected radius fx*radius_m/depth of the projected center;
// the subexposure_samples instants are the midpoints of equal slices of
// [timestamp, timestamp+exposure] and their rasterizations are averaged,
// which is what turns motion into blur. Markers behind the camera simply
// do not render. Gaussian pixel noise and Poisson spurious blobs are then
// applied per `noise`, with final intensities clamped to [0, 1]. The output
// depends only on the inputs and mix_seed(noise.rng_seed, frame_index).
Frame render_markers(const std::vector<WorldMarker>& markers,
                     const PoseFn& rig_pose_at_time, const CameraModel& camera,
                     double timestamp, double exposure_s,
                     const NoiseSpec& noise, std::uint64_t frame_index = 0,
                     int subexposure_samples = 8);

// Fully general variant: the marker set itself is a function of time, for
// scenes where the target moves during the exposure window.
using MarkersFn = std::function<std::vector<WorldMarker>(double)>;
Frame render_markers(const MarkersFn& markers_at, const PoseFn& rig_pose_at_time,
                     const CameraModel& camera, double timestamp,
                     double exposure_s, const NoiseSpec& noise,
                     std::uint64_t frame_index = 0,
                     int subexposure_samples = 8);

// Standard entry point: the target carries `geometry`, posed by
// target_pose_at; both poses are functions of time so either side may move.
Frame render_frame(const MarkerGeometry& geometry, const PoseFn& target_pose_at,
                   const PoseFn& rig_pose_at_time, const CameraModel& camera,
                   double timestamp, double exposure_s, const NoiseSpec& noise,
                   std::uint64_t frame_index = 0, int subexposure_samples = 8);

// Binary 8-bit PGM (P5), 255 = intensity 1.0.
void write_pgm(const Frame& frame, const std::string& path);

}  // namespace retrotrack
