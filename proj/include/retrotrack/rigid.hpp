#pragma once

#include <array>

#include "retrotrack/detect.hpp"
#include "retrotrack/geometry.hpp"
#include "retrotrack/sim.hpp"
#include "retrotrack/triangulate.hpp"

namespace retrotrack {

// Decides which observed point is which marker by comparing triangle edge
// lengths under all six label permutations (the triangle is scalene by
// construction, so edges identify vertices). Returns perm such that
// points[perm[k]] is marker k of the geometry. Throws
// GeometryAmbiguityError when the two best permutations score within
// ambiguity_margin of each other (sum of squared edge differences, m^2),
// or when the best permutation does not map the longest observed edge onto
// the geometry's longest edge.
std::array<int, 3> match_marker_labels(const std::array<Point3, 3>& points,
                                       const MarkerGeometry& geometry,
                                       double ambiguity_margin = 1e-6);

struct PoseEstimate {
  Pose pose;               // target body frame -> rig frame
  double timestamp = 0.0;
  double fit_rmse_m = 0.0; // residual of the rigid fit
};

// Least-squares rigid registration (SVD of the cross-covariance, proper
// rotation enforced) of the geometry's marker positions onto the observed
// points, which must already be in marker order. Throws
// DegenerateGeometryError when the points do not span a plane.
PoseEstimate register_markers(const std::array<Point3, 3>& observed,
                              const MarkerGeometry& geometry);

struct PipelineParams {
  DetectParams detect;
  TriangulationParams triangulation;
  double geometry_ambiguity_margin = 1e-6;
};

// Full per-frame pipeline: detect features in both frames, match them
// across cameras, triangulate, label against the geometry, and register.
// Failures surface as TrackError tagged with the stage that failed; a
// feature count that cannot yield exactly three matched markers counts as
// a detection failure.
PoseEstimate track_frame_pair(const Frame& left, const Frame& right,
                              const CameraModel& left_camera,
                              const CameraModel& right_camera,
                              const MarkerGeometry& geometry,
                              const PipelineParams& params = {});

}  // namespace retrotrack
