#include "retrotrack/rigid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "retrotrack/correspond.hpp"
#include "retrotrack/errors.hpp"

namespace retrotrack {

namespace {

std::array<double, 3> edge_lengths_of(const std::array<Point3, 3>& pts) {
  return {norm(pts[1] - pts[2]), norm(pts[2] - pts[0]), norm(pts[0] - pts[1])};
}

int argmax3(const std::array<double, 3>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

std::array<int, 3> match_marker_labels(const std::array<Point3, 3>& points,
                                       const MarkerGeometry& geometry,
                                       double ambiguity_margin) {
  if (!(ambiguity_margin > 0.0)) {
    throw std::invalid_argument("ambiguity margin must be positive");
  }
  const std::array<double, 3> want = geometry.edge_lengths();

  static constexpr int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                       {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  double best = std::numeric_limits<double>::infinity();
  double second = best;
  int best_perm = -1;
  for (int p = 0; p < 6; ++p) {
    // Candidate reading: points[kPerms[p][k]] plays marker k.
    const std::array<Point3, 3> cand{points[kPerms[p][0]],
                                     points[kPerms[p][1]],
                                     points[kPerms[p][2]]};
    const std::array<double, 3> have = edge_lengths_of(cand);
    double score = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double d = have[k] - want[k];
      score += d * d;
    }
    if (score < best) {
      second = best;
      best = score;
      best_perm = p;
    } else if (score < second) {
      second = score;
    }
  }
  if (second - best < ambiguity_margin) {
    throw GeometryAmbiguityError(
        "two marker labelings fit the observed triangle about equally well");
  }

  const std::array<int, 3> perm{kPerms[best_perm][0], kPerms[best_perm][1],
                                kPerms[best_perm][2]};
  // Sanity: the winning labeling must put the longest observed edge where
  // the geometry keeps its longest edge. If it does not, the observation is
  // too distorted to trust.
  const std::array<Point3, 3> labeled{points[perm[0]], points[perm[1]],
                                      points[perm[2]]};
  if (argmax3(edge_lengths_of(labeled)) != argmax3(want)) {
    throw GeometryAmbiguityError(
        "observed triangle's longest edge does not align with the geometry");
  }
  return perm;
}

PoseEstimate register_markers(const std::array<Point3, 3>& observed,
                              const MarkerGeometry& geometry) {
  Eigen::Matrix3d model, obs;
  for (int i = 0; i < 3; ++i) {
    const Point3& g = geometry.points()[i];
    const Point3& o = observed[i];
    model.col(i) << g.x, g.y, g.z;
    obs.col(i) << o.x, o.y, o.z;
  }
  const Eigen::Vector3d cm = model.rowwise().mean();
  const Eigen::Vector3d co = obs.rowwise().mean();
  const Eigen::Matrix3d h =
      (model.colwise() - cm) * (obs.colwise() - co).transpose();

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  // Three non-collinear points give a cross-covariance of rank exactly 2;
  // rank below that means the observation collapsed to a line or point.
  if (!(sv(0) > 0.0) || sv(1) < 1e-9 * sv(0)) {
    throw DegenerateGeometryError(
        "observed markers are degenerate (collinear or coincident)");
  }
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() > 0.0
                ? 1.0
                : -1.0;
  const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
  const Eigen::Vector3d t = co - r * cm;

  PoseEstimate est;
  est.pose.rotation = UnitQuaternion::from_rotation_matrix(
      {{{r(0, 0), r(0, 1), r(0, 2)},
        {r(1, 0), r(1, 1), r(1, 2)},
        {r(2, 0), r(2, 1), r(2, 2)}}});
  est.pose.translation = {t(0), t(1), t(2)};

  double ss = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d res = r * model.col(i) + t - obs.col(i);
    ss += res.squaredNorm();
  }
  est.fit_rmse_m = std::sqrt(ss / 3.0);
  return est;
}

PoseEstimate track_frame_pair(const Frame& left, const Frame& right,
                              const CameraModel& left_camera,
                              const CameraModel& right_camera,
                              const MarkerGeometry& geometry,
                              const PipelineParams& params) {
  std::vector<Feature> lfeat, rfeat;
  try {
    lfeat = detect(left, params.detect);
    rfeat = detect(right, params.detect);
  } catch (const Error& e) {
    throw TrackError(PipelineStage::detection, e.what());
  }

  Correspondence corr;
  try {
    corr = match_features(lfeat, rfeat);
  } catch (const Error& e) {
    throw TrackError(PipelineStage::correspondence, e.what());
  }
  if (corr.pairs.size() != 3) {
    // Not a matching defect: one camera simply did not see three markers.
    throw TrackError(PipelineStage::detection,
                     "expected 3 matched markers, got " +
                         std::to_string(corr.pairs.size()));
  }

  const ProjectionMatrix pl = projection_matrix(left_camera);
  const ProjectionMatrix pr = projection_matrix(right_camera);
  std::array<Point3, 3> points;
  try {
    for (int k = 0; k < 3; ++k) {
      points[k] = triangulate(lfeat[corr.pairs[k].first].center,
                              rfeat[corr.pairs[k].second].center, pl, pr,
                              params.triangulation);
    }
  } catch (const Error& e) {
    throw TrackError(PipelineStage::triangulation, e.what());
  }

  std::array<int, 3> perm;
  try {
    perm = match_marker_labels(points, geometry,
                               params.geometry_ambiguity_margin);
  } catch (const Error& e) {
    throw TrackError(PipelineStage::geometry, e.what());
  }

  PoseEstimate est;
  try {
    est = register_markers({points[perm[0]], points[perm[1]], points[perm[2]]},
                           geometry);
  } catch (const Error& e) {
    throw TrackError(PipelineStage::registration, e.what());
  }
  est.timestamp = left.timestamp;
  return est;
}

}  // namespace retrotrack
