#include "retrotrack/triangulate.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "retrotrack/errors.hpp"

namespace retrotrack {

namespace {

Eigen::Matrix<double, 3, 4> to_eigen(const ProjectionMatrix& p) {
  Eigen::Matrix<double, 3, 4> out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) out(r, c) = p(r, c);
  }
  return out;
}

// Scales P so that its third row applied to (X, 1) yields true signed
// camera depth: divide by sign(det M) * |m3| where M is the left 3x3 block
// and m3 its last row. Makes the reweighting depths metric and the result
// invariant to the overall scale of the input matrices.
Eigen::Matrix<double, 3, 4> canonicalize(Eigen::Matrix<double, 3, 4> p) {
  const Eigen::Matrix3d m = p.leftCols<3>();
  const double det = m.determinant();
  const double row_norm = m.row(2).norm();
  if (!(row_norm > 0.0) || det == 0.0) {
    throw IllConditionedError("projection matrix is rank deficient");
  }
  const double scale = (det > 0.0 ? 1.0 : -1.0) * row_norm;
  return p / scale;
}

}  // namespace

Point3 triangulate(const Pixel& left_px, const Pixel& right_px,
                   const ProjectionMatrix& left, const ProjectionMatrix& right,
                   const TriangulationParams& params) {
  if (params.max_iterations < 1) {
    throw std::invalid_argument("max_iterations must be at least 1");
  }
  if (!(params.weight_tolerance > 0.0)) {
    throw std::invalid_argument("weight_tolerance must be positive");
  }
  const Eigen::Matrix<double, 3, 4> pl = canonicalize(to_eigen(left));
  const Eigen::Matrix<double, 3, 4> pr = canonicalize(to_eigen(right));

  Eigen::Matrix4d a;
  a.row(0) = left_px.u * pl.row(2) - pl.row(0);
  a.row(1) = left_px.v * pl.row(2) - pl.row(1);
  a.row(2) = right_px.u * pr.row(2) - pr.row(0);
  a.row(3) = right_px.v * pr.row(2) - pr.row(1);

  Eigen::Vector4d x = Eigen::Vector4d::Zero();
  double depth_l = 1.0, depth_r = 1.0;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    Eigen::Matrix4d aw = a;
    aw.row(0) /= depth_l;
    aw.row(1) /= depth_l;
    aw.row(2) /= depth_r;
    aw.row(3) /= depth_r;

    Eigen::JacobiSVD<Eigen::Matrix4d> svd(aw, Eigen::ComputeFullV);
    x = svd.matrixV().col(3);
    if (std::abs(x(3)) < 1e-12) {
      throw IllConditionedError("triangulated point is at infinity");
    }
    x /= x(3);

    const double new_l = pl.row(2).dot(x);
    const double new_r = pr.row(2).dot(x);
    if (new_l == 0.0 || new_r == 0.0) {
      throw IllConditionedError("reweighting depth vanished");
    }
    const double change = std::max(std::abs(new_l - depth_l) / std::abs(new_l),
                                   std::abs(new_r - depth_r) / std::abs(new_r));
    depth_l = new_l;
    depth_r = new_r;
    if (change <= params.weight_tolerance) break;
  }
  if (!std::isfinite(x(0)) || !std::isfinite(x(1)) || !std::isfinite(x(2))) {
    throw IllConditionedError("triangulation produced non-finite point");
  }
  return {x(0), x(1), x(2)};
}

}  // namespace retrotrack
