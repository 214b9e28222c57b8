#include "retrotrack/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "retrotrack/errors.hpp"

namespace retrotrack {

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 1e-12)) {
    throw std::invalid_argument("quaternion norm too small to normalize");
  }
  // Skip the division when already unit so that construction from a
  // canonical quaternion reproduces it bit for bit (serialization round
  // trips stay byte-identical).
  if (std::abs(n - 1.0) > 1e-12) {
    w /= n;
    x /= n;
    y /= n;
    z /= n;
  }
  w_ = w;
  x_ = x;
  y_ = y;
  z_ = z;

  // Canonical sign. Exact comparisons are intentional: w_ == 0.0 only
  // happens for 180-degree rotations, where the sign of the axis is the
  // remaining ambiguity.
  bool flip = false;
  if (w_ < 0.0) {
    flip = true;
  } else if (w_ == 0.0) {
    if (x_ < 0.0) {
      flip = true;
    } else if (x_ == 0.0 && y_ < 0.0) {
      flip = true;
    } else if (x_ == 0.0 && y_ == 0.0 && z_ < 0.0) {
      flip = true;
    }
  }
  if (flip) {
    w_ = -w_;
    x_ = -x_;
    y_ = -y_;
    z_ = -z_;
  }
  // Normalize -0.0 so serialized output is stable.
  if (w_ == 0.0) w_ = 0.0;
  if (x_ == 0.0) x_ = 0.0;
  if (y_ == 0.0) y_ = 0.0;
  if (z_ == 0.0) z_ = 0.0;
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Point3& axis,
                                               double angle_rad) {
  const double n = norm(axis);
  if (!(n > 1e-12)) {
    throw std::invalid_argument("axis norm too small");
  }
  const double half = 0.5 * angle_rad;
  const double s = std::sin(half) / n;
  return UnitQuaternion(std::cos(half), s * axis.x, s * axis.y, s * axis.z);
}

UnitQuaternion UnitQuaternion::from_rotation_matrix(
    const std::array<std::array<double, 3>, 3>& r) {
  // Shepperd's method: pick the largest of the four squared components to
  // avoid cancellation.
  const double t = r[0][0] + r[1][1] + r[2][2];
  double w, x, y, z;
  if (t > r[0][0] && t > r[1][1] && t > r[2][2]) {
    const double s = std::sqrt(1.0 + t) * 2.0;
    w = 0.25 * s;
    x = (r[2][1] - r[1][2]) / s;
    y = (r[0][2] - r[2][0]) / s;
    z = (r[1][0] - r[0][1]) / s;
  } else if (r[0][0] > r[1][1] && r[0][0] > r[2][2]) {
    const double s = std::sqrt(1.0 + r[0][0] - r[1][1] - r[2][2]) * 2.0;
    w = (r[2][1] - r[1][2]) / s;
    x = 0.25 * s;
    y = (r[0][1] + r[1][0]) / s;
    z = (r[0][2] + r[2][0]) / s;
  } else if (r[1][1] > r[2][2]) {
    const double s = std::sqrt(1.0 + r[1][1] - r[0][0] - r[2][2]) * 2.0;
    w = (r[0][2] - r[2][0]) / s;
    x = (r[0][1] + r[1][0]) / s;
    y = 0.25 * s;
    z = (r[1][2] + r[2][1]) / s;
  } else {
    const double s = std::sqrt(1.0 + r[2][2] - r[0][0] - r[1][1]) * 2.0;
    w = (r[1][0] - r[0][1]) / s;
    x = (r[0][2] + r[2][0]) / s;
    y = (r[1][2] + r[2][1]) / s;
    z = 0.25 * s;
  }
  return UnitQuaternion(w, x, y, z);
}

UnitQuaternion UnitQuaternion::conjugate() const {
  return UnitQuaternion(w_, -x_, -y_, -z_);
}

UnitQuaternion UnitQuaternion::operator*(const UnitQuaternion& q) const {
  return UnitQuaternion(
      w_ * q.w_ - x_ * q.x_ - y_ * q.y_ - z_ * q.z_,
      w_ * q.x_ + x_ * q.w_ + y_ * q.z_ - z_ * q.y_,
      w_ * q.y_ - x_ * q.z_ + y_ * q.w_ + z_ * q.x_,
      w_ * q.z_ + x_ * q.y_ - y_ * q.x_ + z_ * q.w_);
}

Point3 UnitQuaternion::rotate(const Point3& v) const {
  // v' = v + 2 q_v x (q_v x v + w v)
  const Point3 qv{x_, y_, z_};
  const Point3 t = cross(qv, v) + w_ * v;
  return v + 2.0 * cross(qv, t);
}

std::array<std::array<double, 3>, 3> UnitQuaternion::rotation_matrix() const {
  const double xx = x_ * x_, yy = y_ * y_, zz = z_ * z_;
  const double xy = x_ * y_, xz = x_ * z_, yz = y_ * z_;
  const double wx = w_ * x_, wy = w_ * y_, wz = w_ * z_;
  return {{{1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)},
           {2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)},
           {2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)}}};
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation.rotate(b.translation) + a.translation;
  return out;
}

Pose invert(const Pose& p) {
  Pose out;
  out.rotation = p.rotation.conjugate();
  out.translation = -1.0 * out.rotation.rotate(p.translation);
  return out;
}

Point3 transform_point(const Pose& p, const Point3& v) {
  return p.rotation.rotate(v) + p.translation;
}

CameraModel::CameraModel(double fx_in, double fy_in, double cx_in,
                         double cy_in, int width_in, int height_in,
                         Pose extrinsics_in)
    : fx(fx_in),
      fy(fy_in),
      cx(cx_in),
      cy(cy_in),
      width(width_in),
      height(height_in),
      extrinsics(extrinsics_in) {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw std::invalid_argument("camera focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("camera resolution must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw std::invalid_argument("principal point must lie inside the sensor");
  }
}

double focal_from_hfov(int width_px, double hfov_rad) {
  if (width_px <= 0 || !(hfov_rad > 0.0) || !(hfov_rad < 3.141592653589793)) {
    throw std::invalid_argument("bad field-of-view parameters");
  }
  return (width_px / 2.0) / std::tan(hfov_rad / 2.0);
}

ProjectionMatrix projection_matrix(const CameraModel& cam) {
  // extrinsics maps camera -> rig, so the world-to-camera transform used by
  // the projection is its inverse.
  const Pose rig_to_cam = invert(cam.extrinsics);
  const auto r = rig_to_cam.rotation.rotation_matrix();
  const Point3& t = rig_to_cam.translation;

  ProjectionMatrix p;
  for (int col = 0; col < 3; ++col) {
    p(0, col) = cam.fx * r[0][col] + cam.cx * r[2][col];
    p(1, col) = cam.fy * r[1][col] + cam.cy * r[2][col];
    p(2, col) = r[2][col];
  }
  p(0, 3) = cam.fx * t.x + cam.cx * t.z;
  p(1, 3) = cam.fy * t.y + cam.cy * t.z;
  p(2, 3) = t.z;
  return p;
}

Pixel project(const Point3& rig_point, const CameraModel& cam) {
  const Point3 c = transform_point(invert(cam.extrinsics), rig_point);
  if (!(c.z > 0.0)) {
    throw BehindCameraError("point at non-positive camera depth");
  }
  return {cam.cx + cam.fx * c.x / c.z, cam.cy + cam.fy * c.y / c.z};
}

Pixel apply(const ProjectionMatrix& p, const Point3& q) {
  const double hu = p(0, 0) * q.x + p(0, 1) * q.y + p(0, 2) * q.z + p(0, 3);
  const double hv = p(1, 0) * q.x + p(1, 1) * q.y + p(1, 2) * q.z + p(1, 3);
  const double hw = p(2, 0) * q.x + p(2, 1) * q.y + p(2, 2) * q.z + p(2, 3);
  if (hw == 0.0) {
    throw BehindCameraError("point on the principal plane");
  }
  return {hu / hw, hv / hw};
}

const char* to_string(PipelineStage stage) {
  switch (stage) {
    case PipelineStage::detection:
      return "detection";
    case PipelineStage::correspondence:
      return "correspondence";
    case PipelineStage::triangulation:
      return "triangulation";
    case PipelineStage::geometry:
      return "geometry";
    case PipelineStage::registration:
      return "registration";
  }
  return "unknown";
}

}  // namespace retrotrack
