#pragma once

#include <array>
#include <cmath>

namespace retrotrack {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Point3 operator+(const Point3& a, const Point3& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline Point3 operator-(const Point3& a, const Point3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline Point3 operator*(double s, const Point3& p) {
  return {s * p.x, s * p.y, s * p.z};
}
inline double dot(const Point3& a, const Point3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
inline Point3 cross(const Point3& a, const Point3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Point3& p) { return std::sqrt(dot(p, p)); }

// Image-plane position in pixels. u grows right, v grows down.
struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

inline double distance(const Pixel& a, const Pixel& b) {
  return std::hypot(a.u - b.u, a.v - b.v);
}

// Unit quaternion in a canonical sign: w >= 0, and if w == 0 the first
// nonzero of (x, y, z) is positive. q and -q encode the same rotation, so
// forcing one representative makes serialized poses reproducible and keeps
// comparisons trivial.
class UnitQuaternion {
 public:
  UnitQuaternion() : w_(1.0), x_(0.0), y_(0.0), z_(0.0) {}

  // Normalizes and canonicalizes. Throws std::invalid_argument on a
  // (near-)zero input norm.
  UnitQuaternion(double w, double x, double y, double z);

  static UnitQuaternion from_axis_angle(const Point3& axis, double angle_rad);
  static UnitQuaternion from_rotation_matrix(
      const std::array<std::array<double, 3>, 3>& r);

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  UnitQuaternion conjugate() const;
  UnitQuaternion operator*(const UnitQuaternion& rhs) const;
  Point3 rotate(const Point3& v) const;
  std::array<std::array<double, 3>, 3> rotation_matrix() const;

  double dot(const UnitQuaternion& rhs) const {
    return w_ * rhs.w_ + x_ * rhs.x_ + y_ * rhs.y_ + z_ * rhs.z_;
  }

 private:
  double w_, x_, y_, z_;
};

// Rigid transform: p_out = rotation * p_in + translation.
struct Pose {
  Point3 translation;
  UnitQuaternion rotation;
};

// compose(a, b) applies b first, then a.
Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& p);
Point3 transform_point(const Pose& p, const Point3& v);

// A pose stamped with acquisition time, seconds.
struct PoseSample {
  double timestamp = 0.0;
  Pose pose;
};

// Pinhole camera. extrinsics is the camera's pose expressed in the rig
// frame (identity for the camera that defines the rig frame). Camera looks
// along +z, x right, y down.
struct CameraModel {
  double fx;
  double fy;
  double cx;
  double cy;
  int width;
  int height;
  Pose extrinsics;

  CameraModel(double fx, double fy, double cx, double cy, int width,
              int height, Pose extrinsics = {});
};

// Focal length in pixels that gives a sensor of width_px a horizontal field
// of view of hfov_rad.
double focal_from_hfov(int width_px, double hfov_rad);

// Row-major 3x4 matrix mapping homogeneous rig-frame points to homogeneous
// pixels.
struct ProjectionMatrix {
  std::array<std::array<double, 4>, 3> m{};

  double operator()(int row, int col) const { return m[row][col]; }
  double& operator()(int row, int col) { return m[row][col]; }
};

ProjectionMatrix projection_matrix(const CameraModel& cam);

// Projects a rig-frame point through the camera. Throws BehindCameraError
// when the point has non-positive depth in the camera frame.
Pixel project(const Point3& rig_point, const CameraModel& cam);

// Dehomogenized application of a projection matrix; depth() is the third
// homogeneous coordinate. Used by triangulation residual checks and tests.
Pixel apply(const ProjectionMatrix& p, const Point3& point);

}  // namespace retrotrack
