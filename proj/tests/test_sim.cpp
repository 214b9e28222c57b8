#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "retrotrack/errors.hpp"
#include "retrotrack/sim.hpp"

using namespace retrotrack;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kFx = 268.51188197672957;

CameraModel left_camera() {
  return CameraModel(kFx, kFx, 320.0, 240.0, 640, 480);
}

PoseFn constant(const Pose& p) {
  return [p](double) { return p; };
}

double blob_centroid_u(const Frame& f, double& out_v, double& out_mass) {
  double su = 0.0, sv = 0.0, mass = 0.0;
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const double w = f.at(x, y);
      su += w * x;
      sv += w * y;
      mass += w;
    }
  }
  out_v = sv / mass;
  out_mass = mass;
  return su / mass;
}

}  // namespace

TEST_CASE("marker geometry validation") {
  CHECK_NOTHROW(default_marker_geometry());

  // collinear
  CHECK_THROWS_AS(MarkerGeometry({Point3{0, 0, 0}, Point3{0.1, 0, 0},
                                  Point3{0.25, 0, 0}},
                                 0.015),
                  std::invalid_argument);
  // isosceles within the margin
  CHECK_THROWS_AS(MarkerGeometry({Point3{-0.05, 0, 0}, Point3{0.05, 0, 0},
                                  Point3{0.0, 0.08, 0}},
                                 0.015),
                  std::invalid_argument);
  // bad radius
  CHECK_THROWS_AS(MarkerGeometry({Point3{-0.0591, -0.0215, 0},
                                  Point3{0.0709, -0.0215, 0},
                                  Point3{-0.0118, 0.0430, 0}},
                                 0.0),
                  std::invalid_argument);
}

TEST_CASE("default geometry edge lengths are scalene and frozen") {
  const MarkerGeometry g = default_marker_geometry();
  const auto e = g.edge_lengths();
  CHECK(e[0] == doctest::Approx(0.10487869183013297).epsilon(1e-12));
  CHECK(e[1] == doctest::Approx(0.07998462352227458).epsilon(1e-12));
  CHECK(e[2] == doctest::Approx(0.13).epsilon(1e-12));
  // centroid-centered
  Point3 c{0, 0, 0};
  for (const Point3& p : g.points()) c = c + p;
  CHECK(norm(c) < 1e-15);
}

TEST_CASE("static trajectory: sampling grid and constancy") {
  const TrialTrajectory t = static_trajectory(0.9, 0.0, 2.0, 30.0);
  const auto times = sample_times(t);
  REQUIRE(times.size() == 60);  // 2 s at 30 Hz
  CHECK(times.front() == 0.0);
  CHECK(times.back() == doctest::Approx(59.0 / 30.0).epsilon(1e-12));

  const auto samples = sample_trajectory(t);
  REQUIRE(samples.size() == 60);
  for (const PoseSample& s : samples) {
    CHECK(norm(s.pose.translation - Point3{0.0, 0.0, 0.9}) < 1e-15);
    CHECK(std::abs(s.pose.rotation.dot(samples[0].pose.rotation)) ==
          doctest::Approx(1.0).epsilon(1e-15));
  }

  // target (world origin) seen straight down the left camera axis
  const Pose target_in_rig = invert(rig_pose_at(t, 0.0));
  CHECK(norm(target_in_rig.translation - Point3{0.0, 0.0, 0.9}) < 1e-12);
}

TEST_CASE("static yaw shifts the target sideways in view") {
  const TrialTrajectory t = static_trajectory(0.9, 0.17, 2.0, 30.0);
  const Pose target_in_rig = invert(rig_pose_at(t, 0.0));
  // yawing the rig about its own vertical axis moves the target to
  // u = cx - fx*tan(yaw): still well inside the 640 px sensor
  CHECK(target_in_rig.translation.z ==
        doctest::Approx(0.9 * std::cos(0.17)).epsilon(1e-12));
  CHECK(target_in_rig.translation.x ==
        doctest::Approx(-0.9 * std::sin(0.17)).epsilon(1e-12));
  CHECK(target_in_rig.translation.y == doctest::Approx(0.0));
}

TEST_CASE("angular trajectory: sweep duration and coverage") {
  const double range = 40.0 * kPi / 180.0;
  const TrialTrajectory t = angular_trajectory(1.0, 0.4, range, 30.0);
  CHECK(t.duration_s == doctest::Approx(1.7453292519943295).epsilon(1e-12));
  CHECK(sample_times(t).size() == 52);  // round(1.745 * 30)

  // yaw runs from -20 deg to +20 deg across the sweep
  const Pose p0 = invert(rig_pose_at(t, 0.0));
  const Pose p1 = invert(rig_pose_at(t, t.duration_s));
  CHECK(p0.translation.x == doctest::Approx(std::sin(range / 2)).epsilon(1e-9));
  CHECK(p1.translation.x ==
        doctest::Approx(-std::sin(range / 2)).epsilon(1e-9));
}

TEST_CASE("linear trajectory: duration and displacement") {
  const TrialTrajectory t = linear_trajectory(0.10, 0.9, 2.2, 30.0);
  CHECK(t.duration_s == doctest::Approx(13.0).epsilon(1e-12));
  CHECK(sample_times(t).size() == 390);

  const Pose first = invert(rig_pose_at(t, 0.0));
  const Pose last = invert(rig_pose_at(t, t.duration_s));
  CHECK(first.translation.z == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(last.translation.z == doctest::Approx(2.2).epsilon(1e-12));
  CHECK(norm(last.translation - first.translation) ==
        doctest::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("trajectory validation") {
  CHECK_THROWS_AS(static_trajectory(-1.0, 0.0, 2.0, 30.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(angular_trajectory(1.0, 0.0, 0.7, 30.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(linear_trajectory(0.1, 2.2, 0.9, 30.0),
                  std::invalid_argument);
}

TEST_CASE("exact centers delegate to project") {
  const MarkerGeometry g = default_marker_geometry();
  const CameraModel cam = left_camera();
  const TrialTrajectory t = static_trajectory(0.9, 0.0, 2.0, 30.0);
  const Pose rig = rig_pose_at(t, 0.0);
  const auto centers = exact_feature_centers(g, Pose{}, rig, cam);

  const Pose world_to_rig = invert(rig);
  for (int i = 0; i < 3; ++i) {
    const Pixel direct =
        project(transform_point(world_to_rig, g.points()[i]), cam);
    CHECK(centers[i].u == doctest::Approx(direct.u).epsilon(1e-12));
    CHECK(centers[i].v == doctest::Approx(direct.v).epsilon(1e-12));
  }

  // camera on the -z side facing away from the target
  Pose behind;
  behind.translation = {0.0, 0.0, -0.5};
  behind.rotation = UnitQuaternion::from_axis_angle({0, 1, 0}, kPi);
  CHECK_THROWS_AS(exact_feature_centers(g, Pose{}, behind, cam),
                  BehindCameraError);
}

TEST_CASE("rendered disc radius and mass at 1 m") {
  // One marker dead ahead at 1 m: disc of radius fx*0.015 ~ 4.03 px at the
  // principal point.
  const CameraModel cam = left_camera();
  Pose rig;
  rig.rotation = UnitQuaternion::from_axis_angle({0, 1, 0}, kPi);
  rig.translation = {0.0, 0.0, 1.0};

  const std::vector<WorldMarker> markers{{{0.0, 0.0, 0.0}, 0.015}};
  const Frame f = render_markers(markers, constant(rig), cam, 0.0, 500e-6,
                                 NoiseSpec{});
  double v = 0.0, mass = 0.0;
  const double u = blob_centroid_u(f, v, mass);
  CHECK(u == doctest::Approx(320.0).epsilon(1e-9));
  CHECK(v == doctest::Approx(240.0).epsilon(1e-9));

  const double expected_area = kPi * 4.0276782296509435 * 4.0276782296509435;
  CHECK(mass > 0.8 * expected_area);
  CHECK(mass < 1.2 * expected_area);

  // every intensity is 0 or 1 (and sums of 1/8 hit 1.0 exactly)
  for (double p : f.intensities) CHECK((p == 0.0 || p == 1.0));
}

TEST_CASE("blur invariance for static poses") {
  const MarkerGeometry g = default_marker_geometry();
  const CameraModel cam = left_camera();
  const TrialTrajectory t = static_trajectory(1.34, 0.17, 2.0, 30.0);
  const PoseFn rig = [&t](double time) { return rig_pose_at(t, time); };
  const PoseFn target = constant(Pose{});

  const Frame a = render_frame(g, target, rig, cam, 0.0, 500e-6, NoiseSpec{});
  const Frame b = render_frame(g, target, rig, cam, 0.0, 0.05, NoiseSpec{});
  CHECK(a.intensities == b.intensities);
}

TEST_CASE("motion smears the disc across the exposure window") {
  // A fast pan with a long exposure: the lit region must be wider than the
  // static disc by about the pan distance.
  const CameraModel cam = left_camera();
  const std::vector<WorldMarker> markers{{{0.0, 0.0, 0.0}, 0.015}};
  const double omega = 2.0;     // rad/s
  const double exposure = 0.02; // s: sweeps fx*omega*exposure ~ 10.7 px
  const PoseFn rig = [omega](double time) {
    Pose p;
    p.rotation = UnitQuaternion::from_axis_angle({0, 1, 0}, kPi) *
                 UnitQuaternion::from_axis_angle({0, 1, 0}, omega * time);
    p.translation = {0.0, 0.0, 1.0};
    return p;
  };
  const Frame moving =
      render_markers(markers, rig, cam, 0.0, exposure, NoiseSpec{}, 0, 64);

  int min_x = cam.width, max_x = -1;
  for (int y = 0; y < moving.height; ++y) {
    for (int x = 0; x < moving.width; ++x) {
      if (moving.at(x, y) > 0.0) {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
      }
    }
  }
  const double span = max_x - min_x + 1;
  const double blur_px = kFx * omega * exposure;
  CHECK(span > 2 * 4.0 + blur_px * 0.6);
  CHECK(span < 2 * 5.0 + blur_px * 1.4);

  // fractional intensities exist only under motion
  bool fractional = false;
  for (double p : moving.intensities) {
    if (p > 0.0 && p < 1.0) fractional = true;
  }
  CHECK(fractional);
}

TEST_CASE("markers behind the camera render nothing") {
  const CameraModel cam = left_camera();
  Pose rig;  // identity: looking along +z away from a marker at -z
  const std::vector<WorldMarker> markers{{{0.0, 0.0, -1.0}, 0.015}};
  const Frame f =
      render_markers(markers, constant(rig), cam, 0.0, 500e-6, NoiseSpec{});
  for (double p : f.intensities) CHECK(p == 0.0);
}

TEST_CASE("noise determinism and seed separation") {
  const CameraModel cam = left_camera();
  const std::vector<WorldMarker> markers{{{0.0, 0.0, 0.0}, 0.015}};
  Pose rig;
  rig.rotation = UnitQuaternion::from_axis_angle({0, 1, 0}, kPi);
  rig.translation = {0.0, 0.0, 1.0};

  NoiseSpec noise;
  noise.pixel_noise_sigma = 0.2;
  noise.spurious_blob_rate = 3.0;
  noise.rng_seed = 42;

  const Frame a =
      render_markers(markers, constant(rig), cam, 0.0, 500e-6, noise, 7);
  const Frame b =
      render_markers(markers, constant(rig), cam, 0.0, 500e-6, noise, 7);
  CHECK(a.intensities == b.intensities);

  const Frame c =
      render_markers(markers, constant(rig), cam, 0.0, 500e-6, noise, 8);
  CHECK(a.intensities != c.intensities);

  noise.rng_seed = 43;
  const Frame d =
      render_markers(markers, constant(rig), cam, 0.0, 500e-6, noise, 7);
  CHECK(a.intensities != d.intensities);

  // noise stays clamped
  for (double p : d.intensities) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("pgm export") {
  Frame f;
  f.width = 4;
  f.height = 2;
  f.intensities = {0.0, 0.25, 0.5, 1.0, 1.0, 0.75, 0.5, 0.0};

  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "retrotrack_test.pgm";
  write_pgm(f, path.string());

  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  CHECK(magic == "P5");
  CHECK(w == 4);
  CHECK(h == 2);
  CHECK(maxval == 255);
  in.get();  // single whitespace after maxval
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  REQUIRE(in.gcount() == 8);
  CHECK(bytes[0] == 0);
  CHECK(bytes[1] == 64);
  CHECK(bytes[2] == 128);
  CHECK(bytes[3] == 255);
  CHECK(bytes[4] == 255);
  CHECK(bytes[5] == 191);
  std::filesystem::remove(path);
}
