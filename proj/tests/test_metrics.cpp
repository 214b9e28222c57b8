#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "retrotrack/errors.hpp"
#include "retrotrack/metrics.hpp"
#include "retrotrack/rng.hpp"

using namespace retrotrack;

namespace {

constexpr double kPi = 3.14159265358979323846;

PoseSample sample(double t, double x, double y, double z,
                  const UnitQuaternion& q = UnitQuaternion()) {
  PoseSample s;
  s.timestamp = t;
  s.pose.translation = {x, y, z};
  s.pose.rotation = q;
  return s;
}

}  // namespace

TEST_CASE("quaternion error: exact values and sign invariance") {
  const UnitQuaternion identity;
  CHECK(quaternion_error(identity, identity) == 0.0);

  // 90 degrees about z: geodesic quaternion distance is pi/4
  const UnitQuaternion quarter =
      UnitQuaternion::from_axis_angle({0, 0, 1}, kPi / 2);
  CHECK(std::abs(quaternion_error(identity, quarter) - kPi / 4) < 1e-12);

  // sign flip of either operand changes nothing
  const UnitQuaternion minus_quarter(-quarter.w(), -quarter.x(), -quarter.y(),
                                     -quarter.z());
  CHECK(std::abs(quaternion_error(identity, minus_quarter) - kPi / 4) < 1e-12);

  // 180 degrees: the metric saturates at pi/2
  const UnitQuaternion half = UnitQuaternion::from_axis_angle({0, 0, 1}, kPi);
  CHECK(std::abs(quaternion_error(identity, half) - kPi / 2) < 1e-12);

  CHECK(quaternion_error(quarter, quarter) == 0.0);
}

TEST_CASE("report: single pair worked example") {
  std::vector<SyncedPair> pairs;
  pairs.push_back({sample(0.0, 1.0, 2.0, 3.0),
                   sample(0.0, 1.03, 2.04, 3.0)});
  const MetricReport rep = make_report(pairs);
  CHECK(rep.samples == 1);
  CHECK(rep.p_rmse_cm == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(rep.axis_mean_cm[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(rep.axis_mean_cm[1] == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(rep.axis_mean_cm[2] == doctest::Approx(0.0));
  for (int i = 0; i < 3; ++i) CHECK(rep.axis_std_cm[i] == 0.0);
  CHECK(rep.q_err_mean_rad == 0.0);
  CHECK(rep.q_err_std_rad == 0.0);
}

TEST_CASE("report: population statistics over two pairs") {
  std::vector<SyncedPair> pairs;
  pairs.push_back({sample(0.0, 0.0, 0.0, 0.0), sample(0.0, 0.01, 0.0, 0.0)});
  pairs.push_back({sample(0.1, 0.0, 0.0, 0.0), sample(0.1, 0.03, 0.0, 0.0)});
  const MetricReport rep = make_report(pairs);
  CHECK(rep.samples == 2);
  CHECK(rep.axis_mean_cm[0] == doctest::Approx(2.0).epsilon(1e-12));
  // population std (divide by n): |1 - 2| = |3 - 2| = 1 cm
  CHECK(rep.axis_std_cm[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.p_rmse_cm ==
        doctest::Approx(100.0 * std::sqrt(0.0005)).epsilon(1e-12));
}

TEST_CASE("report: orientation statistics") {
  const UnitQuaternion quarter =
      UnitQuaternion::from_axis_angle({0, 0, 1}, kPi / 2);
  std::vector<SyncedPair> pairs;
  pairs.push_back({sample(0.0, 0, 0, 0), sample(0.0, 0, 0, 0, quarter)});
  pairs.push_back({sample(0.1, 0, 0, 0), sample(0.1, 0, 0, 0)});
  const MetricReport rep = make_report(pairs);
  CHECK(rep.q_err_mean_rad == doctest::Approx(kPi / 8).epsilon(1e-12));
  CHECK(rep.q_err_std_rad == doctest::Approx(kPi / 8).epsilon(1e-9));
}

TEST_CASE("report rejects empty input") {
  CHECK_THROWS_AS(make_report({}), std::invalid_argument);
}

TEST_CASE("synchronize: nearest sample at each tick") {
  std::vector<PoseSample> ref;
  for (int k = 0; k <= 4; ++k) ref.push_back(sample(0.1 * k, k, 0, 0));
  std::vector<PoseSample> est;
  est.push_back(sample(0.12, 10, 0, 0));
  est.push_back(sample(0.22, 11, 0, 0));
  est.push_back(sample(0.32, 12, 0, 0));

  const auto synced = synchronize(ref, est, 10.0);
  REQUIRE(synced.size() == 3);  // overlap [0.12, 0.32] at 10 Hz
  CHECK(synced[0].reference.pose.translation.x == 1.0);
  CHECK(synced[0].estimate.pose.translation.x == 10.0);
  CHECK(synced[1].reference.pose.translation.x == 2.0);
  CHECK(synced[1].estimate.pose.translation.x == 11.0);
  CHECK(synced[2].reference.pose.translation.x == 3.0);
  CHECK(synced[2].estimate.pose.translation.x == 12.0);
}

TEST_CASE("synchronize: equidistant neighbours resolve to the earlier one") {
  const std::vector<PoseSample> ref{sample(0.0, 1, 0, 0), sample(0.2, 2, 0, 0)};
  const std::vector<PoseSample> est{sample(0.1, 5, 0, 0)};
  const auto synced = synchronize(ref, est, 10.0);
  REQUIRE(synced.size() == 1);
  CHECK(synced[0].reference.timestamp == 0.0);
  CHECK(synced[0].reference.pose.translation.x == 1.0);
}

TEST_CASE("synchronize: single shared instant") {
  const std::vector<PoseSample> ref{sample(0.0, 1, 0, 0), sample(1.0, 2, 0, 0)};
  const std::vector<PoseSample> est{sample(1.0, 3, 0, 0), sample(2.0, 4, 0, 0)};
  const auto synced = synchronize(ref, est, 30.0);
  REQUIRE(synced.size() == 1);
  CHECK(synced[0].reference.pose.translation.x == 2.0);
  CHECK(synced[0].estimate.pose.translation.x == 3.0);
}

TEST_CASE("synchronize: validation") {
  const std::vector<PoseSample> a{sample(0.0, 0, 0, 0), sample(1.0, 0, 0, 0)};
  const std::vector<PoseSample> late{sample(2.0, 0, 0, 0),
                                     sample(3.0, 0, 0, 0)};
  CHECK_THROWS_AS(synchronize(a, late, 30.0), NoOverlapError);

  const std::vector<PoseSample> unsorted{sample(1.0, 0, 0, 0),
                                         sample(0.5, 0, 0, 0)};
  CHECK_THROWS_AS(synchronize(unsorted, a, 30.0), std::invalid_argument);
  CHECK_THROWS_AS(synchronize(a, unsorted, 30.0), std::invalid_argument);
  CHECK_THROWS_AS(synchronize({}, a, 30.0), std::invalid_argument);
  CHECK_THROWS_AS(synchronize(a, a, 0.0), std::invalid_argument);
}

TEST_CASE("pose CSV: lossless and byte-stable round trip") {
  detail::Rng rng(31337);
  std::vector<PoseSample> samples;
  for (int i = 0; i < 50; ++i) {
    const double ax = rng.normal(), ay = rng.normal(), az = rng.normal();
    const double an = std::sqrt(ax * ax + ay * ay + az * az);
    samples.push_back(sample(
        i / 30.0, rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2),
        UnitQuaternion::from_axis_angle({ax / an, ay / an, az / an},
                                        rng.uniform(0.0, 3.1))));
  }

  namespace fs = std::filesystem;
  const fs::path p1 = fs::temp_directory_path() / "retrotrack_poses1.csv";
  const fs::path p2 = fs::temp_directory_path() / "retrotrack_poses2.csv";
  write_pose_csv(p1.string(), samples);
  const auto loaded = read_pose_csv(p1.string());
  REQUIRE(loaded.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(loaded[i].timestamp == samples[i].timestamp);
    CHECK(loaded[i].pose.translation.x == samples[i].pose.translation.x);
    CHECK(loaded[i].pose.translation.y == samples[i].pose.translation.y);
    CHECK(loaded[i].pose.translation.z == samples[i].pose.translation.z);
    CHECK(loaded[i].pose.rotation.w() == samples[i].pose.rotation.w());
    CHECK(loaded[i].pose.rotation.x() == samples[i].pose.rotation.x());
    CHECK(loaded[i].pose.rotation.y() == samples[i].pose.rotation.y());
    CHECK(loaded[i].pose.rotation.z() == samples[i].pose.rotation.z());
  }

  write_pose_csv(p2.string(), loaded);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::string c1((std::istreambuf_iterator<char>(f1)),
                 std::istreambuf_iterator<char>());
  std::string c2((std::istreambuf_iterator<char>(f2)),
                 std::istreambuf_iterator<char>());
  CHECK(c1 == c2);
  CHECK(c1.substr(0, 33) == "timestamp,tx,ty,tz,qw,qx,qy,qz\n0,");
  fs::remove(p1);
  fs::remove(p2);
}

TEST_CASE("pose CSV: malformed files are rejected") {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "retrotrack_bad.csv";

  auto write_text = [&p](const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
  };

  write_text("time,alpha\n");
  CHECK_THROWS_AS(read_pose_csv(p.string()), std::runtime_error);

  write_text("timestamp,tx,ty,tz,qw,qx,qy,qz\n0,0,0\n");
  CHECK_THROWS_AS(read_pose_csv(p.string()), std::runtime_error);

  write_text("timestamp,tx,ty,tz,qw,qx,qy,qz\n0,0,0,0,1,0,0,oops\n");
  CHECK_THROWS_AS(read_pose_csv(p.string()), std::runtime_error);

  write_text("timestamp,tx,ty,tz,qw,qx,qy,qz\n0,0,0,0,1,0,0,0,9\n");
  CHECK_THROWS_AS(read_pose_csv(p.string()), std::runtime_error);

  CHECK_THROWS_AS(read_pose_csv((fs::temp_directory_path() /
                                 "retrotrack_missing_zz.csv").string()),
                  std::runtime_error);
  fs::remove(p);
}
