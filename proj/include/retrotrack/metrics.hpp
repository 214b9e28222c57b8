#pragma once

#include <array>
#include <string>
#include <vector>

#include "retrotrack/geometry.hpp"

namespace retrotrack {

// One synchronized (reference, estimate) sample pair.
struct SyncedPair {
  PoseSample reference;
  PoseSample estimate;
};

// Nearest-timestamp synchronization at a common rate: ticks are laid at
// 1/rate spacing across the overlap of the two recordings and each stream
// contributes its nearest sample to every tick (earlier sample wins a tie).
// Inputs must be sorted by timestamp. Throws NoOverlapError when the
// recordings do not overlap in time.
std::vector<SyncedPair> synchronize(const std::vector<PoseSample>& reference,
                                    const std::vector<PoseSample>& estimates,
                                    double rate_hz);

struct MetricReport {
  double p_rmse_cm = 0.0;
  std::array<double, 3> axis_mean_cm{};  // signed estimate - reference
  std::array<double, 3> axis_std_cm{};   // population standard deviation
  double q_err_mean_rad = 0.0;
  double q_err_std_rad = 0.0;
  long samples = 0;
};

// Position RMSE (cm), per-axis signed mean and population std (cm), and
// orientation geodesic error arccos(|q_ref . q_est|) in [0, pi/2] (rad,
// mean and population std). Throws std::invalid_argument on empty input.
MetricReport make_report(const std::vector<SyncedPair>& pairs);

// Orientation error between two unit quaternions, radians in [0, pi/2];
// invariant to the sign of either quaternion.
double quaternion_error(const UnitQuaternion& a, const UnitQuaternion& b);

// Pose sequence CSV, header `timestamp,tx,ty,tz,qw,qx,qy,qz`, SI units.
// Values are written with shortest round-trip formatting, so save/load is
// lossless and byte-reproducible.
void write_pose_csv(const std::string& path,
                    const std::vector<PoseSample>& samples);
std::vector<PoseSample> read_pose_csv(const std::string& path);

}  // namespace retrotrack
