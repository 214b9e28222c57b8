#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "retrotrack/detect.hpp"
#include "retrotrack/geometry.hpp"
#include "retrotrack/metrics.hpp"
#include "retrotrack/rigid.hpp"
#include "retrotrack/sim.hpp"
#include "retrotrack/triangulate.hpp"

namespace retrotrack {

// Default additive pixel-noise level for benchmark runs, chosen
// empirically (see README on noise calibration): high enough to exercise
// every detection path each frame, low enough that random background
// clusters stay below min_area across the full trial grid.
inline constexpr double kDefaultPixelNoiseSigma = 0.15;

// Effective benchmark configuration; every field has a default so an empty
// JSON config is valid. Mirrors the config file schema one to one.
struct BenchConfig {
  BenchConfig();

  std::string matrix = "static";  // static | angular | linear
  std::uint64_t seed = 1;
  int repetitions = 0;            // 0 = the matrix's own default

  double frame_rate_hz = 30.0;
  double exposure_s = 500e-6;
  int subexposure_samples = 8;
  double static_duration_s = 2.0;

  // Stereo rig: left camera defines the rig frame, right camera sits
  // baseline_m along +x. fx/fy of 0 mean "derive from the default 100
  // degree horizontal field of view".
  double baseline_m = 0.10;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;

  MarkerGeometry geometry;  // defaults to default_marker_geometry()
  NoiseSpec noise;          // pixel_noise_sigma defaults to the calibrated value
  DetectParams detect;
  TriangulationParams triangulation;
  double geometry_ambiguity_margin = 1e-6;

  // Optional Gaussian jitter applied to ground-truth translations, for
  // studying sensitivity to an imperfect reference. Off by default: the
  // reference is the simulator's exact pose.
  double gt_jitter_sigma_m = 0.0;
};

// Parses the JSON config format. Unknown keys are errors. Empty object is
// the full-default configuration.
BenchConfig parse_config_json(const std::string& json_text);
BenchConfig load_config_file(const std::string& path);

struct StereoRig {
  CameraModel left;
  CameraModel right;
};
StereoRig make_rig(const BenchConfig& config);

// One cell of a trial matrix.
struct TrialConfig {
  std::string id;
  TrialTrajectory trajectory;
  // Ordered parameter columns reported for this trial (matrix-specific).
  std::vector<std::pair<std::string, double>> parameters;
};

// The built-in matrices: "static" is the 4-distance x 3-yaw grid,
// "angular" sweeps yaw at 4 angular velocities, "linear" retreats along
// the rail at 4 velocities.
std::vector<TrialConfig> build_matrix(const BenchConfig& config);

struct StageCounts {
  long detection = 0;
  long correspondence = 0;
  long triangulation = 0;
  long geometry = 0;
  long registration = 0;

  long total() const {
    return detection + correspondence + triangulation + geometry +
           registration;
  }
};

struct TrialResult {
  std::string id;
  std::vector<std::pair<std::string, double>> parameters;
  int repetitions = 0;
  long frames = 0;     // stereo frame pairs attempted (all repetitions)
  long successes = 0;  // frame pairs that produced a pose
  StageCounts failures;
  // Metric fields averaged over repetitions that produced at least one
  // pose; samples is the total synchronized-pair count.
  MetricReport metrics;
  int reps_with_estimates = 0;
  double wall_seconds = 0.0;
  // Repetition 0's recordings, written to <out>/poses/.
  std::vector<PoseSample> truth0;
  std::vector<PoseSample> estimates0;
};

// Runs every repetition of one trial. dump_dir, when non-empty, receives
// PGM dumps of repetition 0's frames.
TrialResult run_trial(const BenchConfig& config, const TrialConfig& trial,
                      const std::string& dump_dir = {});

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  std::string matrix_override;  // empty = use config
  bool has_seed_override = false;
  std::uint64_t seed_override = 0;
  int jobs = 1;
  bool dump_frames = false;
};

// Executes a full benchmark run and writes results.csv, results.json,
// timing.log, poses/, and (optionally) frames/ under out_dir. timing.log
// is the only output that is not byte-deterministic.
int run_command(const RunOptions& options);

// Re-renders a finished run directory's results.json as CSV or a markdown
// table on stdout.
int report_command(const std::string& in_dir, const std::string& format);

// Full CLI: `bench run ...` / `bench report ...`. args excludes argv[0].
int bench_main(const std::vector<std::string>& args);

}  // namespace retrotrack
