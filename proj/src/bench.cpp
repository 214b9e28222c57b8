#include "retrotrack/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "retrotrack/errors.hpp"
#include "retrotrack/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace retrotrack {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDefaultHfovRad = 100.0 * kPi / 180.0;
constexpr double kSweepRangeRad = 40.0 * kPi / 180.0;

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

int effective_repetitions(const BenchConfig& config) {
  if (config.repetitions > 0) return config.repetitions;
  return config.matrix == "linear" ? 5 : 30;
}

std::string format_id(const char* fmt, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, a);
  return buf;
}

std::string format_id(const char* fmt, double a, double b) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, a, b);
  return buf;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw std::invalid_argument("unknown config key '" + key + "' in " +
                                  where);
    }
  }
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

BenchConfig::BenchConfig()
    : geometry(default_marker_geometry()) {
  noise.pixel_noise_sigma = kDefaultPixelNoiseSigma;
}

BenchConfig parse_config_json(const std::string& json_text) {
  const json doc = json::parse(json_text);
  if (!doc.is_object()) {
    throw std::invalid_argument("config root must be a JSON object");
  }
  check_keys(doc,
             {"matrix", "seed", "repetitions", "frame_rate_hz", "exposure_s",
              "subexposure_samples", "static_duration_s", "rig", "geometry",
              "noise", "detect", "triangulation", "geometry_ambiguity_margin",
              "gt_jitter_sigma_m"},
             "config root");

  BenchConfig c;
  if (doc.contains("matrix")) c.matrix = doc.at("matrix").get<std::string>();
  if (c.matrix != "static" && c.matrix != "angular" && c.matrix != "linear") {
    throw std::invalid_argument("matrix must be static, angular, or linear");
  }
  if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("repetitions")) {
    c.repetitions = doc.at("repetitions").get<int>();
    if (c.repetitions < 0) {
      throw std::invalid_argument("repetitions must be non-negative");
    }
  }
  if (doc.contains("frame_rate_hz")) {
    c.frame_rate_hz = doc.at("frame_rate_hz").get<double>();
  }
  if (doc.contains("exposure_s")) {
    c.exposure_s = doc.at("exposure_s").get<double>();
  }
  if (doc.contains("subexposure_samples")) {
    c.subexposure_samples = doc.at("subexposure_samples").get<int>();
  }
  if (doc.contains("static_duration_s")) {
    c.static_duration_s = doc.at("static_duration_s").get<double>();
  }
  if (!(c.frame_rate_hz > 0.0) || !(c.exposure_s > 0.0) ||
      c.subexposure_samples < 1 || !(c.static_duration_s > 0.0)) {
    throw std::invalid_argument("timing parameters must be positive");
  }

  if (doc.contains("rig")) {
    const json& rig = doc.at("rig");
    check_keys(rig, {"baseline_m", "fx", "fy", "cx", "cy", "width", "height"},
               "rig");
    if (rig.contains("baseline_m")) {
      c.baseline_m = rig.at("baseline_m").get<double>();
    }
    if (rig.contains("fx")) c.fx = rig.at("fx").get<double>();
    if (rig.contains("fy")) c.fy = rig.at("fy").get<double>();
    if (rig.contains("cx")) c.cx = rig.at("cx").get<double>();
    if (rig.contains("cy")) c.cy = rig.at("cy").get<double>();
    if (rig.contains("width")) c.width = rig.at("width").get<int>();
    if (rig.contains("height")) c.height = rig.at("height").get<int>();
    if (!(c.baseline_m > 0.0)) {
      throw std::invalid_argument("baseline must be positive");
    }
  }

  if (doc.contains("geometry")) {
    const json& g = doc.at("geometry");
    check_keys(g, {"marker_radius_m", "points"}, "geometry");
    double radius = c.geometry.marker_radius();
    std::array<Point3, 3> pts = c.geometry.points();
    if (g.contains("marker_radius_m")) {
      radius = g.at("marker_radius_m").get<double>();
    }
    if (g.contains("points")) {
      const json& arr = g.at("points");
      if (!arr.is_array() || arr.size() != 3) {
        throw std::invalid_argument("geometry.points must hold 3 points");
      }
      for (int i = 0; i < 3; ++i) {
        const json& p = arr.at(i);
        if (!p.is_array() || p.size() != 3) {
          throw std::invalid_argument("each geometry point needs 3 numbers");
        }
        pts[i] = {p.at(0).get<double>(), p.at(1).get<double>(),
                  p.at(2).get<double>()};
      }
    }
    c.geometry = MarkerGeometry(pts, radius);
  }

  if (doc.contains("noise")) {
    const json& n = doc.at("noise");
    check_keys(n,
               {"pixel_noise_sigma", "spurious_blob_rate",
                "spurious_blob_radius_min_px", "spurious_blob_radius_max_px"},
               "noise");
    if (n.contains("pixel_noise_sigma")) {
      c.noise.pixel_noise_sigma = n.at("pixel_noise_sigma").get<double>();
    }
    if (n.contains("spurious_blob_rate")) {
      c.noise.spurious_blob_rate = n.at("spurious_blob_rate").get<double>();
    }
    if (n.contains("spurious_blob_radius_min_px")) {
      c.noise.spurious_blob_radius_min_px =
          n.at("spurious_blob_radius_min_px").get<double>();
    }
    if (n.contains("spurious_blob_radius_max_px")) {
      c.noise.spurious_blob_radius_max_px =
          n.at("spurious_blob_radius_max_px").get<double>();
    }
    if (c.noise.pixel_noise_sigma < 0.0 || c.noise.spurious_blob_rate < 0.0) {
      throw std::invalid_argument("noise levels must be non-negative");
    }
  }

  if (doc.contains("detect")) {
    const json& d = doc.at("detect");
    check_keys(d, {"intensity_threshold", "min_area", "max_area",
                   "max_features"},
               "detect");
    if (d.contains("intensity_threshold")) {
      c.detect.intensity_threshold = d.at("intensity_threshold").get<double>();
    }
    if (d.contains("min_area")) {
      c.detect.min_area = d.at("min_area").get<double>();
    }
    if (d.contains("max_area")) {
      c.detect.max_area = d.at("max_area").get<double>();
    }
    if (d.contains("max_features")) {
      c.detect.max_features = d.at("max_features").get<int>();
    }
  }

  if (doc.contains("triangulation")) {
    const json& t = doc.at("triangulation");
    check_keys(t, {"max_iterations", "weight_tolerance"}, "triangulation");
    if (t.contains("max_iterations")) {
      c.triangulation.max_iterations = t.at("max_iterations").get<int>();
    }
    if (t.contains("weight_tolerance")) {
      c.triangulation.weight_tolerance =
          t.at("weight_tolerance").get<double>();
    }
  }

  if (doc.contains("geometry_ambiguity_margin")) {
    c.geometry_ambiguity_margin =
        doc.at("geometry_ambiguity_margin").get<double>();
    if (!(c.geometry_ambiguity_margin > 0.0)) {
      throw std::invalid_argument("geometry_ambiguity_margin must be positive");
    }
  }
  if (doc.contains("gt_jitter_sigma_m")) {
    c.gt_jitter_sigma_m = doc.at("gt_jitter_sigma_m").get<double>();
    if (c.gt_jitter_sigma_m < 0.0) {
      throw std::invalid_argument("gt_jitter_sigma_m must be non-negative");
    }
  }
  return c;
}

BenchConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_json(text.str());
}

StereoRig make_rig(const BenchConfig& config) {
  const double fx =
      config.fx > 0.0 ? config.fx
                      : focal_from_hfov(config.width, kDefaultHfovRad);
  const double fy = config.fy > 0.0 ? config.fy : fx;
  Pose right_in_rig;
  right_in_rig.translation = {config.baseline_m, 0.0, 0.0};
  return {CameraModel(fx, fy, config.cx, config.cy, config.width,
                      config.height),
          CameraModel(fx, fy, config.cx, config.cy, config.width,
                      config.height, right_in_rig)};
}

std::vector<TrialConfig> build_matrix(const BenchConfig& config) {
  std::vector<TrialConfig> trials;
  if (config.matrix == "static") {
    // The static grid of the reference hardware study: four rail distances
    // crossed with three fixed yaw offsets.
    for (double d : {0.90, 1.34, 1.78, 2.23}) {
      for (double yaw : {0.0, 0.17, -0.34}) {
        TrialConfig t;
        t.id = format_id("static_d%.2f_y%+.2f", d, yaw);
        t.trajectory = static_trajectory(d, yaw, config.static_duration_s,
                                         config.frame_rate_hz);
        t.parameters = {{"distance_m", d}, {"yaw_rad", yaw}};
        trials.push_back(std::move(t));
      }
    }
  } else if (config.matrix == "angular") {
    for (double w : {0.05, 0.10, 0.20, 0.40}) {
      TrialConfig t;
      t.id = format_id("angular_w%.2f", w);
      t.trajectory =
          angular_trajectory(1.0, w, kSweepRangeRad, config.frame_rate_hz);
      t.parameters = {{"distance_m", 1.0}, {"angular_velocity_rad_s", w}};
      trials.push_back(std::move(t));
    }
  } else if (config.matrix == "linear") {
    for (double v : {0.10, 0.20, 0.25, 0.30}) {
      TrialConfig t;
      t.id = format_id("linear_v%.2f", v);
      t.trajectory = linear_trajectory(v, 0.90, 2.20, config.frame_rate_hz);
      t.parameters = {
          {"velocity_m_s", v}, {"start_m", 0.90}, {"end_m", 2.20}};
      trials.push_back(std::move(t));
    }
  } else {
    throw std::invalid_argument("unknown matrix '" + config.matrix + "'");
  }
  return trials;
}

TrialResult run_trial(const BenchConfig& config, const TrialConfig& trial,
                      const std::string& dump_dir) {
  const auto t_begin = std::chrono::steady_clock::now();

  TrialResult result;
  result.id = trial.id;
  result.parameters = trial.parameters;
  result.repetitions = effective_repetitions(config);

  const StereoRig rig = make_rig(config);
  const PipelineParams pipeline{config.detect, config.triangulation,
                                config.geometry_ambiguity_margin};
  const std::uint64_t trial_seed =
      detail::mix_seed(config.seed, fnv1a64(trial.id));
  const auto target_at = [](double) { return Pose{}; };

  MetricReport sums{};
  for (int rep = 0; rep < result.repetitions; ++rep) {
    const std::uint64_t rep_seed =
        detail::mix_seed(trial_seed, static_cast<std::uint64_t>(rep) + 1);
    const std::vector<double> times = sample_times(trial.trajectory);
    const auto rig_at = [&trial](double t) {
      return rig_pose_at(trial.trajectory, t);
    };

    std::vector<PoseSample> truth;
    truth.reserve(times.size());
    for (double t : times) {
      truth.push_back({t, invert(rig_pose_at(trial.trajectory, t))});
    }
    if (config.gt_jitter_sigma_m > 0.0) {
      detail::Rng jitter(detail::mix_seed(rep_seed, 3));
      for (PoseSample& s : truth) {
        s.pose.translation.x += config.gt_jitter_sigma_m * jitter.normal();
        s.pose.translation.y += config.gt_jitter_sigma_m * jitter.normal();
        s.pose.translation.z += config.gt_jitter_sigma_m * jitter.normal();
      }
    }

    NoiseSpec noise = config.noise;
    noise.rng_seed = rep_seed;

    std::vector<PoseSample> estimates;
    estimates.reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
      const Frame left = render_frame(
          config.geometry, target_at, rig_at, rig.left, times[k],
          config.exposure_s, noise, 2 * k, config.subexposure_samples);
      const Frame right = render_frame(
          config.geometry, target_at, rig_at, rig.right, times[k],
          config.exposure_s, noise, 2 * k + 1, config.subexposure_samples);
      if (rep == 0 && !dump_dir.empty()) {
        char name[64];
        std::snprintf(name, sizeof(name), "/f%05zu_left.pgm", k);
        write_pgm(left, dump_dir + name);
        std::snprintf(name, sizeof(name), "/f%05zu_right.pgm", k);
        write_pgm(right, dump_dir + name);
      }
      try {
        const PoseEstimate pe = track_frame_pair(
            left, right, rig.left, rig.right, config.geometry, pipeline);
        estimates.push_back({pe.timestamp, pe.pose});
      } catch (const TrackError& e) {
        switch (e.stage()) {
          case PipelineStage::detection: ++result.failures.detection; break;
          case PipelineStage::correspondence:
            ++result.failures.correspondence;
            break;
          case PipelineStage::triangulation:
            ++result.failures.triangulation;
            break;
          case PipelineStage::geometry: ++result.failures.geometry; break;
          case PipelineStage::registration:
            ++result.failures.registration;
            break;
        }
      }
    }

    result.frames += static_cast<long>(times.size());
    result.successes += static_cast<long>(estimates.size());
    if (rep == 0) {
      result.truth0 = truth;
      result.estimates0 = estimates;
    }
    if (!estimates.empty()) {
      const MetricReport rep_metrics =
          make_report(synchronize(truth, estimates, config.frame_rate_hz));
      sums.p_rmse_cm += rep_metrics.p_rmse_cm;
      for (int i = 0; i < 3; ++i) {
        sums.axis_mean_cm[i] += rep_metrics.axis_mean_cm[i];
        sums.axis_std_cm[i] += rep_metrics.axis_std_cm[i];
      }
      sums.q_err_mean_rad += rep_metrics.q_err_mean_rad;
      sums.q_err_std_rad += rep_metrics.q_err_std_rad;
      sums.samples += rep_metrics.samples;
      ++result.reps_with_estimates;
    }
  }

  if (result.reps_with_estimates > 0) {
    const double r = result.reps_with_estimates;
    result.metrics.p_rmse_cm = sums.p_rmse_cm / r;
    for (int i = 0; i < 3; ++i) {
      result.metrics.axis_mean_cm[i] = sums.axis_mean_cm[i] / r;
      result.metrics.axis_std_cm[i] = sums.axis_std_cm[i] / r;
    }
    result.metrics.q_err_mean_rad = sums.q_err_mean_rad / r;
    result.metrics.q_err_std_rad = sums.q_err_std_rad / r;
    result.metrics.samples = sums.samples;
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
          .count();
  return result;
}

namespace {

json config_echo(const BenchConfig& config, const StereoRig& rig) {
  json rig_json{{"baseline_m", config.baseline_m},
                {"fx", rig.left.fx},
                {"fy", rig.left.fy},
                {"cx", config.cx},
                {"cy", config.cy},
                {"width", config.width},
                {"height", config.height}};
  json points = json::array();
  for (const Point3& p : config.geometry.points()) {
    points.push_back({p.x, p.y, p.z});
  }
  return json{
      {"matrix", config.matrix},
      {"seed", config.seed},
      {"repetitions", effective_repetitions(config)},
      {"frame_rate_hz", config.frame_rate_hz},
      {"exposure_s", config.exposure_s},
      {"subexposure_samples", config.subexposure_samples},
      {"static_duration_s", config.static_duration_s},
      {"rig", rig_json},
      {"geometry",
       {{"marker_radius_m", config.geometry.marker_radius()},
        {"points", points}}},
      {"noise",
       {{"pixel_noise_sigma", config.noise.pixel_noise_sigma},
        {"spurious_blob_rate", config.noise.spurious_blob_rate},
        {"spurious_blob_radius_min_px", config.noise.spurious_blob_radius_min_px},
        {"spurious_blob_radius_max_px",
         config.noise.spurious_blob_radius_max_px}}},
      {"detect",
       {{"intensity_threshold", config.detect.intensity_threshold},
        {"min_area", config.detect.min_area},
        {"max_area", config.detect.max_area},
        {"max_features", config.detect.max_features}}},
      {"triangulation",
       {{"max_iterations", config.triangulation.max_iterations},
        {"weight_tolerance", config.triangulation.weight_tolerance}}},
      {"geometry_ambiguity_margin", config.geometry_ambiguity_margin},
      {"gt_jitter_sigma_m", config.gt_jitter_sigma_m},
  };
}

json trial_to_json(const TrialResult& r) {
  json params = json::array();
  for (const auto& [key, value] : r.parameters) {
    params.push_back({key, value});
  }
  json metrics;
  if (r.reps_with_estimates > 0) {
    metrics = json{{"p_rmse_cm", r.metrics.p_rmse_cm},
                   {"axis_mean_cm", r.metrics.axis_mean_cm},
                   {"axis_std_cm", r.metrics.axis_std_cm},
                   {"q_err_mean_rad", r.metrics.q_err_mean_rad},
                   {"q_err_std_rad", r.metrics.q_err_std_rad},
                   {"samples", r.metrics.samples}};
  }
  return json{{"id", r.id},
              {"parameters", params},
              {"repetitions", r.repetitions},
              {"frames", r.frames},
              {"successes", r.successes},
              {"failures",
               {{"detection", r.failures.detection},
                {"correspondence", r.failures.correspondence},
                {"triangulation", r.failures.triangulation},
                {"geometry", r.failures.geometry},
                {"registration", r.failures.registration}}},
              {"reps_with_estimates", r.reps_with_estimates},
              {"metrics", metrics}};
}

// Builds results.csv content from the results.json document, so `run` and
// `report --format csv` emit byte-identical tables.
std::string build_results_csv(const json& doc) {
  std::ostringstream out;
  const json& trials = doc.at("trials");

  out << "trial";
  if (!trials.empty()) {
    for (const json& p : trials.at(0).at("parameters")) {
      out << ',' << p.at(0).get<std::string>();
    }
  }
  out << ",frames,successes,failed_detection,failed_correspondence,"
         "failed_triangulation,failed_geometry,failed_registration,"
         "p_rmse_cm,mean_x_cm,std_x_cm,mean_y_cm,std_y_cm,mean_z_cm,"
         "std_z_cm,q_err_mean_rad,q_err_std_rad,samples\n";

  for (const json& t : trials) {
    out << t.at("id").get<std::string>();
    for (const json& p : t.at("parameters")) {
      out << ',' << csv_number(p.at(1).get<double>());
    }
    const json& f = t.at("failures");
    out << ',' << t.at("frames").get<long>() << ','
        << t.at("successes").get<long>() << ','
        << f.at("detection").get<long>() << ','
        << f.at("correspondence").get<long>() << ','
        << f.at("triangulation").get<long>() << ','
        << f.at("geometry").get<long>() << ','
        << f.at("registration").get<long>();
    const json& m = t.at("metrics");
    if (m.is_null()) {
      out << ",,,,,,,,,,";
    } else {
      out << ',' << csv_number(m.at("p_rmse_cm").get<double>());
      for (int i = 0; i < 3; ++i) {
        out << ',' << csv_number(m.at("axis_mean_cm").at(i).get<double>())
            << ',' << csv_number(m.at("axis_std_cm").at(i).get<double>());
      }
      out << ',' << csv_number(m.at("q_err_mean_rad").get<double>()) << ','
          << csv_number(m.at("q_err_std_rad").get<double>()) << ','
          << m.at("samples").get<long>();
    }
    out << '\n';
  }
  return out.str();
}

std::string build_results_markdown(const json& doc) {
  std::ostringstream out;
  const json& trials = doc.at("trials");
  std::vector<std::string> param_keys;
  if (!trials.empty()) {
    for (const json& p : trials.at(0).at("parameters")) {
      param_keys.push_back(p.at(0).get<std::string>());
    }
  }

  out << "| trial |";
  for (const std::string& k : param_keys) out << ' ' << k << " |";
  out << " frames | ok | failed | p_rmse (cm) | x (cm) | y (cm) | z (cm) | "
         "q_err (rad) | n |\n";
  out << "|---|";
  for (std::size_t i = 0; i < param_keys.size(); ++i) out << "---|";
  out << "---|---|---|---|---|---|---|---|---|\n";

  auto pm = [](const json& m, const char* mean_key, const char* std_key,
               int idx) {
    char buf[96];
    const double mean = idx < 0 ? m.at(mean_key).get<double>()
                                : m.at(mean_key).at(idx).get<double>();
    const double sd = idx < 0 ? m.at(std_key).get<double>()
                              : m.at(std_key).at(idx).get<double>();
    std::snprintf(buf, sizeof(buf), "%.3f ± %.3f", mean, sd);
    return std::string(buf);
  };

  for (const json& t : trials) {
    out << "| " << t.at("id").get<std::string>() << " |";
    for (const json& p : t.at("parameters")) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3g", p.at(1).get<double>());
      out << ' ' << buf << " |";
    }
    const json& f = t.at("failures");
    const long failed = f.at("detection").get<long>() +
                        f.at("correspondence").get<long>() +
                        f.at("triangulation").get<long>() +
                        f.at("geometry").get<long>() +
                        f.at("registration").get<long>();
    out << ' ' << t.at("frames").get<long>() << " | "
        << t.at("successes").get<long>() << " | " << failed << " |";
    const json& m = t.at("metrics");
    if (m.is_null()) {
      out << " — | — | — | — | — | 0 |\n";
      continue;
    }
    char prmse[32];
    std::snprintf(prmse, sizeof(prmse), "%.3f",
                  m.at("p_rmse_cm").get<double>());
    out << ' ' << prmse << " | " << pm(m, "axis_mean_cm", "axis_std_cm", 0)
        << " | " << pm(m, "axis_mean_cm", "axis_std_cm", 1) << " | "
        << pm(m, "axis_mean_cm", "axis_std_cm", 2) << " | "
        << pm(m, "q_err_mean_rad", "q_err_std_rad", -1) << " | "
        << m.at("samples").get<long>() << " |\n";
  }
  return out.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  out << content;
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace

int run_command(const RunOptions& options) {
  BenchConfig config = load_config_file(options.config_path);
  if (!options.matrix_override.empty()) config.matrix = options.matrix_override;
  if (options.has_seed_override) config.seed = options.seed_override;
  if (options.jobs < 1) {
    throw std::invalid_argument("--jobs must be at least 1");
  }

  const std::vector<TrialConfig> trials = build_matrix(config);
  const StereoRig rig = make_rig(config);

  const fs::path out_dir(options.out_dir);
  fs::create_directories(out_dir / "poses");
  if (options.dump_frames) {
    for (const TrialConfig& t : trials) {
      fs::create_directories(out_dir / "frames" / t.id);
    }
  }

  std::vector<TrialResult> results(trials.size());
  std::vector<std::exception_ptr> errors(trials.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= trials.size()) return;
      try {
        const std::string dump =
            options.dump_frames
                ? (out_dir / "frames" / trials[i].id).string()
                : std::string();
        results[i] = run_trial(config, trials[i], dump);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto t_begin = std::chrono::steady_clock::now();
  if (options.jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const std::size_t count =
        std::min<std::size_t>(options.jobs, trials.size());
    pool.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  const double total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
          .count();

  json doc = config_echo(config, rig);
  doc["trials"] = json::array();
  for (const TrialResult& r : results) {
    doc["trials"].push_back(trial_to_json(r));
  }

  write_text_file(out_dir / "results.json", doc.dump(2) + "\n");
  write_text_file(out_dir / "results.csv", build_results_csv(doc));
  for (const TrialResult& r : results) {
    write_pose_csv((out_dir / "poses" / (r.id + "_truth.csv")).string(),
                   r.truth0);
    write_pose_csv((out_dir / "poses" / (r.id + "_estimate.csv")).string(),
                   r.estimates0);
  }

  // Wall-clock timing stays out of the CSV/JSON outputs so those remain
  // byte-identical across reruns of the same config and seed.
  std::ostringstream timing;
  for (const TrialResult& r : results) {
    timing << r.id << ": " << r.wall_seconds << " s\n";
  }
  timing << "total: " << total_seconds << " s\n";
  write_text_file(out_dir / "timing.log", timing.str());

  std::cout << "wrote " << results.size() << " trials to " << out_dir.string()
            << "\n";
  return 0;
}

int report_command(const std::string& in_dir, const std::string& format) {
  const fs::path path = fs::path(in_dir) / "results.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  json doc;
  in >> doc;
  if (format == "csv") {
    std::cout << build_results_csv(doc);
  } else if (format == "markdown") {
    std::cout << build_results_markdown(doc);
  } else {
    throw std::invalid_argument("format must be csv or markdown");
  }
  return 0;
}

int bench_main(const std::vector<std::string>& args) {
  CLI::App app{"stereo retroreflective-marker tracking benchmark"};
  app.require_subcommand(1);

  RunOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "execute a trial matrix");
  run->add_option("--config", run_opts.config_path, "JSON config file")
      ->required();
  run->add_option("--out", run_opts.out_dir, "output directory")->required();
  run->add_option("--matrix", run_opts.matrix_override,
                  "override the config's trial matrix")
      ->check(CLI::IsMember({"static", "angular", "linear"}));
  CLI::Option* seed_opt =
      run->add_option("--seed", run_opts.seed_override, "override the seed");
  run->add_option("--jobs", run_opts.jobs, "worker threads across trials")
      ->check(CLI::PositiveNumber);
  run->add_flag("--dump-frames", run_opts.dump_frames,
                "write repetition 0's frames as PGM");

  std::string in_dir, format = "csv";
  CLI::App* report = app.add_subcommand("report", "render run results");
  report->add_option("--in", in_dir, "run output directory")->required();
  report->add_option("--format", format, "csv or markdown")
      ->check(CLI::IsMember({"csv", "markdown"}));

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("bench");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run->parsed()) {
      run_opts.has_seed_override = seed_opt->count() > 0;
      return run_command(run_opts);
    }
    return report_command(in_dir, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace retrotrack
