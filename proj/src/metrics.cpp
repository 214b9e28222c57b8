#include "retrotrack/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include "retrotrack/errors.hpp"

namespace retrotrack {

namespace {

void require_sorted(const std::vector<PoseSample>& samples, const char* name) {
  if (samples.empty()) {
    throw std::invalid_argument(std::string(name) + " recording is empty");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].timestamp < samples[i - 1].timestamp) {
      throw std::invalid_argument(std::string(name) +
                                  " recording is not sorted by timestamp");
    }
  }
}

// Index of the sample whose timestamp is nearest to t; earlier wins ties.
std::size_t nearest_index(const std::vector<PoseSample>& samples, double t) {
  auto it = std::lower_bound(
      samples.begin(), samples.end(), t,
      [](const PoseSample& s, double value) { return s.timestamp < value; });
  if (it == samples.begin()) return 0;
  if (it == samples.end()) return samples.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - samples.begin());
  const std::size_t lo = hi - 1;
  const double d_lo = t - samples[lo].timestamp;
  const double d_hi = samples[hi].timestamp - t;
  return d_hi < d_lo ? hi : lo;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) {
    throw std::runtime_error("failed to format a double");
  }
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, const std::string& context) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw std::runtime_error("bad numeric field '" + field + "' in " +
                             context);
  }
  return value;
}

}  // namespace

std::vector<SyncedPair> synchronize(const std::vector<PoseSample>& reference,
                                    const std::vector<PoseSample>& estimates,
                                    double rate_hz) {
  if (!(rate_hz > 0.0)) {
    throw std::invalid_argument("synchronization rate must be positive");
  }
  require_sorted(reference, "reference");
  require_sorted(estimates, "estimate");

  const double start =
      std::max(reference.front().timestamp, estimates.front().timestamp);
  const double end =
      std::min(reference.back().timestamp, estimates.back().timestamp);
  if (end < start) {
    throw NoOverlapError("pose recordings do not overlap in time");
  }

  const long ticks = static_cast<long>(
                         std::floor((end - start) * rate_hz + 1e-9)) + 1;
  std::vector<SyncedPair> out;
  out.reserve(static_cast<std::size_t>(ticks));
  for (long k = 0; k < ticks; ++k) {
    const double t = start + static_cast<double>(k) / rate_hz;
    out.push_back({reference[nearest_index(reference, t)],
                   estimates[nearest_index(estimates, t)]});
  }
  return out;
}

double quaternion_error(const UnitQuaternion& a, const UnitQuaternion& b) {
  const double d = std::clamp(std::abs(a.dot(b)), 0.0, 1.0);
  return std::acos(d);
}

MetricReport make_report(const std::vector<SyncedPair>& pairs) {
  if (pairs.empty()) {
    throw std::invalid_argument("cannot report metrics on zero samples");
  }
  const double n = static_cast<double>(pairs.size());

  MetricReport rep;
  rep.samples = static_cast<long>(pairs.size());

  double sum_sq = 0.0;
  std::array<double, 3> sum{0.0, 0.0, 0.0};
  std::array<double, 3> sum2{0.0, 0.0, 0.0};
  double qsum = 0.0, qsum2 = 0.0;
  for (const SyncedPair& p : pairs) {
    const Point3 d =
        p.estimate.pose.translation - p.reference.pose.translation;
    const std::array<double, 3> axes{d.x, d.y, d.z};
    sum_sq += dot(d, d);
    for (int i = 0; i < 3; ++i) {
      sum[i] += axes[i];
      sum2[i] += axes[i] * axes[i];
    }
    const double q =
        quaternion_error(p.reference.pose.rotation, p.estimate.pose.rotation);
    qsum += q;
    qsum2 += q * q;
  }

  rep.p_rmse_cm = std::sqrt(sum_sq / n) * 100.0;
  for (int i = 0; i < 3; ++i) {
    const double mean = sum[i] / n;
    const double var = std::max(0.0, sum2[i] / n - mean * mean);
    rep.axis_mean_cm[i] = mean * 100.0;
    rep.axis_std_cm[i] = std::sqrt(var) * 100.0;
  }
  rep.q_err_mean_rad = qsum / n;
  const double qvar =
      std::max(0.0, qsum2 / n - rep.q_err_mean_rad * rep.q_err_mean_rad);
  rep.q_err_std_rad = std::sqrt(qvar);
  return rep;
}

void write_pose_csv(const std::string& path,
                    const std::vector<PoseSample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << "timestamp,tx,ty,tz,qw,qx,qy,qz\n";
  for (const PoseSample& s : samples) {
    const Point3& t = s.pose.translation;
    const UnitQuaternion& q = s.pose.rotation;
    out << format_double(s.timestamp) << ',' << format_double(t.x) << ','
        << format_double(t.y) << ',' << format_double(t.z) << ','
        << format_double(q.w()) << ',' << format_double(q.x()) << ','
        << format_double(q.y()) << ',' << format_double(q.z()) << '\n';
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

std::vector<PoseSample> read_pose_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != "timestamp,tx,ty,tz,qw,qx,qy,qz") {
    throw std::runtime_error("bad pose CSV header in " + path);
  }
  std::vector<PoseSample> samples;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::array<double, 8> v{};
    for (int i = 0; i < 8; ++i) {
      if (!std::getline(ss, field, ',')) {
        throw std::runtime_error("short row at " + path + ":" +
                                 std::to_string(line_no));
      }
      v[i] = parse_double(field, path + ":" + std::to_string(line_no));
    }
    if (std::getline(ss, field, ',')) {
      throw std::runtime_error("extra fields at " + path + ":" +
                               std::to_string(line_no));
    }
    PoseSample s;
    s.timestamp = v[0];
    s.pose.translation = {v[1], v[2], v[3]};
    s.pose.rotation = UnitQuaternion(v[4], v[5], v[6], v[7]);
    samples.push_back(s);
  }
  return samples;
}

}  // namespace retrotrack
