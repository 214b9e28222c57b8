#include "retrotrack/detect.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "retrotrack/errors.hpp"

namespace retrotrack {

namespace {

void validate(const DetectParams& p) {
  if (!(p.intensity_threshold > 0.0 && p.intensity_threshold < 1.0)) {
    throw std::invalid_argument("intensity threshold must be in (0, 1)");
  }
  if (!(p.min_area > 0.0) || !(p.max_area > p.min_area)) {
    throw std::invalid_argument("need 0 < min_area < max_area");
  }
  if (p.max_features < 1) {
    throw std::invalid_argument("max_features must be positive");
  }
}

// Moore-neighbor clockwise order in image coordinates (y grows down),
// starting west: W NW N NE E SE S SW.
constexpr int kDx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

int direction_index(int dx, int dy) {
  for (int d = 0; d < 8; ++d) {
    if (kDx[d] == dx && kDy[d] == dy) return d;
  }
  throw std::logic_error("not a neighbor offset");
}

// Traces the outer boundary of the component with the given label, starting
// from its row-major-first pixel, using Moore neighbor tracing. The trace
// ends when the start pixel is re-entered with the starting backtrack
// (Jacob's stopping criterion), which closes the loop even when the chain
// passes through the start pixel more than once.
std::vector<Pixel> trace_boundary(const std::vector<int>& labels, int width,
                                  int height, int label, int start_x,
                                  int start_y) {
  (void)height;
  auto is_inside = [&](int x, int y) {
    return labels[y * width + x] == label;
  };

  std::vector<Pixel> chain;
  chain.push_back({static_cast<double>(start_x), static_cast<double>(start_y)});

  // The scan found this pixel left-to-right, so its west neighbor is
  // outside the component (and inside the image: border components were
  // discarded before tracing).
  int bx = start_x - 1, by = start_y;
  int cx = start_x, cy = start_y;
  const int start_backtrack_dir = direction_index(bx - cx, by - cy);

  const std::size_t step_limit =
      8 * static_cast<std::size_t>(width) * height + 8;
  std::size_t steps = 0;
  while (true) {
    if (++steps > step_limit) {
      throw std::logic_error("boundary trace failed to close");
    }
    const int back_dir = direction_index(bx - cx, by - cy);
    int found = -1;
    int last_bg_dir = back_dir;
    for (int k = 1; k <= 8; ++k) {
      const int d = (back_dir + k) % 8;
      const int nx = cx + kDx[d];
      const int ny = cy + kDy[d];
      if (is_inside(nx, ny)) {
        found = d;
        break;
      }
      last_bg_dir = d;
    }
    if (found < 0) {
      return chain;  // isolated pixel
    }
    // Backtrack for the next step is the last background cell visited
    // before entering the component again.
    bx = cx + kDx[last_bg_dir];
    by = cy + kDy[last_bg_dir];
    cx = cx + kDx[found];
    cy = cy + kDy[found];
    if (cx == start_x && cy == start_y &&
        direction_index(bx - cx, by - cy) == start_backtrack_dir) {
      return chain;
    }
    chain.push_back({static_cast<double>(cx), static_cast<double>(cy)});
  }
}

}  // namespace

BinaryImage threshold(const Frame& frame, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("intensity threshold must be in (0, 1)");
  }
  BinaryImage out;
  out.width = frame.width;
  out.height = frame.height;
  out.data.resize(frame.intensities.size());
  for (std::size_t i = 0; i < frame.intensities.size(); ++i) {
    out.data[i] = frame.intensities[i] >= level ? 1 : 0;
  }
  return out;
}

std::vector<BoundaryChain> extract_outer_contours(const BinaryImage& image,
                                                  const DetectParams& params) {
  validate(params);
  const int w = image.width, h = image.height;
  if (w <= 0 || h <= 0) {
    throw std::invalid_argument("empty binary image");
  }
  const std::size_t n = static_cast<std::size_t>(w) * h;

  // Infill: flood the background 4-connected from the image border; any
  // background pixel the flood cannot reach is enclosed by a component and
  // becomes foreground. Complementary connectivity (8 for foreground, 4 for
  // background) keeps diagonal walls hole-tight.
  std::vector<std::uint8_t> filled(image.data.begin(), image.data.end());
  {
    std::vector<std::uint8_t> reached(n, 0);
    std::vector<int> stack;
    auto push_bg = [&](int x, int y) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!reached[i] && image.data[i] == 0) {
        reached[i] = 1;
        stack.push_back(static_cast<int>(i));
      }
    };
    for (int x = 0; x < w; ++x) {
      push_bg(x, 0);
      push_bg(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
      push_bg(0, y);
      push_bg(w - 1, y);
    }
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      const int x = i % w, y = i / w;
      if (x > 0) push_bg(x - 1, y);
      if (x + 1 < w) push_bg(x + 1, y);
      if (y > 0) push_bg(x, y - 1);
      if (y + 1 < h) push_bg(x, y + 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!image.data[i] && !reached[i]) filled[i] = 1;
    }
  }

  // 8-connected labeling of the infilled mask.
  std::vector<int> labels(n, 0);
  struct Component {
    int label;
    long area;
    bool touches_border;
    int start_x, start_y;  // row-major first pixel
  };
  std::vector<Component> components;
  std::vector<int> stack;
  int next_label = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!filled[seed] || labels[seed] != 0) continue;
    const int label = ++next_label;
    Component comp{label, 0, false, static_cast<int>(seed % w),
                   static_cast<int>(seed / w)};
    labels[seed] = label;
    stack.push_back(static_cast<int>(seed));
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      const int x = i % w, y = i / w;
      ++comp.area;
      if (x == 0 || y == 0 || x == w - 1 || y == h - 1) {
        comp.touches_border = true;
      }
      for (int d = 0; d < 8; ++d) {
        const int nx = x + kDx[d], ny = y + kDy[d];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (filled[j] && labels[j] == 0) {
          labels[j] = label;
          stack.push_back(static_cast<int>(j));
        }
      }
    }
    components.push_back(comp);
  }

  std::vector<const Component*> kept;
  for (const Component& c : components) {
    if (c.touches_border) continue;
    if (c.area < params.min_area || c.area > params.max_area) continue;
    kept.push_back(&c);
  }
  if (static_cast<int>(kept.size()) > params.max_features) {
    throw TooManyFeaturesError("feature count " + std::to_string(kept.size()) +
                               " exceeds cap " +
                               std::to_string(params.max_features));
  }

  std::vector<BoundaryChain> chains;
  chains.reserve(kept.size());
  for (const Component* c : kept) {
    BoundaryChain chain;
    chain.points =
        trace_boundary(labels, w, h, c->label, c->start_x, c->start_y);
    chain.area = static_cast<double>(c->area);
    chains.push_back(std::move(chain));
  }
  return chains;
}

Feature fit_feature(const BoundaryChain& chain) {
  const std::size_t n = chain.points.size();
  if (n < 6) {
    throw DegenerateFitError("need at least 6 boundary points for a conic");
  }

  // Direct least-squares ellipse fit (Halir & Flusser's numerically stable
  // split of Fitzgibbon's method). Coordinates are mean-centered first;
  // the quadratic/linear split keeps the scatter matrices well conditioned.
  double mu = 0.0, mv = 0.0;
  for (const Pixel& p : chain.points) {
    mu += p.u;
    mv += p.v;
  }
  mu /= static_cast<double>(n);
  mv /= static_cast<double>(n);

  Eigen::MatrixXd d1(n, 3), d2(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = chain.points[i].u - mu;
    const double y = chain.points[i].v - mv;
    d1(i, 0) = x * x;
    d1(i, 1) = x * y;
    d1(i, 2) = y * y;
    d2(i, 0) = x;
    d2(i, 1) = y;
    d2(i, 2) = 1.0;
  }
  const Eigen::Matrix3d s1 = d1.transpose() * d1;
  const Eigen::Matrix3d s2 = d1.transpose() * d2;
  const Eigen::Matrix3d s3 = d2.transpose() * d2;

  Eigen::FullPivLU<Eigen::Matrix3d> lu(s3);
  if (!lu.isInvertible()) {
    throw DegenerateFitError("linear scatter matrix is singular");
  }
  const Eigen::Matrix3d t = -lu.solve(s2.transpose());
  const Eigen::Matrix3d m = s1 + s2 * t;
  Eigen::Matrix3d m2;
  m2.row(0) = m.row(2) / 2.0;
  m2.row(1) = -m.row(1);
  m2.row(2) = m.row(0) / 2.0;

  Eigen::EigenSolver<Eigen::Matrix3d> es(m2);
  Eigen::Vector3d a1 = Eigen::Vector3d::Zero();
  bool found = false;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(es.eigenvalues()[k].imag()) >
        1e-9 * (1.0 + std::abs(es.eigenvalues()[k].real()))) {
      continue;
    }
    const Eigen::Vector3d v = es.eigenvectors().col(k).real();
    // The ellipse-specific constraint 4*a*c - b^2 > 0 singles out one
    // eigenvector.
    if (4.0 * v(0) * v(2) - v(1) * v(1) > 0.0) {
      a1 = v;
      found = true;
      break;
    }
  }
  if (!found) {
    throw DegenerateFitError("fitted conic is not an ellipse");
  }
  const Eigen::Vector3d a2 = t * a1;

  const double ca = a1(0), cb = a1(1), cc = a1(2);
  const double cd = a2(0), ce = a2(1), cf = a2(2);
  const double disc = 4.0 * ca * cc - cb * cb;
  if (!(disc > 1e-300)) {
    throw DegenerateFitError("ellipse discriminant vanished");
  }
  const double xc = (cb * ce - 2.0 * cc * cd) / disc;
  const double yc = (cb * cd - 2.0 * ca * ce) / disc;
  const double f_centered =
      ca * xc * xc + cb * xc * yc + cc * yc * yc + cd * xc + ce * yc + cf;

  Eigen::Matrix2d q;
  q << ca, cb / 2.0, cb / 2.0, cc;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> qe(q);
  const double l0 = qe.eigenvalues()(0), l1 = qe.eigenvalues()(1);
  // Both eigenvalues share a sign (disc > 0); -f_centered must match it or
  // the conic has no real points.
  const double a_sq = -f_centered / l0;
  const double b_sq = -f_centered / l1;
  if (!(a_sq > 0.0) || !(b_sq > 0.0)) {
    throw DegenerateFitError("conic has no real ellipse points");
  }
  const double semi_a = std::sqrt(a_sq), semi_b = std::sqrt(b_sq);

  Feature f;
  f.center = {xc + mu, yc + mv};
  f.radius = (semi_a + semi_b) / 2.0;
  f.area = chain.area;
  if (!std::isfinite(f.center.u) || !std::isfinite(f.center.v) ||
      !std::isfinite(f.radius)) {
    throw DegenerateFitError("non-finite ellipse parameters");
  }
  return f;
}

std::vector<Feature> detect(const Frame& frame, const DetectParams& params) {
  validate(params);
  const BinaryImage mask = threshold(frame, params.intensity_threshold);
  const std::vector<BoundaryChain> chains =
      extract_outer_contours(mask, params);
  std::vector<Feature> features;
  features.reserve(chains.size());
  for (const BoundaryChain& chain : chains) {
    try {
      features.push_back(fit_feature(chain));
    } catch (const DegenerateFitError&) {
      // A component that cannot carry an ellipse is noise, not a reason to
      // drop the frame.
    }
  }
  std::sort(features.begin(), features.end(),
            [](const Feature& a, const Feature& b) {
              if (a.area != b.area) return a.area > b.area;
              if (a.center.u != b.center.u) return a.center.u < b.center.u;
              return a.center.v < b.center.v;
            });
  return features;
}

}  // namespace retrotrack
