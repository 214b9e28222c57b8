#pragma once

#include <cstdint>
#include <vector>

#include "retrotrack/geometry.hpp"
#include "retrotrack/sim.hpp"

namespace retrotrack {

struct DetectParams {
  double intensity_threshold = 0.5;  // in (0, 1)
  double min_area = 4.0;             // px^2, filled component area
  double max_area = 10000.0;         // px^2
  int max_features = 32;
};

// Sub-pixel marker observation.
struct Feature {
  Pixel center;
  double radius = 0.0;  // (semi-major + semi-minor) / 2, px
  double area = 0.0;    // filled component area, px^2
};

struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // 0 or 1, row-major

  bool at(int x, int y) const { return data[y * width + x] != 0; }
};

// pixel true iff intensity >= level.
BinaryImage threshold(const Frame& frame, double level);

// Closed 8-connected outer boundary of one filled component, plus its
// filled pixel count. Boundary pixels are stored at their integer centers.
struct BoundaryChain {
  std::vector<Pixel> points;
  double area = 0.0;
};

// Connected-component analysis on the thresholded image: components are
// 8-connected, interior holes are infilled (so nested contours never
// surface), components touching the image border are discarded, and the
// filled area must land in [min_area, max_area]. Throws
// TooManyFeaturesError when more than max_features components survive.
std::vector<BoundaryChain> extract_outer_contours(const BinaryImage& image,
                                                  const DetectParams& params);

// Direct least-squares ellipse fit to the boundary. Throws
// DegenerateFitError when the chain has fewer than 6 points or the fitted
// conic is not an ellipse.
Feature fit_feature(const BoundaryChain& chain);

// threshold -> extract_outer_contours -> fit_feature. Individual degenerate
// fits are skipped; TooManyFeaturesError propagates. Output sorted by
// descending area, ties by center u then v.
std::vector<Feature> detect(const Frame& frame, const DetectParams& params = {});

}  // namespace retrotrack
