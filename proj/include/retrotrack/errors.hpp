#pragma once

#include <stdexcept>
#include <string>

namespace retrotrack {

// Base class for every recoverable tracking failure. Input-validation
// problems (bad configs, malformed files) throw std::invalid_argument /
// std::runtime_error directly; these types are reserved for conditions a
// benchmark run is expected to survive and count.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A marker center projects to non-positive depth in some camera.
class BehindCameraError : public Error {
 public:
  using Error::Error;
};

// More surviving blobs than the detector cap; the frame is discarded rather
// than guessed at.
class TooManyFeaturesError : public Error {
 public:
  using Error::Error;
};

// Ellipse fit impossible (too few boundary points or conic not elliptical).
class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

// Greedy left/right matching could not produce a full assignment without
// reusing a feature that an earlier candidate already touched.
class AmbiguousCorrespondenceError : public Error {
 public:
  using Error::Error;
};

// Two label permutations explain the observed triangle about equally well.
class GeometryAmbiguityError : public Error {
 public:
  using Error::Error;
};

// Observed points are (near-)collinear or coincident; no unique rigid fit.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

// Triangulated ray geometry too ill-conditioned to solve.
class IllConditionedError : public Error {
 public:
  using Error::Error;
};

// Two pose recordings share no time interval, so they cannot be compared.
class NoOverlapError : public Error {
 public:
  using Error::Error;
};

// Where in the per-frame pipeline a failure happened. Used to bucket failure
// counters in benchmark reports.
enum class PipelineStage {
  detection,
  correspondence,
  triangulation,
  geometry,
  registration,
};

const char* to_string(PipelineStage stage);

// Wraps any module error with the stage it came from so callers can keep
// per-stage statistics without knowing the concrete types.
class TrackError : public Error {
 public:
  TrackError(PipelineStage stage, const std::string& what)
      : Error(std::string(to_string(stage)) + ": " + what), stage_(stage) {}

  PipelineStage stage() const { return stage_; }

 private:
  PipelineStage stage_;
};

}  // namespace retrotrack
