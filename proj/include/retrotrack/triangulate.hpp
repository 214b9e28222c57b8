#pragma once

#include "retrotrack/geometry.hpp"

namespace retrotrack {

struct TriangulationParams {
  int max_iterations = 10;
  // Convergence: stop once no projective depth changed by more than this
  // relative amount between reweighting passes.
  double weight_tolerance = 1e-8;
};

// Two-view triangulation: homogeneous DLT solved by SVD, then iteratively
// reweighted so the algebraic residual approximates image-plane error
// (each equation divided by its point's projective depth from the previous
// pass). Throws IllConditionedError when the system does not determine a
// finite point.
Point3 triangulate(const Pixel& left_px, const Pixel& right_px,
                   const ProjectionMatrix& left, const ProjectionMatrix& right,
                   const TriangulationParams& params = {});

}  // namespace retrotrack
