#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "retrotrack/detect.hpp"

namespace retrotrack {

// Cost charged for each offset left over when two signatures have different
// sizes. Large relative to any plausible in-image offset discrepancy, so
// differing counts are a last resort, never preferred over a clean match.
inline constexpr double kMissingOffsetPenaltyPx = 100.0;

// Relative offset between two feature centers, in pixels.
struct Offset2 {
  double du = 0.0;
  double dv = 0.0;
};

// A feature's relative-position signature: its offsets to every other
// feature in the same image, sorted by (magnitude, atan2(dv, du)). The
// signature is what makes a feature recognizable across cameras — nearby
// epipolar-shifted views see nearly the same offset set.
std::vector<Offset2> signature_offsets(const std::vector<Feature>& features,
                                       std::size_t index);

// Sum of Euclidean distances between order-matched offsets, plus the
// missing-offset penalty per unmatched element when sizes differ.
double signature_cost(const std::vector<Offset2>& a,
                      const std::vector<Offset2>& b);

struct Correspondence {
  // (left feature index, right feature index), sorted by left index.
  std::vector<std::pair<int, int>> pairs;
  double total_cost = 0.0;
};

// Greedy mutual-exclusion matching over the signature-cost matrix.
// Candidate pairs are visited cheapest-first (ties broken by left then
// right index); a candidate is accepted only if *neither* of its features
// has appeared in any earlier-visited candidate. Every visited candidate
// marks both its features as seen, so once a feature has been passed over
// it can never be claimed by a worse pair — a feature whose best pairing
// was contested is treated as unresolvable rather than silently mis-
// assigned. Throws AmbiguousCorrespondenceError if the pass ends before
// min(|left|, |right|) pairs are accepted.
//
// Consequence (tested): when matching succeeds, the accepted pairs are
// exactly the min(m, n) globally cheapest entries that form an injective
// assignment, i.e. greedy success implies the optimal assignment.
Correspondence match_features(const std::vector<Feature>& left,
                              const std::vector<Feature>& right);

}  // namespace retrotrack
