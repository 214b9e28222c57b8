#include "retrotrack/correspond.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "retrotrack/errors.hpp"

namespace retrotrack {

std::vector<Offset2> signature_offsets(const std::vector<Feature>& features,
                                       std::size_t index) {
  std::vector<Offset2> offsets;
  offsets.reserve(features.size() > 0 ? features.size() - 1 : 0);
  const Pixel& origin = features[index].center;
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (j == index) continue;
    offsets.push_back(
        {features[j].center.u - origin.u, features[j].center.v - origin.v});
  }
  std::sort(offsets.begin(), offsets.end(),
            [](const Offset2& a, const Offset2& b) {
              const double ma = std::hypot(a.du, a.dv);
              const double mb = std::hypot(b.du, b.dv);
              if (ma != mb) return ma < mb;
              return std::atan2(a.dv, a.du) < std::atan2(b.dv, b.du);
            });
  return offsets;
}

double signature_cost(const std::vector<Offset2>& a,
                      const std::vector<Offset2>& b) {
  const std::size_t common = std::min(a.size(), b.size());
  double cost = 0.0;
  for (std::size_t k = 0; k < common; ++k) {
    cost += std::hypot(a[k].du - b[k].du, a[k].dv - b[k].dv);
  }
  cost += kMissingOffsetPenaltyPx *
          static_cast<double>(std::max(a.size(), b.size()) - common);
  return cost;
}

Correspondence match_features(const std::vector<Feature>& left,
                              const std::vector<Feature>& right) {
  const std::size_t m = left.size(), n = right.size();
  const std::size_t want = std::min(m, n);
  Correspondence result;
  if (want == 0) return result;

  std::vector<std::vector<Offset2>> lsig(m), rsig(n);
  for (std::size_t i = 0; i < m; ++i) lsig[i] = signature_offsets(left, i);
  for (std::size_t j = 0; j < n; ++j) rsig[j] = signature_offsets(right, j);

  std::vector<std::tuple<double, int, int>> order;
  order.reserve(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      order.emplace_back(signature_cost(lsig[i], rsig[j]),
                         static_cast<int>(i), static_cast<int>(j));
    }
  }
  std::sort(order.begin(), order.end());

  std::vector<char> seen_left(m, 0), seen_right(n, 0);
  for (const auto& [cost, i, j] : order) {
    if (!seen_left[i] && !seen_right[j]) {
      result.pairs.emplace_back(i, j);
      result.total_cost += cost;
    }
    // Both features are burned whether or not the pair was accepted: a
    // feature that lost its cheapest pairing must not fall through to a
    // worse one.
    seen_left[i] = 1;
    seen_right[j] = 1;
    if (result.pairs.size() == want) break;
  }
  if (result.pairs.size() != want) {
    throw AmbiguousCorrespondenceError(
        "left/right feature matching is ambiguous: " +
        std::to_string(result.pairs.size()) + " of " + std::to_string(want) +
        " pairs resolved");
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  return result;
}

}  // namespace retrotrack
