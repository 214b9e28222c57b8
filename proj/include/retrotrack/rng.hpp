#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace retrotrack::detail {

// splitmix64 step (Vigna). Used both to expand seeds into engine state and
// to derive independent per-stream seeds from (base_seed, stream_index), so
// a frame's noise depends only on those two values and not on how many
// frames were rendered before it.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base;
  std::uint64_t a = splitmix64(s);
  s ^= stream * 0xd1b54a32d192ed03ull + 0x8cb92ba72f3d8dd7ull;
  std::uint64_t b = splitmix64(s);
  return a ^ (b + 0x9e3779b97f4a7c15ull);
}

// Thin wrapper over mt19937_64 with hand-rolled distributions. The standard
// distribution objects are not pinned across library implementations; these
// are, which keeps recorded outputs byte-stable anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Marsaglia polar method.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double k = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * k;
    have_spare_ = true;
    return u * k;
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  // Knuth's product method; fine for the small rates used here.
  int poisson(double lambda) {
    if (!(lambda > 0.0)) return 0;
    const double limit = std::exp(-lambda);
    int count = 0;
    double product = uniform();
    while (product > limit) {
      ++count;
      product *= uniform();
    }
    return count;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace retrotrack::detail
