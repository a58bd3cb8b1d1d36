#pragma once

#include <cstdint>
#include <vector>

#include "consensus/types.hpp"

namespace consensus {

// SplitMix64 stream. One root seed splits into independent per-purpose
// streams via stream(); adding a new purpose never perturbs existing ones.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // in [0, 1)
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Fisher-Yates over [0, n)
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(next() % static_cast<std::uint64_t>(i + 1));
      std::swap(p[i], p[j]);
    }
    return p;
  }

private:
  std::uint64_t state_;
};

// Counter-based split: (root, purpose, index) -> independent stream.
inline Rng stream(std::uint64_t root_seed, std::uint64_t purpose, std::uint64_t index = 0) {
  Rng mix(root_seed ^ (purpose * 0xd6e8feb86659fd93ULL) ^ (index * 0xa5a5a5a5a5a5a5a5ULL));
  return Rng(mix.next());
}

namespace purpose {
constexpr std::uint64_t initial_condition = 1;
constexpr std::uint64_t multistart = 2;
constexpr std::uint64_t graph_generation = 3;
constexpr std::uint64_t signal_generation = 4;
}  // namespace purpose

// M points in [-1,1]^n, one per stratum along each axis.
std::vector<Vector> latin_hypercube(int m, int n, Rng& rng);

}  // namespace consensus
