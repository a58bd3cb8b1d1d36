#include "consensus/rng.hpp"

namespace consensus {

std::vector<Vector> latin_hypercube(int m, int n, Rng& rng) {
  std::vector<Vector> points(m, Vector(n));
  for (int dim = 0; dim < n; ++dim) {
    auto strata = rng.permutation(m);
    for (int p = 0; p < m; ++p) {
      double u = (strata[p] + rng.uniform01()) / m;  // one sample per stratum
      points[p][dim] = -1.0 + 2.0 * u;
    }
  }
  return points;
}

}  // namespace consensus
