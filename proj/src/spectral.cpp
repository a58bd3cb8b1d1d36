#include "consensus/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace consensus {

SpectralSummary normalized_spectrum(const Graph& g) {
  const int n = g.n;
  Vector inv_sqrt_d(n);
  for (int i = 0; i < n; ++i) inv_sqrt_d[i] = 1.0 / std::sqrt(static_cast<double>(g.degrees[i]));

  // D^{-1/2} A D^{-1/2}: symmetric, same spectrum as D^{-1}A.
  Matrix sym = inv_sqrt_d.asDiagonal() * g.adjacency * inv_sqrt_d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) fail(errc::eigen_solve_failure, "normalized adjacency");

  SpectralSummary out;
  out.eigenvalues = solver.eigenvalues();  // ascending
  out.lambda_second = out.eigenvalues[n - 2];
  out.algebraic_connectivity = 1.0 - out.lambda_second;
  out.lambda_abs_max_nontrivial = 0.0;
  for (int i = 0; i < n - 1; ++i)
    out.lambda_abs_max_nontrivial = std::max(out.lambda_abs_max_nontrivial,
                                             std::abs(out.eigenvalues[i]));

  out.lambda_second_multiplicity = 0;
  for (int i = 0; i < n - 1; ++i)
    if (std::abs(out.eigenvalues[i] - out.lambda_second) < 1e-10) ++out.lambda_second_multiplicity;

  // Map the eigenvector back to D^{-1}A coordinates (first column of the
  // eigenspace basis when lambda_{N-1} is repeated), then unit-normalize
  // with the largest-magnitude entry positive.
  Vector v = inv_sqrt_d.asDiagonal() * solver.eigenvectors().col(n - 2);
  v.normalize();
  int imax = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  if (v[imax] < 0.0) v = -v;
  out.top_eigenvector = v;
  return out;
}

ThresholdReport threshold_report(const SpectralSummary& spectrum, double k) {
  if (k <= 0.0) fail(errc::non_positive_k, "k = " + std::to_string(k));
  ThresholdReport r;
  r.k = k;
  r.k_lambda = k * spectrum.lambda_second;
  r.sharp_threshold_met = r.k_lambda < 1.0;
  r.exponential_condition_met = k * spectrum.lambda_abs_max_nontrivial < 1.0;
  r.dense_graph_guarantee = spectrum.lambda_second < 0.0;
  if (r.exponential_condition_met)
    r.decay_rate = 1.0 - k * spectrum.lambda_abs_max_nontrivial;
  return r;
}

}  // namespace consensus
