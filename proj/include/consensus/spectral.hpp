#pragma once

#include <optional>

#include "consensus/graph.hpp"
#include "consensus/types.hpp"

namespace consensus {

// Spectrum of D^{-1}A, computed on the similar symmetric matrix
// D^{-1/2} A D^{-1/2} (tridiagonal-QL self-adjoint solve; eigenvalues
// accurate well past 1e-10 at the target scales). Eigenvalues ascending;
// lambda_N = 1 for connected graphs and the rest lie in [-1, 1).
struct SpectralSummary {
  Vector eigenvalues;                 // ascending
  double lambda_second = 0.0;         // lambda_{N-1}
  double lambda_abs_max_nontrivial = 0.0;  // max_{i<N} |lambda_i|
  double algebraic_connectivity = 0.0;     // mu = 1 - lambda_{N-1}
  Vector top_eigenvector;             // unit-norm eigenvector of D^{-1}A for lambda_{N-1}
  int lambda_second_multiplicity = 1;
};

SpectralSummary normalized_spectrum(const Graph& g);

struct ThresholdReport {
  double k = 0.0;
  double k_lambda = 0.0;               // K * lambda_{N-1}
  bool sharp_threshold_met = false;    // K * lambda_{N-1} < 1
  bool exponential_condition_met = false;  // K * max_{i<N}|lambda_i| < 1
  bool dense_graph_guarantee = false;      // lambda_{N-1} < 0
  std::optional<double> decay_rate;        // 1 - K * max|lambda_i|, when positive
};

ThresholdReport threshold_report(const SpectralSummary& spectrum, double k);

}  // namespace consensus
