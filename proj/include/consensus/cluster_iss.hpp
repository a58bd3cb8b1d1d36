#pragma once

#include <vector>

#include "consensus/dynamics.hpp"
#include "consensus/graph.hpp"
#include "consensus/signal.hpp"
#include "consensus/types.hpp"

namespace consensus {

// Total perturbation acting on the cluster:
//   p = (Dtilde_in^{-1} - D_in^{-1}) A_in s(x') + Dtilde_in^{-1} S A_ext s(x)
// (internal degree-mismatch term plus external-neighbor term).
Vector perturbation(const Graph& g, const SignalFunction& s, const Vector& x,
                    const SubgraphDecomposition& dec);

struct ResidualSplit {
  Vector residual;  // ptilde = p - pbar 1, D_in-weighted mean zero
  double mean = 0.0;  // pbar
};

ResidualSplit residual_perturbation(const Vector& p, const SubgraphDecomposition& dec);

// ||v||_{D_in} with the internal-degree weights.
double din_norm(const SubgraphDecomposition& dec, const Vector& v);

// Internal disagreement e = x' - xbar' 1 with D_in-weighted mean xbar'.
double internal_disagreement_norm(const SubgraphDecomposition& dec, const Vector& x_sub);

struct ClusterAnalysis {
  Vector internal_spectrum;    // ascending, of D_in^{-1} A_in
  double alpha_in = 1.0;       // 1 - K max nontrivial |lambda_i(D_in^{-1}A_in)|
  bool cohesion_met = false;   // alpha_in > 0
  bool degenerate = false;     // single-vertex cluster
  // Degree-only bounds on sup ||ptilde||^2_{D_in}. Both are reported: the
  // tight constant 2 is checked empirically on every run; the constant 4
  // follows directly from |s| <= 1 per component.
  double structural_bound = 0.0;               // 2 sum d_i^in (d_i^ext / d_i)^2
  double structural_bound_conservative = 0.0;  // 4 sum d_i^in (d_i^ext / d_i)^2
  double empirical_p_sup = 0.0;    // sup ||ptilde||_{D_in} along the trajectory
  double ultimate_bound = 0.0;     // empirical_p_sup / alpha_in (cohesive clusters)
};

struct IssTrace {
  std::vector<double> times;
  std::vector<double> internal_disagreement;   // ||e(t)||_{D_in}
  std::vector<double> residual_perturbation;   // ||ptilde(x(t))||_{D_in}
  std::vector<double> iss_bound;  // ||e(0)|| e^{-a t} + sup_{tau<=t}||ptilde|| / a
  bool applicable = false;        // alpha_in > 0
  bool holds_at_all_samples = false;
};

struct ClusterResult {
  ClusterAnalysis analysis;
  IssTrace trace;
};

// Evaluates the ISS inequality along a recorded trajectory of (g, s).
// Emits the analysis even when alpha_in <= 0; the trace is then marked
// inapplicable.
ClusterResult analyze_cluster(const Graph& g, const SignalFunction& s,
                              const SubgraphDecomposition& dec, const Trajectory& traj);

}  // namespace consensus
