#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "consensus/dynamics.hpp"
#include "consensus/graph.hpp"
#include "consensus/signal.hpp"
#include "consensus/spectral.hpp"
#include "consensus/types.hpp"

namespace consensus {

enum class EquilibriumKind { fse, nfse };
enum class LocalStability { stable, unstable, marginal };

const char* stability_label(LocalStability s);

struct EquilibriumReport {
  Vector state;
  double residual = 0.0;                 // ||D^{-1}A s(x) - x||_inf
  EquilibriumKind kind = EquilibriumKind::fse;
  double fse_value = 0.0;                // common value c, FSE only
  std::optional<Vector> jacobian_spectrum;  // ascending, real (see notes in spectral)
  std::optional<LocalStability> local_stability;
  bool near_kink = false;                // some component within 1e-6 of a slope kink
  bool scalar_jacobian_consistent = true;       // FSE: Jacobian verdict vs scalar class of c
  int basin_samples = 0;                 // multi-start hits deduplicated into this point
};

struct MultiStartPlan {
  int random_starts = 64;   // Latin hypercube points
  std::uint64_t seed = 0;
  double integrate_t_max = 200.0;
  double dt = 0.01;
};

// Multi-start equilibrium search: FSE seeds c*1 for every fixed point,
// +-eps*v_{N-1} eigenvector seeds, Latin hypercube randoms; integrate to low
// residual then damped-Newton refine; dedup at inf-distance 1e-6.
// Non-converged seeds are dropped; their count lands in *dropped_seeds.
std::vector<EquilibriumReport> find_equilibria(const Graph& g, const SignalFunction& s,
                                               const MultiStartPlan& plan = {},
                                               int* dropped_seeds = nullptr);

// Requires residual < 1e-8.
EquilibriumReport classify_equilibrium(const Graph& g, const SignalFunction& s, const Vector& x);

// Real Jacobian spectrum of D^{-1}A diag(s'(x)) - I, ascending.
Vector jacobian_spectrum(const Graph& g, const SignalFunction& s, const Vector& x);

struct NfseConditionsReport {
  double splitting_point = 0.0;         // c° used (first passing candidate)
  bool found_splitting_point = false;
  std::vector<int> set_lower;           // I = {i | x_i* < c°}
  std::vector<int> set_upper;           // J = {j | x_j* > c°}
  bool has_left_unstable_between = false;   // c_L° in (x_m*, x_M*)
  bool has_right_unstable_between = false;  // c_R° in (x_m*, x_M*)
  bool overall_pass = false;
};

// Structural necessary conditions checked on a concrete NFSE: a non-stable
// splitting point with at least two agents strictly on each side, plus
// left-/right-unstable fixed points strictly between the extremal states.
NfseConditionsReport nfse_conditions(const Graph& g, const SignalFunction& s, const Vector& x);

// Necessary signal-shape condition: a left-unstable and a right-unstable
// fixed point must both exist for any NFSE to exist at all.
bool signal_admits_nfse(const SignalFunction& s);

// Reduced dynamics of the anti-symmetric invariant manifold of the 5-line:
// (s(x2) - x1, s(x1)/2 - x2). Requires s odd.
Eigen::Vector2d reduced_line5_rhs(const SignalFunction& s, double x1, double x2);

struct BranchPoint {
  int branch_id = 0;
  double x1 = 0.0;
  Vector state;                         // full 5-dim equilibrium
  LocalStability stability_full = LocalStability::marginal;
  // Stability restricted to the invariant manifold (2x2 reduced Jacobian).
  std::optional<LocalStability> stability_manifold;
};

struct BifurcationDiagram {
  std::vector<double> gains;                    // ascending K values
  std::vector<std::vector<BranchPoint>> branches;  // per gain
  std::optional<double> detected_k_bif;
  std::optional<double> detected_k_stab;
};

// Warm-started continuation sweep on line(5) with the tanh family.
// k range within [0.5, 3.5].
BifurcationDiagram bifurcation_sweep(double k_min, double k_max, double k_step);

// Exact equilibrium enumeration for clip_linear: per saturation-region
// assignment the equilibrium condition is linear. Tractable for N <= 10.
std::vector<Vector> enumerate_clip_equilibria(const Graph& g, double k);

}  // namespace consensus
