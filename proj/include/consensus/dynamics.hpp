#pragma once

#include <optional>
#include <vector>

#include "consensus/graph.hpp"
#include "consensus/signal.hpp"
#include "consensus/types.hpp"

namespace consensus {

// f(x) = D^{-1} A s(x) - x
Vector rhs(const Graph& g, const SignalFunction& s, const Vector& x);

double rhs_residual(const Graph& g, const SignalFunction& s, const Vector& x);  // ||f(x)||_inf

// Degree-weighted mean and D-norm of the disagreement e = x - xbar 1.
double degree_weighted_mean(const Graph& g, const Vector& x);
double disagreement_norm(const Graph& g, const Vector& x);

struct Trajectory {
  std::vector<double> times;           // strictly increasing, starts at 0
  std::vector<Vector> states;          // clamped to [-1,1] at recording
  std::vector<double> residuals;       // ||f(x)||_inf per sample
  std::vector<double> disagreement;    // ||e||_D per sample
  bool converged_early = false;
  double max_overshoot = 0.0;          // max_i |x_i| - 1 before clamping, over all samples

  int samples() const { return static_cast<int>(times.size()); }
  const Vector& final_state() const { return states.back(); }
};

struct IntegrateOptions {
  double dt = 0.01;
  double t_end = 200.0;
  int record_every = 10;
  double equilibrium_tol = 1e-10;       // sustained over 10 samples -> early stop
};

// Classical fixed-step RK4. States are clamped only at recording time.
Trajectory integrate(const Graph& g, const SignalFunction& s, const Vector& x0,
                     const IntegrateOptions& opt = {});

struct OrderCheckResult {
  bool ordered = false;
  std::optional<double> first_violation_time;
};

// Cooperativity check: component-wise order of two trajectories at every
// sample (tolerance 1e-9). Requires x0_low <= x0_high.
OrderCheckResult check_order_preservation(const Graph& g, const SignalFunction& s,
                                          const Vector& x0_low, const Vector& x0_high,
                                          double dt, double t_end);

// Forward invariance of [a,b]^N along a recorded trajectory. Requires
// s(a) >= a and s(b) <= b (checked; throws precondition_not_checked).
bool check_hypercube_invariance(const Trajectory& traj, const SignalFunction& s, double a,
                                double b);

}  // namespace consensus
