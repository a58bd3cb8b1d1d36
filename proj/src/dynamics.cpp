#include "consensus/dynamics.hpp"

#include <cmath>

namespace consensus {

namespace {

// Shared integrator core; on_sample returns false to stop the run.
template <typename OnSample>
void run_rk4(const Graph& g, const SignalFunction& s, const Vector& x0,
             const IntegrateOptions& opt, OnSample&& on_sample) {
  if (x0.size() != g.n) fail(errc::dimension_mismatch, "x0 size != n");
  if (!(opt.dt > 0.0) || opt.t_end < opt.dt)
    throw std::invalid_argument("integrate: need dt > 0 and t_end >= dt");

  const Vector degrees = g.degrees.cast<double>();
  auto f = [&](const Vector& x) -> Vector {
    return (g.adjacency * s.apply(x)).cwiseQuotient(degrees) - x;
  };

  Vector x = x0;
  const long steps = static_cast<long>(std::llround(opt.t_end / opt.dt));
  const int stride = std::max(1, opt.record_every);
  if (!on_sample(0.0, x)) return;
  for (long step = 1; step <= steps; ++step) {
    Vector k1 = f(x);
    Vector k2 = f(x + 0.5 * opt.dt * k1);
    Vector k3 = f(x + 0.5 * opt.dt * k2);
    Vector k4 = f(x + opt.dt * k3);
    x += (opt.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (step % stride == 0 || step == steps) {
      if (!x.allFinite()) fail(errc::non_finite_state, "diverged at t = " + std::to_string(step * opt.dt));
      if (!on_sample(step * opt.dt, x)) return;
    }
  }
}

}  // namespace

Vector rhs(const Graph& g, const SignalFunction& s, const Vector& x) {
  if (x.size() != g.n) fail(errc::dimension_mismatch, "state size != n");
  return (g.adjacency * s.apply(x)).cwiseQuotient(g.degrees.cast<double>()) - x;
}

double rhs_residual(const Graph& g, const SignalFunction& s, const Vector& x) {
  return rhs(g, s, x).lpNorm<Eigen::Infinity>();
}

double degree_weighted_mean(const Graph& g, const Vector& x) {
  double total = static_cast<double>(g.degrees.sum());
  return g.degrees.cast<double>().dot(x) / total;
}

double disagreement_norm(const Graph& g, const Vector& x) {
  Vector e = x.array() - degree_weighted_mean(g, x);
  return std::sqrt(e.cwiseProduct(g.degrees.cast<double>()).dot(e));
}

Trajectory integrate(const Graph& g, const SignalFunction& s, const Vector& x0,
                     const IntegrateOptions& opt) {
  for (int i = 0; i < x0.size(); ++i)
    if (std::abs(x0[i]) > 1.0 + 1e-12)
      throw std::invalid_argument("integrate: x0 outside the state space [-1,1]^N");

  Trajectory traj;
  int quiet_samples = 0;
  run_rk4(g, s, x0, opt, [&](double t, const Vector& x) {
    double residual = rhs_residual(g, s, x);
    traj.max_overshoot = std::max(traj.max_overshoot, x.cwiseAbs().maxCoeff() - 1.0);
    traj.times.push_back(t);
    traj.states.push_back(x.cwiseMax(-1.0).cwiseMin(1.0));  // clamp at recording only
    traj.residuals.push_back(residual);
    traj.disagreement.push_back(disagreement_norm(g, traj.states.back()));
    quiet_samples = residual < opt.equilibrium_tol ? quiet_samples + 1 : 0;
    if (quiet_samples >= 10) {
      traj.converged_early = true;
      return false;
    }
    return true;
  });
  return traj;
}

OrderCheckResult check_order_preservation(const Graph& g, const SignalFunction& s,
                                          const Vector& x0_low, const Vector& x0_high,
                                          double dt, double t_end) {
  if (x0_low.size() != x0_high.size()) fail(errc::dimension_mismatch, "state sizes differ");
  for (int i = 0; i < x0_low.size(); ++i)
    if (x0_low[i] > x0_high[i])
      fail(errc::order_precondition_violated,
           "x0_low exceeds x0_high at component " + std::to_string(i));

  IntegrateOptions opt;
  opt.dt = dt;
  opt.t_end = t_end;
  opt.equilibrium_tol = 0.0;  // run both trajectories on identical sample grids
  auto low = integrate(g, s, x0_low, opt);
  auto high = integrate(g, s, x0_high, opt);

  OrderCheckResult result{true, std::nullopt};
  int n = std::min(low.samples(), high.samples());
  for (int k = 0; k < n; ++k) {
    if (((low.states[k] - high.states[k]).array() > 1e-9).any()) {
      result.ordered = false;
      result.first_violation_time = low.times[k];
      break;
    }
  }
  return result;
}

bool check_hypercube_invariance(const Trajectory& traj, const SignalFunction& s, double a,
                                double b) {
  if (!(a < b)) fail(errc::precondition_not_checked, "need a < b");
  // Roundoff slack: box corners are often bisection-refined fixed points.
  if (s.evaluate(a) < a - 1e-12 || s.evaluate(b) > b + 1e-12)
    fail(errc::precondition_not_checked, "s(a) >= a and s(b) <= b required");
  for (const auto& x : traj.states)
    if ((x.array() < a - 1e-9).any() || (x.array() > b + 1e-9).any()) return false;
  return true;
}

}  // namespace consensus
