#include "consensus/equilibria.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "consensus/rng.hpp"

namespace consensus {

namespace {
constexpr double kEquilibriumTol = 1e-8;   // residual bound for any emitted report
constexpr double kSyncTol = 1e-6;          // FSE spread tolerance
constexpr double kDedupTol = 1e-6;         // inf-distance between distinct equilibria
constexpr double kStabilityBand = 1e-8;    // |max Re| below this is marginal
}  // namespace

const char* stability_label(LocalStability s) {
  switch (s) {
    case LocalStability::stable: return "stable";
    case LocalStability::unstable: return "unstable";
    case LocalStability::marginal: return "marginal";
  }
  return "?";
}

Vector jacobian_spectrum(const Graph& g, const SignalFunction& s, const Vector& x) {
  if (!s.has_slope()) fail(errc::assumption_violation, "signal has no slope");
  const int n = g.n;
  // J + I = D^{-1} A diag(s') shares its spectrum with the symmetric
  // M^{1/2} (D^{-1/2} A D^{-1/2}) M^{1/2}, M = diag(s') >= 0, so the
  // Jacobian spectrum is real.
  Vector m_sqrt(n), inv_sqrt_d(n);
  for (int i = 0; i < n; ++i) {
    m_sqrt[i] = std::sqrt(std::max(0.0, s.slope(x[i])));
    inv_sqrt_d[i] = 1.0 / std::sqrt(static_cast<double>(g.degrees[i]));
  }
  Matrix sym = m_sqrt.asDiagonal() * (inv_sqrt_d.asDiagonal() * g.adjacency *
                                      inv_sqrt_d.asDiagonal()) * m_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) fail(errc::eigen_solve_failure, "jacobian spectrum");
  return solver.eigenvalues().array() - 1.0;
}

namespace {

LocalStability stability_from_max_eig(double max_eig) {
  if (max_eig < -kStabilityBand) return LocalStability::stable;
  if (max_eig > kStabilityBand) return LocalStability::unstable;
  return LocalStability::marginal;
}

bool state_near_kink(const SignalFunction& s, const Vector& x) {
  if (s.family == SignalFamily::clip_linear) {
    double kink = 1.0 / s.lipschitz_k;
    for (int i = 0; i < x.size(); ++i)
      if (std::abs(std::abs(x[i]) - kink) < 1e-6) return true;
  }
  if (s.family == SignalFamily::sine_staircase) {
    for (int i = 0; i < x.size(); ++i) {
      double nearest = std::round(x[i] * 2.0) / 2.0;
      if (std::abs(x[i] - nearest) < 1e-6) return true;
    }
  }
  return false;
}

// The N-dim Jacobian verdict must not contradict the scalar classification
// of c. Marginal Jacobians are compatible with both (zero eigenvalues
// genuinely occur at semi-stable and tangent fixed points).
bool scalar_jacobian_agrees(Stability scalar, LocalStability jac) {
  if (scalar == Stability::stable)
    return jac == LocalStability::stable || jac == LocalStability::marginal;
  return jac == LocalStability::unstable || jac == LocalStability::marginal;
}

}  // namespace

EquilibriumReport classify_equilibrium(const Graph& g, const SignalFunction& s, const Vector& x) {
  double residual = rhs_residual(g, s, x);
  if (residual >= kEquilibriumTol)
    fail(errc::not_an_equilibrium, "residual " + std::to_string(residual));

  EquilibriumReport r;
  r.state = x;
  r.residual = residual;
  double spread = x.maxCoeff() - x.minCoeff();
  r.kind = spread < kSyncTol ? EquilibriumKind::fse : EquilibriumKind::nfse;
  if (r.kind == EquilibriumKind::fse) r.fse_value = x.mean();
  r.near_kink = state_near_kink(s, x);

  if (s.has_slope()) {
    r.jacobian_spectrum = jacobian_spectrum(g, s, x);
    double max_eig = r.jacobian_spectrum->maxCoeff();
    r.local_stability = stability_from_max_eig(max_eig);
    if (r.kind == EquilibriumKind::fse) {
      // Cross-check against the scalar classification of the nearest
      // catalogued fixed point (the state is only residual-accurate, so c
      // itself may sit slightly off the exact fixed point).
      auto catalogue = find_fixed_points(s);
      const FixedPointRecord* nearest = nullptr;
      double best = 1e9;
      for (const auto& fp : catalogue) {
        double d = std::max({fp.lo - r.fse_value, r.fse_value - fp.hi, 0.0});
        if (d < best) {
          best = d;
          nearest = &fp;
        }
      }
      if (nearest && best < kSyncTol)
        r.scalar_jacobian_consistent = scalar_jacobian_agrees(nearest->classification, *r.local_stability);
    }
  }
  return r;
}

namespace {

// Damped Newton refinement of D^{-1}A s(x) - x = 0; iterates clamped to the
// state space. Success needs both a tiny residual and a converged state
// step: residual alone cannot separate nearby points along degenerate
// directions (e.g. the cubic-order origin of tanh with unit gain).
bool newton_refine(const Graph& g, const SignalFunction& s, Vector& x, int max_steps = 50) {
  if (!s.has_slope()) return false;
  const Vector degrees = g.degrees.cast<double>();
  double res = rhs_residual(g, s, x);
  double last_step = 1.0;
  for (int step = 0; step < max_steps; ++step) {
    if (res < 1e-12 && last_step < 1e-9) return true;
    Matrix jac = g.adjacency * s.apply_slope(x).asDiagonal();
    for (int i = 0; i < g.n; ++i) jac.row(i) /= degrees[i];
    jac -= Matrix::Identity(g.n, g.n);
    Vector f = rhs(g, s, x);
    Vector dx = jac.colPivHouseholderQr().solve(-f);
    if (!dx.allFinite()) return false;
    double damping = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 12; ++halving) {
      Vector trial = (x + damping * dx).cwiseMax(-1.0).cwiseMin(1.0);
      double trial_res = rhs_residual(g, s, trial);
      if (trial_res < res || (trial_res == res && res == 0.0)) {
        last_step = (trial - x).lpNorm<Eigen::Infinity>();
        x = trial;
        res = trial_res;
        improved = true;
        break;
      }
      damping *= 0.5;
    }
    if (!improved) break;
  }
  return res < 1e-12 && last_step < 1e-9;
}

}  // namespace

std::vector<EquilibriumReport> find_equilibria(const Graph& g, const SignalFunction& s,
                                               const MultiStartPlan& plan, int* dropped_seeds) {
  std::vector<Vector> seeds;

  // FSE seeds: c * 1 for every fixed point of s (interval endpoints included).
  for (const auto& fp : find_fixed_points(s)) {
    seeds.push_back(Vector::Constant(g.n, fp.lo));
    if (fp.is_interval()) {
      seeds.push_back(Vector::Constant(g.n, fp.value()));
      seeds.push_back(Vector::Constant(g.n, fp.hi));
    }
  }

  // Eigenvector seeds +-eps v_{N-1}, eps in {0.1, 0.5, 1} / K, clipped.
  auto spectrum = normalized_spectrum(g);
  for (double scale : {0.1, 0.5, 1.0}) {
    Vector v = (scale / s.lipschitz_k) * spectrum.top_eigenvector;
    seeds.push_back(v.cwiseMax(-1.0).cwiseMin(1.0));
    seeds.push_back((-v).cwiseMax(-1.0).cwiseMin(1.0));
  }

  // Latin-hypercube randoms.
  Rng rng = stream(plan.seed, purpose::multistart);
  for (auto& p : latin_hypercube(plan.random_starts, g.n, rng)) seeds.push_back(std::move(p));

  struct Candidate {
    Vector state;
    int hits = 0;
  };
  std::vector<Candidate> found;
  int dropped = 0;

  IntegrateOptions opt;
  opt.dt = plan.dt;
  opt.record_every = 10;
  for (const auto& seed : seeds) {
    Vector x = seed;
    bool converged = false;
    // Alternate short integration bursts with Newton refinement.
    double t_done = 0.0;
    const double burst = 25.0;
    while (t_done < plan.integrate_t_max) {
      opt.t_end = burst;
      auto traj = integrate(g, s, x, opt);
      x = traj.final_state();
      t_done += burst;
      if (newton_refine(g, s, x)) {
        converged = true;
        break;
      }
      if (traj.converged_early) {
        converged = rhs_residual(g, s, x) < kEquilibriumTol;
        break;
      }
    }
    if (!converged && rhs_residual(g, s, x) < kEquilibriumTol) converged = true;
    if (!converged) {
      ++dropped;
      continue;
    }

    bool merged = false;
    for (auto& c : found) {
      if ((c.state - x).lpNorm<Eigen::Infinity>() < kDedupTol) {
        c.hits += 1;
        merged = true;
        break;
      }
    }
    if (!merged) found.push_back({x, 1});
  }

  if (dropped_seeds) *dropped_seeds = dropped;
  std::vector<EquilibriumReport> reports;
  reports.reserve(found.size());
  for (const auto& c : found) {
    auto r = classify_equilibrium(g, s, c.state);
    r.basin_samples = c.hits;
    reports.push_back(std::move(r));
  }
  return reports;
}

NfseConditionsReport nfse_conditions(const Graph& g, const SignalFunction& s, const Vector& x) {
  auto eq = classify_equilibrium(g, s, x);
  if (eq.kind != EquilibriumKind::nfse) fail(errc::not_nfse, "equilibrium is an FSE");

  NfseConditionsReport report;
  const double x_min = x.minCoeff();
  const double x_max = x.maxCoeff();

  auto records = find_fixed_points(s);
  std::vector<double> candidates;  // non-stable fixed points (splitting candidates)
  for (const auto& fp : records) {
    if (fp.is_stable()) continue;
    candidates.push_back(fp.value());
    if (fp.is_interval()) {
      candidates.push_back(fp.lo);
      candidates.push_back(fp.hi);
    }
  }

  auto sets_for = [&](double c) {
    std::pair<std::vector<int>, std::vector<int>> sets;
    for (int i = 0; i < x.size(); ++i) {
      if (x[i] < c) sets.first.push_back(i);
      if (x[i] > c) sets.second.push_back(i);
    }
    return sets;
  };

  int best_balance = -1;
  for (double c : candidates) {
    auto [lower, upper] = sets_for(c);
    int balance = static_cast<int>(std::min(lower.size(), upper.size()));
    if (balance > best_balance) {
      best_balance = balance;
      report.splitting_point = c;
      report.set_lower = lower;
      report.set_upper = upper;
    }
    if (lower.size() >= 2 && upper.size() >= 2) {
      report.found_splitting_point = true;
      report.splitting_point = c;
      report.set_lower = std::move(lower);
      report.set_upper = std::move(upper);
      break;
    }
  }

  double left_min = 2.0, right_max = -2.0;
  for (const auto& fp : records) {
    if (fp.in_left_unstable_set() && fp.lo > x_min && fp.lo < x_max) {
      report.has_left_unstable_between = true;
      left_min = std::min(left_min, fp.lo);
    }
    if (fp.in_right_unstable_set() && fp.hi > x_min && fp.hi < x_max) {
      report.has_right_unstable_between = true;
      right_max = std::max(right_max, fp.hi);
    }
  }
  // c_L <= c_R: the smallest left-unstable point must not exceed the largest
  // right-unstable one.
  bool ordered_pair = report.has_left_unstable_between && report.has_right_unstable_between &&
                      left_min <= right_max + 1e-12;

  report.overall_pass = report.found_splitting_point && ordered_pair;
  return report;
}

bool signal_admits_nfse(const SignalFunction& s) {
  bool has_left = false, has_right = false;
  for (const auto& fp : find_fixed_points(s)) {
    has_left = has_left || fp.in_left_unstable_set();
    has_right = has_right || fp.in_right_unstable_set();
  }
  return has_left && has_right;
}

Eigen::Vector2d reduced_line5_rhs(const SignalFunction& s, double x1, double x2) {
  for (int k = 0; k <= 200; ++k) {
    double x = -1.0 + 2.0 * k / 200;
    if (std::abs(s.evaluate(-x) + s.evaluate(x)) >= 1e-10)
      fail(errc::not_odd, "signal is not odd at x = " + std::to_string(x));
  }
  return {s.evaluate(x2) - x1, 0.5 * s.evaluate(x1) - x2};
}

namespace {

// Reduced-manifold helpers for the line(5) sweep (odd tanh family).

Eigen::Vector2d reduced_rhs_raw(const SignalFunction& s, const Eigen::Vector2d& y) {
  return {s.evaluate(y[1]) - y[0], 0.5 * s.evaluate(y[0]) - y[1]};
}

Eigen::Matrix2d reduced_jacobian(const SignalFunction& s, const Eigen::Vector2d& y) {
  Eigen::Matrix2d j;
  j << -1.0, s.slope(y[1]), 0.5 * s.slope(y[0]), -1.0;
  return j;
}

bool reduced_newton(const SignalFunction& s, Eigen::Vector2d& y, double tol = 1e-13) {
  for (int step = 0; step < 100; ++step) {
    Eigen::Vector2d f = reduced_rhs_raw(s, y);
    if (f.lpNorm<Eigen::Infinity>() < tol) return true;
    Eigen::Vector2d dy = reduced_jacobian(s, y).colPivHouseholderQr().solve(-f);
    if (!dy.allFinite()) return false;
    y += dy;
  }
  return reduced_rhs_raw(s, y).lpNorm<Eigen::Infinity>() < tol;
}

Vector embed_line5(const Eigen::Vector2d& y) {
  Vector x(5);
  x << y[0], y[1], 0.0, -y[1], -y[0];
  return x;
}

// NFSE of the reduced system for gain k, warm-started from a previous branch
// point when available. Returns false when only the origin is found.
bool line5_nfse(double k, std::optional<Eigen::Vector2d>& warm, Eigen::Vector2d& out) {
  auto s = tanh_gain(k);
  std::vector<Eigen::Vector2d> trials;
  if (warm) trials.push_back(*warm);
  for (double amp : {0.4, 0.2, 0.1, 0.05, 0.02}) trials.push_back({amp, 0.5 * amp});
  for (auto y : trials) {
    if (!reduced_newton(s, y)) continue;
    if (y.lpNorm<Eigen::Infinity>() > 1e-5 && y[0] > 0.0) {
      out = y;
      warm = y;
      return true;
    }
  }
  return false;
}

// Largest eigenvalue transverse to the invariant manifold: full spectrum with
// the two closest matches to the reduced (on-manifold) spectrum removed.
double max_transverse_eig(const Graph& g, const SignalFunction& s, const Eigen::Vector2d& y) {
  Vector full = jacobian_spectrum(g, s, embed_line5(y));
  Eigen::Vector2d reduced_eigs =
      Eigen::EigenSolver<Eigen::Matrix2d>(reduced_jacobian(s, y)).eigenvalues().real();
  std::vector<double> values(full.data(), full.data() + full.size());
  for (int r = 0; r < 2; ++r) {
    auto best = std::min_element(values.begin(), values.end(), [&](double a, double b) {
      return std::abs(a - reduced_eigs[r]) < std::abs(b - reduced_eigs[r]);
    });
    values.erase(best);
  }
  return *std::max_element(values.begin(), values.end());
}

}  // namespace

BifurcationDiagram bifurcation_sweep(double k_min, double k_max, double k_step) {
  if (k_min < 0.5 - 1e-12 || k_max > 3.5 + 1e-12 || k_min >= k_max || k_step <= 0.0)
    throw std::invalid_argument("bifurcation_sweep: k range within [0.5, 3.5], k_step > 0");

  const Graph g = make_builtin("line", 5);
  auto spectrum = normalized_spectrum(g);
  const double lambda2 = spectrum.lambda_second;

  BifurcationDiagram diagram;
  std::optional<Eigen::Vector2d> warm;
  std::optional<double> prev_origin_mode;   // K lambda_2 - 1 at previous gain
  std::optional<double> prev_transverse;    // max transverse eig on the NFSE branch

  for (double k = k_min; k <= k_max + 0.5 * k_step; k += k_step) {
    auto s = tanh_gain(k);
    std::vector<BranchPoint> points;

    // FSE branches: every fixed point of tanh(Kx).
    for (const auto& fp : find_fixed_points(s)) {
      BranchPoint p;
      p.x1 = fp.value();
      p.state = Vector::Constant(5, p.x1);
      p.stability_full = stability_from_max_eig(jacobian_spectrum(g, s, p.state).maxCoeff());
      if (std::abs(p.x1) < 1e-12) {
        // Origin lies on the manifold; reduced Jacobian gives its on-manifold verdict.
        Eigen::Vector2d origin(0.0, 0.0);
        double max_red = Eigen::EigenSolver<Eigen::Matrix2d>(reduced_jacobian(s, origin))
                             .eigenvalues().real().maxCoeff();
        p.stability_manifold = stability_from_max_eig(max_red);
        p.branch_id = 0;
      } else {
        p.branch_id = p.x1 > 0.0 ? 1 : 2;
      }
      points.push_back(std::move(p));
    }

    // Origin instability on the v_{N-1} mode: detects k_bif.
    double origin_mode = s.slope(0.0) * lambda2 - 1.0;
    if (prev_origin_mode && *prev_origin_mode < 0.0 && origin_mode >= 0.0) {
      double lo = k - k_step, hi = k;
      while (hi - lo > 1e-5) {
        double mid = 0.5 * (lo + hi);
        (tanh_gain(mid).slope(0.0) * lambda2 - 1.0 < 0.0 ? lo : hi) = mid;
      }
      diagram.detected_k_bif = 0.5 * (lo + hi);
    }
    prev_origin_mode = origin_mode;

    // NFSE branch on the manifold (exists past k_bif).
    Eigen::Vector2d y;
    if (line5_nfse(k, warm, y)) {
      double transverse = max_transverse_eig(g, s, y);
      for (int sign : {+1, -1}) {
        Eigen::Vector2d ys = sign * y;
        BranchPoint p;
        p.branch_id = sign > 0 ? 3 : 4;
        p.x1 = ys[0];
        p.state = embed_line5(ys);
        p.stability_full = stability_from_max_eig(jacobian_spectrum(g, s, p.state).maxCoeff());
        double max_red = Eigen::EigenSolver<Eigen::Matrix2d>(reduced_jacobian(s, ys))
                             .eigenvalues().real().maxCoeff();
        p.stability_manifold = stability_from_max_eig(max_red);
        points.push_back(std::move(p));
      }
      if (prev_transverse && *prev_transverse > 0.0 && transverse <= 0.0) {
        double lo = k - k_step, hi = k;
        std::optional<Eigen::Vector2d> warm_bisect = warm;
        while (hi - lo > 1e-5) {
          double mid = 0.5 * (lo + hi);
          Eigen::Vector2d ym;
          if (!line5_nfse(mid, warm_bisect, ym))
            fail(errc::branch_lost, "NFSE branch lost at K = " + std::to_string(mid));
          (max_transverse_eig(g, tanh_gain(mid), ym) > 0.0 ? lo : hi) = mid;
        }
        diagram.detected_k_stab = 0.5 * (lo + hi);
      }
      prev_transverse = transverse;
    } else if (diagram.detected_k_bif && k > *diagram.detected_k_bif + 5.0 * k_step) {
      fail(errc::branch_lost, "NFSE branch lost at K = " + std::to_string(k));
    }

    diagram.gains.push_back(k);
    diagram.branches.push_back(std::move(points));
  }
  return diagram;
}

std::vector<Vector> enumerate_clip_equilibria(const Graph& g, double k) {
  if (k <= 0.0) fail(errc::non_positive_k, "clip gain " + std::to_string(k));
  if (g.n > 10)
    throw std::invalid_argument("enumerate_clip_equilibria: exhaustive 3^N solve needs N <= 10");
  const int n = g.n;
  const double kink = 1.0 / k;
  const Matrix p = g.walk_matrix();

  std::vector<Vector> found;
  std::vector<int> region(n, 0);  // 0 = linear, 1 = saturated high, -1 = saturated low
  long total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int i = 0; i < n; ++i) {
      region[i] = static_cast<int>(c % 3) - 1;
      c /= 3;
    }
    Matrix lhs = Matrix::Identity(n, n);
    Vector sat = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (region[i] == 0)
        lhs.col(i) -= k * p.col(i);
      else
        sat[i] = static_cast<double>(region[i]);
    }
    Eigen::FullPivLU<Matrix> lu(lhs);
    Vector x;
    if (lu.isInvertible()) {
      x = lu.solve(p * sat);
    } else {
      // Rank-deficient assignment: a consistent solution set is a continuum
      // (the linear subsystem sits exactly at its own threshold). Keep one
      // minimum-norm representative when the system is solvable at all.
      Vector b = p * sat;
      x = lhs.completeOrthogonalDecomposition().solve(b);
      if ((lhs * x - b).lpNorm<Eigen::Infinity>() > 1e-10) continue;
    }
    bool consistent = true;
    for (int i = 0; i < n && consistent; ++i) {
      if (region[i] == 0)
        consistent = std::abs(x[i]) <= kink + 1e-10;
      else if (region[i] == 1)
        consistent = x[i] >= kink - 1e-10 && x[i] <= 1.0 + 1e-10;
      else
        consistent = x[i] <= -kink + 1e-10 && x[i] >= -1.0 - 1e-10;
    }
    if (!consistent) continue;
    x = x.cwiseMax(-1.0).cwiseMin(1.0);
    bool duplicate = false;
    for (const auto& y : found)
      if ((y - x).lpNorm<Eigen::Infinity>() < 1e-9) {
        duplicate = true;
        break;
      }
    if (!duplicate) found.push_back(std::move(x));
  }
  return found;
}

}  // namespace consensus
