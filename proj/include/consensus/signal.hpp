#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "consensus/types.hpp"

namespace consensus {

enum class SignalFamily { tanh_gain, clip_linear, piecewise_linear, sine_staircase, custom };

// Non-decreasing K-Lipschitz self-map of [-1,1] through which agents
// perceive their neighbors. lipschitz_k is the declared constant used by
// every threshold formula; the grid estimate is validation-only.
struct SignalFunction {
  std::function<double(double)> evaluate;
  std::function<double(double)> slope;  // empty when no derivative is available
  double lipschitz_k = 1.0;
  SignalFamily family = SignalFamily::custom;
  std::string spec;  // CLI spec string, e.g. "tanh:K=2.5"

  bool has_slope() const { return static_cast<bool>(slope); }
  double operator()(double x) const { return evaluate(x); }
  Vector apply(const Vector& x) const;
  Vector apply_slope(const Vector& x) const;
};

SignalFunction tanh_gain(double k);
// Kink slope convention: K on the open linear region, 0 when saturated,
// K at the kink itself (upper generalized derivative).
SignalFunction clip_linear(double k);
// s(x) = x - min(sin(a x), sin(a x + pi)) / a with a = 2*pi; K = 2.
SignalFunction sine_staircase();
// Ascending breakpoints with non-decreasing values; linear interpolation,
// clamped outside the first/last breakpoint. Slope at a breakpoint is the
// larger adjacent segment slope.
SignalFunction piecewise_linear(const std::vector<std::array<double, 2>>& points);
SignalFunction custom_signal(std::function<double(double)> f, double k,
                             std::function<double(double)> df = {});

// CLI grammar: "tanh:K=2.5" | "clip:K=1.2" | "pwl:file=path.json" | "sinestair"
SignalFunction parse_signal_spec(const std::string& spec);

struct ValidationReport {
  bool range_ok = false;
  bool monotone_ok = false;
  bool lipschitz_ok = false;
  bool underestimation = false;  // x (s(x) - x) <= 0 on the grid
  bool overestimation = false;
  double max_monotone_violation = 0.0;
  double max_lipschitz_ratio = 0.0;  // grid estimate of K (validation only)

  bool pass() const { return range_ok && monotone_ok && lipschitz_ok; }
};

ValidationReport validate_assumptions(const SignalFunction& s);

enum class Stability { stable, unstable, semi_stable };

const char* stability_name(Stability s);

// A fixed point of s, or a continuum of them ([lo, hi]). Boundary
// convention: c = -1 has no left side (left-stable), c = 1 no right side.
struct FixedPointRecord {
  double lo = 0.0;
  double hi = 0.0;  // == lo for point records
  bool left_stable = true;
  bool right_stable = true;
  Stability classification = Stability::stable;

  bool is_interval() const { return hi > lo; }
  double value() const { return 0.5 * (lo + hi); }
  bool in_left_unstable_set() const { return !left_stable; }    // Fix_L°(s)
  bool in_right_unstable_set() const { return !right_stable; }  // Fix_R°(s)
  bool is_stable() const { return classification == Stability::stable; }
};

// All fixed points of s, ascending. Sign changes of s(x) - x on a 1e-3 grid
// refined by bisection; plateaus reported as continuum intervals. At least
// one record is stable for any admissible s.
std::vector<FixedPointRecord> find_fixed_points(const SignalFunction& s);

// Requires |s(c) - c| < 1e-10. One-sided probe ladder classification.
FixedPointRecord classify_fixed_point(const SignalFunction& s, double c);

}  // namespace consensus
