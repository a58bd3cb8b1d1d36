#include "consensus/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>

#include <json.hpp>

namespace consensus {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kZeroTol = 1e-12;   // |s(x) - x| below this counts as a fixed point
constexpr double kGridStep = 1e-3;   // fixed-point search grid
}  // namespace

Vector SignalFunction::apply(const Vector& x) const {
  Vector y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = evaluate(x[i]);
  return y;
}

Vector SignalFunction::apply_slope(const Vector& x) const {
  Vector y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = slope(x[i]);
  return y;
}

SignalFunction tanh_gain(double k) {
  if (k <= 0.0) fail(errc::non_positive_k, "tanh gain " + std::to_string(k));
  SignalFunction s;
  s.evaluate = [k](double x) { return std::tanh(k * x); };
  s.slope = [k](double x) {
    double t = std::tanh(k * x);
    return k * (1.0 - t * t);
  };
  s.lipschitz_k = k;
  s.family = SignalFamily::tanh_gain;
  s.spec = "tanh:K=" + std::to_string(k);
  return s;
}

SignalFunction clip_linear(double k) {
  if (k <= 0.0) fail(errc::non_positive_k, "clip gain " + std::to_string(k));
  SignalFunction s;
  s.evaluate = [k](double x) { return std::min(1.0, std::max(-1.0, k * x)); };
  s.slope = [k](double x) { return std::abs(k * x) <= 1.0 ? k : 0.0; };
  s.lipschitz_k = k;
  s.family = SignalFamily::clip_linear;
  s.spec = "clip:K=" + std::to_string(k);
  return s;
}

SignalFunction sine_staircase() {
  SignalFunction s;
  const double a = 2.0 * kPi;
  s.evaluate = [a](double x) {
    return x - std::min(std::sin(a * x), std::sin(a * x + kPi)) / a;
  };
  s.slope = [a](double x) {
    double sn = std::sin(a * x);
    double cs = std::cos(a * x);
    if (std::abs(sn) < 1e-9) {
      // Kink: one-sided slopes are 1 - |cs| on the left and 1 + |cs| on the
      // right. Upper convention over the sides inside [-1, 1]: at the domain
      // edge x = 1 only the flat left side exists.
      return x <= 1.0 - 1e-9 ? 1.0 + std::abs(cs) : 1.0 - std::abs(cs);
    }
    return sn > 0.0 ? 1.0 + cs : 1.0 - cs;
  };
  s.lipschitz_k = 2.0;
  s.family = SignalFamily::sine_staircase;
  s.spec = "sinestair";
  return s;
}

SignalFunction piecewise_linear(const std::vector<std::array<double, 2>>& points) {
  if (points.size() < 2)
    fail(errc::assumption_violation, "piecewise_linear needs at least 2 breakpoints");
  double max_slope = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (std::abs(points[i][0]) > 1.0 + 1e-12 || std::abs(points[i][1]) > 1.0 + 1e-12)
      fail(errc::assumption_violation, "breakpoint outside [-1,1]");
    if (i > 0) {
      double dx = points[i][0] - points[i - 1][0];
      double dy = points[i][1] - points[i - 1][1];
      if (dx <= 0.0) fail(errc::assumption_violation, "breakpoints not strictly ascending");
      if (dy < 0.0) fail(errc::assumption_violation, "breakpoint values decrease");
      max_slope = std::max(max_slope, dy / dx);
    }
  }
  auto pts = std::make_shared<std::vector<std::array<double, 2>>>(points);
  SignalFunction s;
  s.evaluate = [pts](double x) {
    const auto& p = *pts;
    if (x <= p.front()[0]) return p.front()[1];
    if (x >= p.back()[0]) return p.back()[1];
    std::size_t hi = 1;
    while (p[hi][0] < x) ++hi;
    double t = (x - p[hi - 1][0]) / (p[hi][0] - p[hi - 1][0]);
    return p[hi - 1][1] + t * (p[hi][1] - p[hi - 1][1]);
  };
  s.slope = [pts](double x) {
    const auto& p = *pts;
    const std::size_t m = p.size();
    auto segment_slope = [&](std::size_t i) {
      return (p[i + 1][1] - p[i][1]) / (p[i + 1][0] - p[i][0]);
    };
    if (x < p.front()[0] || x > p.back()[0]) return 0.0;
    // Breakpoint hit: larger adjacent slope (upper generalized derivative).
    for (std::size_t i = 0; i < m; ++i) {
      if (x == p[i][0]) {
        double left = i > 0 ? segment_slope(i - 1) : 0.0;
        double right = i + 1 < m ? segment_slope(i) : 0.0;
        return std::max(left, right);
      }
    }
    std::size_t hi = 1;
    while (p[hi][0] < x) ++hi;
    return segment_slope(hi - 1);
  };
  s.lipschitz_k = max_slope > 0.0 ? max_slope : 1.0;
  s.family = SignalFamily::piecewise_linear;
  s.spec = "pwl";
  return s;
}

SignalFunction custom_signal(std::function<double(double)> f, double k,
                             std::function<double(double)> df) {
  if (k <= 0.0) fail(errc::non_positive_k, "custom signal K " + std::to_string(k));
  SignalFunction s;
  s.evaluate = std::move(f);
  s.slope = std::move(df);
  s.lipschitz_k = k;
  s.family = SignalFamily::custom;
  s.spec = "custom";
  return s;
}

SignalFunction parse_signal_spec(const std::string& spec) {
  auto colon = spec.find(':');
  std::string family = spec.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto parse_k = [&]() {
    if (args.rfind("K=", 0) != 0) fail(errc::config_parse_error, "expected K=<value> in " + spec);
    try {
      return std::stod(args.substr(2));
    } catch (const std::exception&) {
      fail(errc::config_parse_error, "bad K in " + spec);
    }
  };
  if (family == "tanh") return tanh_gain(parse_k());
  if (family == "clip") return clip_linear(parse_k());
  if (family == "sinestair") return sine_staircase();
  if (family == "pwl") {
    if (args.rfind("file=", 0) != 0)
      fail(errc::config_parse_error, "expected pwl:file=<path> in " + spec);
    std::string path = args.substr(5);
    std::ifstream in(path);
    if (!in) fail(errc::config_parse_error, "cannot open " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      fail(errc::config_parse_error, path + ": " + e.what());
    }
    std::vector<std::array<double, 2>> points;
    for (const auto& pair : j) points.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    auto s = piecewise_linear(points);
    s.spec = spec;
    return s;
  }
  fail(errc::config_parse_error, "unknown signal family in " + spec);
}

ValidationReport validate_assumptions(const SignalFunction& s) {
  constexpr int kGridPoints = 10000;  // 10^4 + 1 samples
  ValidationReport r;
  r.range_ok = r.monotone_ok = r.lipschitz_ok = true;
  r.underestimation = r.overestimation = true;
  double prev_x = 0.0, prev_y = 0.0;
  for (int k = 0; k <= kGridPoints; ++k) {
    double x = -1.0 + 2.0 * k / kGridPoints;
    double y = s.evaluate(x);
    if (!(y >= -1.0 - 1e-12 && y <= 1.0 + 1e-12)) r.range_ok = false;
    double drift = x * (y - x);
    if (drift > 1e-12) r.underestimation = false;
    if (drift < -1e-12) r.overestimation = false;
    if (k > 0) {
      double dy = y - prev_y;
      double dx = x - prev_x;
      if (dy < -1e-12) {
        r.monotone_ok = false;
        r.max_monotone_violation = std::max(r.max_monotone_violation, -dy);
      }
      if (std::abs(dy) > s.lipschitz_k * dx * (1.0 + 1e-9)) r.lipschitz_ok = false;
      r.max_lipschitz_ratio = std::max(r.max_lipschitz_ratio, std::abs(dy) / dx);
    }
    prev_x = x;
    prev_y = y;
  }
  return r;
}

const char* stability_name(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::semi_stable: return "semi_stable";
  }
  return "?";
}

namespace {

struct RawFixedPoint {
  double lo, hi;
};

// Bisection refinement of a strict sign change of g = s(x) - x.
double bisect_root(const SignalFunction& s, double a, double b) {
  double ga = s.evaluate(a) - a;
  while (b - a > 1e-12) {
    double mid = 0.5 * (a + b);
    double gm = s.evaluate(mid) - mid;
    if (gm == 0.0) return mid;
    if ((ga < 0.0) == (gm < 0.0)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

// Locate fixed points on the 1e-3 grid: plateau runs of >= 2 grid zeros
// become continuum intervals, isolated zeros become points, strict sign
// changes are refined by bisection.
std::vector<RawFixedPoint> locate_fixed_points(const SignalFunction& s) {
  const int cells = static_cast<int>(std::round(2.0 / kGridStep));
  std::vector<double> xs(cells + 1), gs(cells + 1);
  for (int k = 0; k <= cells; ++k) {
    xs[k] = -1.0 + 2.0 * k / cells;
    gs[k] = s.evaluate(xs[k]) - xs[k];
  }
  std::vector<RawFixedPoint> found;
  int k = 0;
  while (k <= cells) {
    if (std::abs(gs[k]) < kZeroTol) {
      int run_end = k;
      while (run_end + 1 <= cells && std::abs(gs[run_end + 1]) < kZeroTol) ++run_end;
      if (run_end > k)
        found.push_back({xs[k], xs[run_end]});
      else
        found.push_back({xs[k], xs[k]});
      k = run_end + 1;
      continue;
    }
    if (k + 1 <= cells && std::abs(gs[k + 1]) >= kZeroTol && (gs[k] < 0.0) != (gs[k + 1] < 0.0)) {
      double c = bisect_root(s, xs[k], xs[k + 1]);
      found.push_back({c, c});
    }
    ++k;
  }
  return found;
}

// One-sided stability per the probe ladder. dir = -1 left, +1 right;
// bound = nearest other fixed point (or domain edge) on that side.
bool side_is_stable(const SignalFunction& s, double c, int dir, double bound) {
  if (dir < 0 && c <= -1.0) return true;  // boundary convention
  if (dir > 0 && c >= 1.0) return true;
  bool any_probe = false;
  for (int decade = 2; decade <= 8; ++decade) {
    double delta = std::pow(10.0, -decade);
    double x = c + dir * delta;
    if (x < -1.0 || x > 1.0) continue;
    if (dir > 0 && x >= bound) continue;  // must stay strictly before the next fixed point
    if (dir < 0 && x <= bound) continue;
    any_probe = true;
    double g = s.evaluate(x) - x;
    bool repelling = dir > 0 ? g > 0.0 : g < 0.0;
    if (!repelling) return true;  // any attracting probe makes the side stable
  }
  if (!any_probe) {
    // Gap to the neighbor tighter than the ladder: single midpoint probe.
    double x = 0.5 * (c + bound);
    if (x <= -1.0 || x >= 1.0 || x == c) return true;
    double g = s.evaluate(x) - x;
    bool repelling = dir > 0 ? g > 0.0 : g < 0.0;
    return !repelling;
  }
  return false;  // repelling at every valid probe
}

FixedPointRecord classify_raw(const SignalFunction& s, const RawFixedPoint& fp,
                              double prev_bound, double next_bound) {
  FixedPointRecord r;
  r.lo = fp.lo;
  r.hi = fp.hi;
  r.left_stable = side_is_stable(s, fp.lo, -1, prev_bound);
  r.right_stable = side_is_stable(s, fp.hi, +1, next_bound);
  if (r.left_stable && r.right_stable)
    r.classification = Stability::stable;
  else if (!r.left_stable && !r.right_stable)
    r.classification = Stability::unstable;
  else
    r.classification = Stability::semi_stable;
  return r;
}

}  // namespace

std::vector<FixedPointRecord> find_fixed_points(const SignalFunction& s) {
  auto validation = validate_assumptions(s);
  if (!validation.pass())
    fail(errc::assumption_violation, "signal fails admissibility validation: " + s.spec);
  auto raw = locate_fixed_points(s);
  std::vector<FixedPointRecord> records;
  records.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double prev_bound = i > 0 ? raw[i - 1].hi : -1.0;
    double next_bound = i + 1 < raw.size() ? raw[i + 1].lo : 1.0;
    records.push_back(classify_raw(s, raw[i], prev_bound, next_bound));
  }
  return records;
}

FixedPointRecord classify_fixed_point(const SignalFunction& s, double c) {
  if (std::abs(s.evaluate(c) - c) >= 1e-10)
    fail(errc::not_a_fixed_point, "s(c) - c = " + std::to_string(s.evaluate(c) - c));
  auto raw = locate_fixed_points(s);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (c >= raw[i].lo - 1e-9 && c <= raw[i].hi + 1e-9) {
      double prev_bound = i > 0 ? raw[i - 1].hi : -1.0;
      double next_bound = i + 1 < raw.size() ? raw[i + 1].lo : 1.0;
      return classify_raw(s, raw[i], prev_bound, next_bound);
    }
  }
  // Not on the grid catalogue (sub-grid isolated root): classify standalone
  // with neighbors taken from the catalogue.
  double prev_bound = -1.0, next_bound = 1.0;
  for (const auto& fp : raw) {
    if (fp.hi < c) prev_bound = std::max(prev_bound, fp.hi);
    if (fp.lo > c) next_bound = std::min(next_bound, fp.lo);
  }
  return classify_raw(s, {c, c}, prev_bound, next_bound);
}

}  // namespace consensus
