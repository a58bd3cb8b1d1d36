#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "consensus/cluster_iss.hpp"
#include "consensus/spectral.hpp"
#include "test_util.hpp"

using namespace consensus;

namespace {

std::vector<int> faction_members(int label) {
  std::vector<int> v;
  for (int i = 0; i < 34; ++i)
    if (karate_faction()[i] == label) v.push_back(i);
  return v;
}

Vector faction_signed_start(Rng& rng) {
  Vector x0(34);
  for (int i = 0; i < 34; ++i)
    x0[i] = (karate_faction()[i] == 0 ? -1.0 : 1.0) * rng.uniform(0.2, 1.0);
  return x0;
}

}  // namespace

TEST_CASE("perturbation vector") {
  auto g = make_builtin("line", 5);
  auto s = clip_linear(0.5);

  SUBCASE("whole graph as the cluster: no perturbation at all") {
    std::vector<int> all{0, 1, 2, 3, 4};
    auto dec = induced_subgraph(g, all);
    Rng rng(1);
    Vector x = testutil::random_state(5, rng);
    CHECK(perturbation(g, s, x, dec).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("zero state with s(0) = 0 kills both terms") {
    auto dec = induced_subgraph(g, {1, 2, 3});
    CHECK(perturbation(g, s, Vector::Zero(5), dec).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("component-wise bound 2 d_ext / d from |s| <= 1") {
    auto karate = make_builtin("karate", 34);
    auto clip = clip_linear(1.2);
    auto dec = induced_subgraph(karate, faction_members(0));
    Rng rng(2);
    auto traj = integrate(karate, clip, faction_signed_start(rng));
    for (int k = 0; k < traj.samples(); k += 5) {
      Vector p = perturbation(karate, clip, traj.states[k], dec);
      for (int i = 0; i < dec.size(); ++i)
        CHECK(std::abs(p[i]) <=
              2.0 * dec.external_degrees[i] / static_cast<double>(dec.total_degrees[i]) + 1e-12);
    }
  }
}

TEST_CASE("residual perturbation split") {
  auto g = make_builtin("line", 5);
  auto dec = induced_subgraph(g, {1, 2, 3});

  SUBCASE("uniform perturbation has zero residual") {
    Vector p = Vector::Constant(3, 0.37);
    auto split = residual_perturbation(p, dec);
    CHECK(split.mean == doctest::Approx(0.37));
    CHECK(split.residual.lpNorm<Eigen::Infinity>() < 1e-15);
  }
  SUBCASE("single spike has D_in-weighted mean zero") {
    Vector p = Vector::Zero(3);
    p[0] = 1.0;
    auto split = residual_perturbation(p, dec);
    double weighted = 0.0;
    for (int i = 0; i < 3; ++i) weighted += dec.internal_degrees[i] * split.residual[i];
    CHECK(std::abs(weighted) < 1e-12);
  }
  SUBCASE("norm identity: ||ptilde||^2 = sum d_in (p_i - pbar)^2") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      Vector p = testutil::random_state(3, rng);
      auto split = residual_perturbation(p, dec);
      double direct = 0.0;
      for (int i = 0; i < 3; ++i)
        direct += dec.internal_degrees[i] * (p[i] - split.mean) * (p[i] - split.mean);
      CHECK(din_norm(dec, split.residual) == doctest::Approx(std::sqrt(direct)).epsilon(1e-12));
    }
  }
  SUBCASE("uniform shifts leave the residual unchanged") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      Vector p = testutil::random_state(3, rng);
      double c = rng.uniform(-2.0, 2.0);
      auto base = residual_perturbation(p, dec);
      auto shifted = residual_perturbation(p.array() + c, dec);
      CHECK((base.residual - shifted.residual).lpNorm<Eigen::Infinity>() < 3e-16);
    }
  }
}

TEST_CASE("cluster analysis on the karate factions (clip 1.2)") {
  auto g = make_builtin("karate", 34);
  auto s = clip_linear(1.2);
  Rng rng(7);
  auto traj = integrate(g, s, faction_signed_start(rng));

  for (int label : {0, 1}) {
    auto dec = induced_subgraph(g, faction_members(label));
    auto result = analyze_cluster(g, s, dec, traj);

    // Internal spectrum tops out at 1 (row-stochastic connected subgraph).
    CHECK(result.analysis.internal_spectrum[dec.size() - 1] == doctest::Approx(1.0).epsilon(1e-9));

    // alpha_in from an independent eigensolve of D_in^{-1} A_in.
    Eigen::EigenSolver<Matrix> solver(dec.internal_walk_matrix());
    Vector eigs = solver.eigenvalues().real();
    std::sort(eigs.data(), eigs.data() + eigs.size());
    double max_abs = 0.0;
    for (int i = 0; i < eigs.size() - 1; ++i) max_abs = std::max(max_abs, std::abs(eigs[i]));
    CHECK(result.analysis.alpha_in == doctest::Approx(1.0 - 1.2 * max_abs).epsilon(1e-9));
    CHECK(result.analysis.cohesion_met);

    // The ISS inequality holds sample-wise along the run.
    CHECK(result.trace.applicable);
    CHECK(result.trace.holds_at_all_samples);
    for (int k = 0; k < static_cast<int>(result.trace.times.size()); ++k)
      CHECK(result.trace.internal_disagreement[k] <= result.trace.iss_bound[k] * (1.0 + 1e-6));

    // Empirical residual-perturbation supremum respects both degree bounds.
    CHECK(result.analysis.empirical_p_sup * result.analysis.empirical_p_sup <=
          result.analysis.structural_bound * (1.0 + 1e-9));
    CHECK(result.analysis.structural_bound_conservative ==
          doctest::Approx(2.0 * result.analysis.structural_bound).epsilon(1e-12));

    // Tail disagreement under the ultimate bound.
    int tail_start = static_cast<int>(result.trace.times.size() * 4) / 5;
    for (int k = tail_start; k < static_cast<int>(result.trace.times.size()); ++k)
      CHECK(result.trace.internal_disagreement[k] <=
            result.analysis.ultimate_bound * (1.0 + 1e-6));
  }
}

TEST_CASE("whole-graph cluster reduces to the exponential envelope") {
  auto g = make_builtin("complete", 6);
  auto s = clip_linear(0.5);  // K max|lambda| = 0.5 * 0.2 = 0.1
  std::vector<int> all{0, 1, 2, 3, 4, 5};
  auto dec = induced_subgraph(g, all);
  Rng rng(31);
  auto traj = integrate(g, s, testutil::random_state(6, rng));
  auto result = analyze_cluster(g, s, dec, traj);

  CHECK(result.analysis.empirical_p_sup == 0.0);
  CHECK(result.analysis.ultimate_bound == 0.0);
  CHECK(result.analysis.structural_bound == 0.0);
  CHECK(result.trace.holds_at_all_samples);
  double e0 = result.trace.internal_disagreement[0];
  double alpha = result.analysis.alpha_in;
  CHECK(alpha == doctest::Approx(0.9).epsilon(1e-9));
  for (int k = 0; k < static_cast<int>(result.trace.times.size()); ++k)
    CHECK(result.trace.internal_disagreement[k] <=
          e0 * std::exp(-alpha * result.trace.times[k]) * (1.0 + 1e-6));
}

TEST_CASE("structural bound worked example: line(5) middle block") {
  auto g = make_builtin("line", 5);
  auto s = clip_linear(0.5);
  auto dec = induced_subgraph(g, {1, 2, 3});
  Rng rng(17);
  auto traj = integrate(g, s, testutil::random_state(5, rng));
  auto result = analyze_cluster(g, s, dec, traj);
  // 2 * (1*(1/2)^2 + 2*0 + 1*(1/2)^2) = 1.
  CHECK(result.analysis.structural_bound == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(result.analysis.empirical_p_sup * result.analysis.empirical_p_sup <=
        result.analysis.structural_bound * (1.0 + 1e-9));
}

TEST_CASE("cohesion not met: analysis still emitted, trace inapplicable") {
  // Internal path of 3 vertices has internal spectrum {-1, 0, 1}: any K > 1
  // gives alpha_in < 0.
  auto g = make_builtin("line", 5);
  auto s = clip_linear(2.0);
  auto dec = induced_subgraph(g, {1, 2, 3});
  Rng rng(23);
  auto traj = integrate(g, s, testutil::random_state(5, rng));
  auto result = analyze_cluster(g, s, dec, traj);
  CHECK(result.analysis.alpha_in == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK_FALSE(result.analysis.cohesion_met);
  CHECK_FALSE(result.trace.applicable);
  CHECK_FALSE(result.trace.holds_at_all_samples);
  CHECK(result.trace.internal_disagreement.size() == result.trace.times.size());
}

TEST_CASE("degenerate single-vertex cluster") {
  auto g = make_builtin("line", 5);
  auto s = clip_linear(0.5);
  auto dec = induced_subgraph(g, {2});
  Rng rng(29);
  auto traj = integrate(g, s, testutil::random_state(5, rng));
  auto result = analyze_cluster(g, s, dec, traj);
  CHECK(result.analysis.degenerate);
  CHECK(result.analysis.alpha_in == 1.0);
  for (double d : result.trace.internal_disagreement) CHECK(d == 0.0);
}
