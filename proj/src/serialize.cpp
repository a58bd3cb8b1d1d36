#include "consensus/serialize.hpp"

#include <cstdio>
#include <fstream>

namespace consensus {

using nlohmann::json;

nlohmann::json to_json(const Graph& g) {
  json edges = json::array();
  for (const auto& [i, j] : g.edge_list()) edges.push_back({i, j});
  return json{{"n", g.n}, {"edges", edges}};
}

Graph graph_from_json(const nlohmann::json& j) {
  EdgeList edges;
  for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return from_edge_list(edges, j.at("n").get<int>());
}

namespace {
json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}
json int_vector_to_json(const IntVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}
}  // namespace

nlohmann::json to_json(const SubgraphDecomposition& dec) {
  json boundary = json::array();
  for (const auto& [i, j] : dec.boundary_edges) boundary.push_back({i, j});
  return json{{"vertex_set", dec.vertex_set},
              {"internal_degrees", int_vector_to_json(dec.internal_degrees)},
              {"total_degrees", int_vector_to_json(dec.total_degrees)},
              {"external_degrees", int_vector_to_json(dec.external_degrees)},
              {"boundary_edges", boundary}};
}

nlohmann::json to_json(const SpectralSummary& s) {
  return json{{"eigenvalues", vector_to_json(s.eigenvalues)},
              {"lambda_second", s.lambda_second},
              {"lambda_abs_max_nontrivial", s.lambda_abs_max_nontrivial},
              {"algebraic_connectivity", s.algebraic_connectivity},
              {"lambda_second_multiplicity", s.lambda_second_multiplicity},
              {"top_eigenvector", vector_to_json(s.top_eigenvector)}};
}

nlohmann::json to_json(const ThresholdReport& r) {
  json j{{"k", r.k},
         {"k_lambda", r.k_lambda},
         {"sharp_threshold_met", r.sharp_threshold_met},
         {"exponential_condition_met", r.exponential_condition_met},
         {"dense_graph_guarantee", r.dense_graph_guarantee}};
  if (r.decay_rate) j["decay_rate"] = *r.decay_rate;
  return j;
}

nlohmann::json to_json(const ValidationReport& r) {
  return json{{"pass", r.pass()},
              {"range_ok", r.range_ok},
              {"monotone_ok", r.monotone_ok},
              {"lipschitz_ok", r.lipschitz_ok},
              {"underestimation", r.underestimation},
              {"overestimation", r.overestimation},
              {"max_lipschitz_ratio", r.max_lipschitz_ratio}};
}

nlohmann::json to_json(const FixedPointRecord& r) {
  // One-sided stability is established by the finite probe ladder, not by a
  // symbolic neighborhood argument; reports carry that flag.
  json j{{"classification", stability_name(r.classification)},
         {"classification_method", "probe_ladder"},
         {"left_stable", r.left_stable},
         {"right_stable", r.right_stable},
         {"in_left_unstable_set", r.in_left_unstable_set()},
         {"in_right_unstable_set", r.in_right_unstable_set()}};
  if (r.is_interval()) {
    j["interval"] = {r.lo, r.hi};
  } else {
    j["value"] = r.value();
  }
  return j;
}

nlohmann::json to_json(const EquilibriumReport& r) {
  json j{{"state", vector_to_json(r.state)},
         {"residual", r.residual},
         {"kind", r.kind == EquilibriumKind::fse ? "FSE" : "NFSE"},
         {"near_kink", r.near_kink},
         {"basin_samples", r.basin_samples}};
  if (r.kind == EquilibriumKind::fse) {
    j["fse_value"] = r.fse_value;
    j["scalar_jacobian_consistent"] = r.scalar_jacobian_consistent;
  }
  if (r.jacobian_spectrum) j["jacobian_spectrum"] = vector_to_json(*r.jacobian_spectrum);
  if (r.local_stability) j["local_stability"] = stability_label(*r.local_stability);
  return j;
}

nlohmann::json to_json(const NfseConditionsReport& r) {
  return json{{"splitting_point", r.splitting_point},
              {"found_splitting_point", r.found_splitting_point},
              {"set_lower", r.set_lower},
              {"set_upper", r.set_upper},
              {"has_left_unstable_between", r.has_left_unstable_between},
              {"has_right_unstable_between", r.has_right_unstable_between},
              {"overall_pass", r.overall_pass}};
}

nlohmann::json to_json(const ClusterAnalysis& a) {
  return json{{"internal_spectrum", vector_to_json(a.internal_spectrum)},
              {"alpha_in", a.alpha_in},
              {"cohesion_met", a.cohesion_met},
              {"degenerate", a.degenerate},
              {"structural_bound", a.structural_bound},
              {"structural_bound_conservative", a.structural_bound_conservative},
              {"empirical_p_sup", a.empirical_p_sup},
              {"ultimate_bound", a.ultimate_bound}};
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot open " + path);
  out << content;
  if (!out) fail(errc::io_error, "short write to " + path);
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

namespace {
// Shortest round-trip formatting keeps CSV output byte-stable per platform.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double parsed = std::strtod(buf, nullptr);
  for (int precision = 1; precision < 17; ++precision) {
    char shorter[32];
    std::snprintf(shorter, sizeof(shorter), "%.*g", precision, v);
    if (std::strtod(shorter, nullptr) == parsed) return shorter;
  }
  return buf;
}
}  // namespace

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::string out = "t";
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
  for (int i = 0; i < n; ++i) out += ",x_" + std::to_string(i);
  out += ",residual,disagreement\n";
  for (int k = 0; k < traj.samples(); ++k) {
    out += fmt(traj.times[k]);
    for (int i = 0; i < n; ++i) out += "," + fmt(traj.states[k][i]);
    out += "," + fmt(traj.residuals[k]) + "," + fmt(traj.disagreement[k]) + "\n";
  }
  write_text_file(path, out);
}

void write_iss_csv(const IssTrace& trace, const std::string& path) {
  std::string out = "t,disagreement,residual_perturbation,iss_bound\n";
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    out += fmt(trace.times[k]) + "," + fmt(trace.internal_disagreement[k]) + "," +
           fmt(trace.residual_perturbation[k]) + "," + fmt(trace.iss_bound[k]) + "\n";
  }
  write_text_file(path, out);
}

void write_bifurcation_csv(const BifurcationDiagram& diagram, const std::string& path) {
  std::string out = "K,branch_id,x1,stab_full,stab_manifold\n";
  for (std::size_t k = 0; k < diagram.gains.size(); ++k) {
    for (const auto& p : diagram.branches[k]) {
      out += fmt(diagram.gains[k]) + "," + std::to_string(p.branch_id) + "," + fmt(p.x1) + "," +
             stability_label(p.stability_full) + ",";
      out += p.stability_manifold ? stability_label(*p.stability_manifold) : "-";
      out += "\n";
    }
  }
  write_text_file(path, out);
}

}  // namespace consensus
