#pragma once

#include <string>

#include <json.hpp>

#include "consensus/cluster_iss.hpp"
#include "consensus/equilibria.hpp"
#include "consensus/graph.hpp"
#include "consensus/signal.hpp"
#include "consensus/spectral.hpp"

namespace consensus {

nlohmann::json to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SubgraphDecomposition& dec);
nlohmann::json to_json(const SpectralSummary& s);
nlohmann::json to_json(const ThresholdReport& r);
nlohmann::json to_json(const ValidationReport& r);
nlohmann::json to_json(const FixedPointRecord& r);
nlohmann::json to_json(const EquilibriumReport& r);
nlohmann::json to_json(const NfseConditionsReport& r);
nlohmann::json to_json(const ClusterAnalysis& a);

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const nlohmann::json& j);

// Header t,x_0,...,x_{N-1},residual,disagreement; one row per sample.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

// Header t,disagreement,residual_perturbation,iss_bound.
void write_iss_csv(const IssTrace& trace, const std::string& path);

// Header K,branch_id,x1,stab_full,stab_manifold.
void write_bifurcation_csv(const BifurcationDiagram& diagram, const std::string& path);

}  // namespace consensus
