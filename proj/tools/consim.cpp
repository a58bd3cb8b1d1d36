// consim: consensus dynamics lab. Subcommands: spectrum, threshold, simulate,
// equilibria, bifurcate, iss, scenario. Exit codes: 0 success, 2 config
// error, 3 numerical failure, 4 invariant failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "consensus/cluster_iss.hpp"
#include "consensus/dynamics.hpp"
#include "consensus/equilibria.hpp"
#include "consensus/graph.hpp"
#include "consensus/rng.hpp"
#include "consensus/serialize.hpp"
#include "consensus/signal.hpp"
#include "consensus/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace consensus;

namespace {

constexpr const char* kVersion = "0.1.0";

struct InvariantFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string graph_source = "line:5";
  std::string signal_spec = "clip:K=1.0";
  double dt = 0.01;
  double t_end = 200.0;
  int record_every = 10;
  std::uint64_t seed = 0;
  std::string ic_mode = "uniform";  // uniform | fsm | explicit
  double ic_value = 0.0;            // fsm common value
  std::vector<double> ic_values;    // explicit vector
  std::string partition;            // path to cluster labels ("" = none)
  std::string output_dir;           // "" = no files, stdout only
  double k_min = 0.5, k_max = 3.5, k_step = 0.01;
};

json to_json(const RunConfig& c) {
  json ic{{"mode", c.ic_mode}};
  if (c.ic_mode == "fsm") ic["value"] = c.ic_value;
  if (c.ic_mode == "explicit") ic["values"] = c.ic_values;
  return json{{"graph_source", c.graph_source},
              {"signal_spec", c.signal_spec},
              {"integration", {{"dt", c.dt}, {"t_end", c.t_end}, {"record_every", c.record_every}}},
              {"seed", c.seed},
              {"initial_condition", ic},
              {"partition", c.partition},
              {"output_dir", c.output_dir},
              {"sweep", {{"k_min", c.k_min}, {"k_max", c.k_max}, {"k_step", c.k_step}}}};
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      fail(errc::config_parse_error, "unknown key '" + it.key() + "' in " + where);
  }
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  reject_unknown_keys(j, {"graph_source", "signal_spec", "integration", "seed",
                          "initial_condition", "partition", "output_dir", "sweep"},
                      "config");
  try {
    if (j.contains("graph_source")) c.graph_source = j["graph_source"].get<std::string>();
    if (j.contains("signal_spec")) c.signal_spec = j["signal_spec"].get<std::string>();
    if (j.contains("integration")) {
      const auto& i = j["integration"];
      reject_unknown_keys(i, {"dt", "t_end", "record_every"}, "integration");
      if (i.contains("dt")) c.dt = i["dt"].get<double>();
      if (i.contains("t_end")) c.t_end = i["t_end"].get<double>();
      if (i.contains("record_every")) c.record_every = i["record_every"].get<int>();
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("initial_condition")) {
      const auto& ic = j["initial_condition"];
      reject_unknown_keys(ic, {"mode", "value", "values"}, "initial_condition");
      c.ic_mode = ic.value("mode", "uniform");
      if (c.ic_mode == "fsm") c.ic_value = ic.at("value").get<double>();
      if (c.ic_mode == "explicit") c.ic_values = ic.at("values").get<std::vector<double>>();
      if (c.ic_mode != "uniform" && c.ic_mode != "fsm" && c.ic_mode != "explicit")
        fail(errc::config_parse_error, "initial_condition.mode must be uniform|fsm|explicit");
    }
    if (j.contains("partition")) c.partition = j["partition"].get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("sweep")) {
      const auto& s = j["sweep"];
      reject_unknown_keys(s, {"k_min", "k_max", "k_step"}, "sweep");
      if (s.contains("k_min")) c.k_min = s["k_min"].get<double>();
      if (s.contains("k_max")) c.k_max = s["k_max"].get<double>();
      if (s.contains("k_step")) c.k_step = s["k_step"].get<double>();
    }
  } catch (const json::exception& e) {
    fail(errc::config_parse_error, e.what());
  }
  return c;
}

Graph load_graph(const std::string& source) {
  auto colon = source.find(':');
  std::string name = source.substr(0, colon);
  if (name == "karate") return make_builtin("karate", 34);
  if (name == "line" || name == "ring" || name == "star" || name == "complete") {
    if (colon == std::string::npos)
      fail(errc::config_parse_error, "expected " + name + ":<n> in graph source");
    return make_builtin(name, std::stoi(source.substr(colon + 1)));
  }
  if (name == "complete_bipartite") {
    auto args = source.substr(colon + 1);
    auto comma = args.find(',');
    if (comma == std::string::npos)
      fail(errc::config_parse_error, "expected complete_bipartite:<p>,<q>");
    return make_complete_bipartite(std::stoi(args.substr(0, comma)),
                                   std::stoi(args.substr(comma + 1)));
  }
  return load_edge_list(source);  // fall back to an edge-list file path
}

// Tracks emitted files so a failing run leaves no partial outputs behind.
struct OutputTracker {
  std::vector<std::string> written;
  bool armed = true;

  ~OutputTracker() {
    if (!armed) return;
    for (const auto& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
  void disarm() { armed = false; }
};

struct Emitter {
  const RunConfig& config;
  std::string command;
  OutputTracker& tracker;

  bool to_files() const { return !config.output_dir.empty(); }

  std::string path_for(const std::string& filename) const {
    fs::create_directories(config.output_dir);
    return (fs::path(config.output_dir) / filename).string();
  }

  void emit_json(const std::string& filename, const json& j, bool also_stdout = true) {
    if (also_stdout) std::cout << j.dump(2) << "\n";
    if (!to_files()) return;
    auto p = path_for(filename);
    write_json_file(p, j);
    tracker.written.push_back(p);
  }

  template <typename Writer>
  void emit_csv(const std::string& filename, Writer&& writer) {
    if (!to_files()) return;
    auto p = path_for(filename);
    writer(p);
    tracker.written.push_back(p);
    // Metadata sidecar: config echo plus artifact version.
    json side{{"artifact_version", kVersion},
              {"command", command},
              {"config", to_json(config)},
              {"primary_output", filename}};
    auto sp = p + ".meta.json";
    write_json_file(sp, side);
    tracker.written.push_back(sp);
  }
};

Vector initial_condition(const RunConfig& c, const Graph& g) {
  if (c.ic_mode == "fsm") return Vector::Constant(g.n, c.ic_value);
  if (c.ic_mode == "explicit") {
    if (static_cast<int>(c.ic_values.size()) != g.n)
      fail(errc::config_parse_error, "explicit initial condition has wrong length");
    Vector x(g.n);
    for (int i = 0; i < g.n; ++i) x[i] = c.ic_values[i];
    return x;
  }
  Rng rng = stream(c.seed, purpose::initial_condition);
  Vector x(g.n);
  for (int i = 0; i < g.n; ++i) x[i] = rng.uniform(-1.0, 1.0);
  return x;
}

IntegrateOptions integrate_options(const RunConfig& c) {
  IntegrateOptions opt;
  opt.dt = c.dt;
  opt.t_end = c.t_end;
  opt.record_every = c.record_every;
  return opt;
}

std::vector<std::vector<int>> cluster_groups(const RunConfig& c, const Graph& g) {
  std::vector<int> labels;
  if (!c.partition.empty())
    labels = load_partition(c.partition, g.n);
  else if (c.graph_source == "karate")
    labels = karate_faction();
  else
    fail(errc::config_parse_error, "iss needs --partition (or the karate graph)");
  return partition_groups(labels);
}

// ---- subcommand bodies ----------------------------------------------------

void run_spectrum(const RunConfig& c, Emitter& em) {
  auto g = load_graph(c.graph_source);
  auto spec = normalized_spectrum(g);
  json j = to_json(spec);
  j["graph"] = to_json(g);
  em.emit_json("spectrum.json", j);
}

void run_threshold(const RunConfig& c, Emitter& em) {
  auto g = load_graph(c.graph_source);
  auto s = parse_signal_spec(c.signal_spec);
  auto report = threshold_report(normalized_spectrum(g), s.lipschitz_k);
  em.emit_json("threshold.json", to_json(report));
}

void run_simulate(const RunConfig& c, Emitter& em) {
  auto g = load_graph(c.graph_source);
  auto s = parse_signal_spec(c.signal_spec);
  auto traj = integrate(g, s, initial_condition(c, g), integrate_options(c));
  em.emit_csv("trajectory.csv", [&](const std::string& p) { write_trajectory_csv(traj, p); });
  json j{{"samples", traj.samples()},
         {"t_final", traj.times.back()},
         {"residual_final", traj.residuals.back()},
         {"disagreement_final", traj.disagreement.back()},
         {"converged_early", traj.converged_early}};
  em.emit_json("simulate_summary.json", j);
}

void run_equilibria(const RunConfig& c, Emitter& em) {
  auto g = load_graph(c.graph_source);
  auto s = parse_signal_spec(c.signal_spec);
  MultiStartPlan plan;
  plan.seed = c.seed;
  int dropped = 0;
  auto found = find_equilibria(g, s, plan, &dropped);
  if (dropped > 0)
    std::cerr << "search log: " << dropped << " non-converged seeds dropped\n";
  json arr = json::array();
  for (const auto& r : found) {
    if (r.residual >= 1e-8) throw InvariantFailure("equilibrium report exceeds residual bound");
    arr.push_back(to_json(r));
  }
  em.emit_json("equilibria.json", arr);
}

void run_bifurcate(const RunConfig& c, Emitter& em) {
  if (c.graph_source != "line:5")
    fail(errc::config_parse_error, "bifurcate sweeps the tanh family on line:5 only");
  auto diagram = bifurcation_sweep(c.k_min, c.k_max, c.k_step);
  em.emit_csv("bifurcation.csv",
              [&](const std::string& p) { write_bifurcation_csv(diagram, p); });
  json j;
  if (diagram.detected_k_bif) j["detected_k_bif"] = *diagram.detected_k_bif;
  if (diagram.detected_k_stab) j["detected_k_stab"] = *diagram.detected_k_stab;
  j["gains"] = diagram.gains.size();
  em.emit_json("bifurcation_summary.json", j);
}

void run_iss(const RunConfig& c, Emitter& em) {
  auto g = load_graph(c.graph_source);
  auto s = parse_signal_spec(c.signal_spec);
  auto traj = integrate(g, s, initial_condition(c, g), integrate_options(c));
  auto groups = cluster_groups(c, g);
  json clusters = json::array();
  for (std::size_t label = 0; label < groups.size(); ++label) {
    auto dec = induced_subgraph(g, groups[label]);
    auto result = analyze_cluster(g, s, dec, traj);
    em.emit_csv("iss_cluster" + std::to_string(label) + ".csv",
                [&](const std::string& p) { write_iss_csv(result.trace, p); });
    json cj = to_json(result.analysis);
    cj["cluster"] = label;
    cj["decomposition"] = to_json(dec);
    cj["holds_at_all_samples"] = result.trace.holds_at_all_samples;
    cj["applicable"] = result.trace.applicable;
    clusters.push_back(cj);
    em.emit_json("cluster" + std::to_string(label) + ".json", cj, false);
  }
  em.emit_json("iss_summary.json", clusters);
}

// ---- scenarios -------------------------------------------------------------

// Fixed string hash so per-topology streams do not depend on the standard
// library's std::hash implementation.
std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

json karate_cluster_stats(const Vector& x) {
  // Sign clusters relative to the splitting point 0; orientation-best match
  // against the canonical factions.
  const auto& faction = karate_faction();
  int match = 0;
  for (int i = 0; i < 34; ++i) {
    bool negative = x[i] < 0.0;
    if ((faction[i] == 0) == negative) ++match;
  }
  match = std::max(match, 34 - match);

  std::vector<double> neg, pos;
  for (int i = 0; i < 34; ++i) (x[i] < 0.0 ? neg : pos).push_back(x[i]);
  auto spread = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
  };
  auto mean = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double sum = 0.0;
    for (double a : v) sum += a;
    return sum / static_cast<double>(v.size());
  };
  double gap = (neg.empty() || pos.empty()) ? 0.0 : mean(pos) - mean(neg);
  return json{{"sign_match_canonical", match},
              {"negative_cluster_size", neg.size()},
              {"positive_cluster_size", pos.size()},
              {"intra_cluster_spread_negative", spread(neg)},
              {"intra_cluster_spread_positive", spread(pos)},
              {"inter_cluster_mean_gap", gap}};
}

void scenario_karate_fig5(RunConfig c, Emitter& em) {
  auto g = make_builtin("karate", 34);
  auto s = clip_linear(1.2);
  const auto& faction = karate_faction();

  // Faction-signed seeded start: faction of node 0 negative, faction of
  // node 33 positive, magnitudes uniform in [0.2, 1].
  Rng rng = stream(c.seed, purpose::initial_condition);
  Vector x0(34);
  for (int i = 0; i < 34; ++i) x0[i] = (faction[i] == 0 ? -1.0 : 1.0) * rng.uniform(0.2, 1.0);

  auto traj = integrate(g, s, x0, integrate_options(c));
  em.emit_csv("trajectory.csv", [&](const std::string& p) { write_trajectory_csv(traj, p); });

  auto eq = classify_equilibrium(g, s, traj.final_state());
  em.emit_json("equilibrium.json", to_json(eq), false);

  json summary{{"scenario", "karate-fig5"},
               {"seed", c.seed},
               {"kind", eq.kind == EquilibriumKind::nfse ? "NFSE" : "FSE"},
               {"stats", karate_cluster_stats(traj.final_state())}};

  json clusters = json::array();
  for (int label : {0, 1}) {
    std::vector<int> members;
    for (int i = 0; i < 34; ++i)
      if (faction[i] == label) members.push_back(i);
    auto dec = induced_subgraph(g, members);
    auto result = analyze_cluster(g, s, dec, traj);
    em.emit_csv("iss_cluster" + std::to_string(label) + ".csv",
                [&](const std::string& p) { write_iss_csv(result.trace, p); });
    json cj = to_json(result.analysis);
    cj["cluster"] = label;
    cj["holds_at_all_samples"] = result.trace.holds_at_all_samples;
    double tail_max = 0.0;
    std::size_t samples = result.trace.times.size();
    for (std::size_t k = samples - samples / 5; k < samples; ++k)
      tail_max = std::max(tail_max, result.trace.internal_disagreement[k]);
    cj["tail_disagreement_max"] = tail_max;
    clusters.push_back(cj);
    em.emit_json("cluster" + std::to_string(label) + ".json", cj, false);
  }
  summary["clusters"] = clusters;
  em.emit_json("scenario_summary.json", summary);
}

void scenario_line5_fig3(RunConfig c, Emitter& em) {
  c.k_min = 0.5;
  c.k_max = 3.5;
  run_bifurcate(c, em);
}

void scenario_topology_fig4(RunConfig c, Emitter& em) {
  // Just below threshold the slowest mode contracts at rate 1 - 0.95 only,
  // so the preset needs a longer horizon to resolve the sync verdict.
  c.t_end = std::max(c.t_end, 400.0);
  const std::vector<std::string> topologies = {"line:10", "ring:12", "star:10", "complete:10"};
  json panels = json::array();
  for (const auto& source : topologies) {
    auto g = load_graph(source);
    auto spec = normalized_spectrum(g);
    // One seeded initial condition per topology, shared by both panels.
    Rng rng = stream(c.seed, purpose::initial_condition, fnv1a(source));
    Vector x0(g.n);
    for (int i = 0; i < g.n; ++i) x0[i] = rng.uniform(-1.0, 1.0);

    json panel{{"graph", source}, {"lambda_second", spec.lambda_second}};
    std::string tag = source.substr(0, source.find(':'));
    std::vector<std::pair<std::string, double>> gains;
    if (spec.lambda_second > 0.0) {
      gains.emplace_back("below", 0.95 / spec.lambda_second);
      // Far enough above the threshold that stable clustered equilibria
      // exist; whether a given seed lands in their basin stays seed-dependent.
      gains.emplace_back("above", 1.80 / spec.lambda_second);
    } else {
      gains.emplace_back("below", 2.0);  // always synchronizes
    }
    for (const auto& [which, k] : gains) {
      auto s = clip_linear(k);
      auto traj = integrate(g, s, x0, integrate_options(c));
      em.emit_csv("fig4_" + tag + "_" + which + ".csv",
                  [&](const std::string& p) { write_trajectory_csv(traj, p); });
      double spread = traj.final_state().maxCoeff() - traj.final_state().minCoeff();
      panel[which] = {{"k", k},
                      {"k_lambda", k * spec.lambda_second},
                      {"final_spread", spread},
                      {"synchronized", spread < 1e-6}};
    }
    panels.push_back(panel);
  }
  em.emit_json("scenario_summary.json", json{{"scenario", "topology-fig4"}, {"panels", panels}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"consensus dynamics lab"};
  app.require_subcommand(1);

  std::string config_path, scenario_name;
  // Flag values override config-file fields.
  std::optional<std::string> flag_graph, flag_signal, flag_partition, flag_out;
  std::optional<double> flag_k, flag_dt, flag_t_end, flag_k_min, flag_k_max, flag_k_step;
  std::optional<std::uint64_t> flag_seed;
  std::optional<int> flag_record_every;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--graph", flag_graph, "graph source, e.g. line:5, karate, edges.txt");
    cmd->add_option("--signal", flag_signal, "signal spec, e.g. tanh:K=2.5");
    cmd->add_option("--k", flag_k, "override the gain K of the signal family");
    cmd->add_option("--dt", flag_dt, "integration step");
    cmd->add_option("--t-end", flag_t_end, "integration horizon");
    cmd->add_option("--record-every", flag_record_every, "recording stride");
    cmd->add_option("--seed", flag_seed, "root seed");
    cmd->add_option("--partition", flag_partition, "cluster label file");
    cmd->add_option("--out", flag_out, "output directory");
  };

  auto* cmd_spectrum = app.add_subcommand("spectrum", "normalized adjacency spectrum");
  auto* cmd_threshold = app.add_subcommand("threshold", "synchronization threshold report");
  auto* cmd_simulate = app.add_subcommand("simulate", "integrate the dynamics");
  auto* cmd_equilibria = app.add_subcommand("equilibria", "multi-start equilibrium search");
  auto* cmd_bifurcate = app.add_subcommand("bifurcate", "line(5) tanh bifurcation sweep");
  auto* cmd_iss = app.add_subcommand("iss", "cluster ISS analysis along a run");
  auto* cmd_scenario = app.add_subcommand("scenario", "named experiment");
  cmd_scenario->add_option("name", scenario_name, "karate-fig5 | line5-fig3 | topology-fig4")
      ->required();
  for (auto* cmd : {cmd_spectrum, cmd_threshold, cmd_simulate, cmd_equilibria, cmd_bifurcate,
                    cmd_iss, cmd_scenario})
    add_common(cmd);
  cmd_bifurcate->add_option("--k-min", flag_k_min, "sweep start");
  cmd_bifurcate->add_option("--k-max", flag_k_max, "sweep end");
  cmd_bifurcate->add_option("--k-step", flag_k_step, "sweep step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  OutputTracker tracker;
  try {
    RunConfig config;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) fail(errc::config_parse_error, "cannot open " + config_path);
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        fail(errc::config_parse_error, e.what());
      }
      config = config_from_json(j);
    }
    if (flag_graph) config.graph_source = *flag_graph;
    if (flag_signal) config.signal_spec = *flag_signal;
    if (flag_dt) config.dt = *flag_dt;
    if (flag_t_end) config.t_end = *flag_t_end;
    if (flag_record_every) config.record_every = *flag_record_every;
    if (flag_seed) config.seed = *flag_seed;
    if (flag_partition) config.partition = *flag_partition;
    if (flag_out) config.output_dir = *flag_out;
    if (flag_k_min) config.k_min = *flag_k_min;
    if (flag_k_max) config.k_max = *flag_k_max;
    if (flag_k_step) config.k_step = *flag_k_step;
    if (flag_k) {
      // Rewrite the gain inside the signal spec; only gain families accept it.
      auto family = config.signal_spec.substr(0, config.signal_spec.find(':'));
      if (family != "tanh" && family != "clip")
        fail(errc::config_parse_error, "--k only applies to tanh/clip signals");
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%s:K=%.17g", family.c_str(), *flag_k);
      config.signal_spec = buf;
    }

    // Config round-trip invariant: serialize -> parse is the identity.
    if (to_json(config_from_json(to_json(config))) != to_json(config))
      throw InvariantFailure("config does not round-trip");

    std::string command;
    for (int i = 1; i < argc; ++i) command += std::string(i > 1 ? " " : "") + argv[i];
    Emitter em{config, command, tracker};

    if (cmd_spectrum->parsed()) run_spectrum(config, em);
    if (cmd_threshold->parsed()) run_threshold(config, em);
    if (cmd_simulate->parsed()) run_simulate(config, em);
    if (cmd_equilibria->parsed()) run_equilibria(config, em);
    if (cmd_bifurcate->parsed()) run_bifurcate(config, em);
    if (cmd_iss->parsed()) run_iss(config, em);
    if (cmd_scenario->parsed()) {
      if (scenario_name == "karate-fig5")
        scenario_karate_fig5(config, em);
      else if (scenario_name == "line5-fig3")
        scenario_line5_fig3(config, em);
      else if (scenario_name == "topology-fig4")
        scenario_topology_fig4(config, em);
      else
        fail(errc::config_parse_error, "unknown scenario " + scenario_name);
    }
    tracker.disarm();
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == errc::config_parse_error ? 2 : 3;
  } catch (const InvariantFailure& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
