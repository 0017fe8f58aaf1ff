#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mflow/errors.hpp"
#include "mflow/model.hpp"
#include "mflow/regimes.hpp"
#include "mflow/simulator.hpp"

namespace mflow {

/// A fully described run: workflow, agents, ensemble parameters, output paths.
struct Scenario {
    WorkflowGraph workflow;
    std::vector<Agent> agents;
    std::vector<std::pair<std::string, std::string>> node_agents;  // node id -> agent id
    std::size_t n_trials = 1000;
    std::uint64_t master_seed = 0;
    bool reset_experience = true;
    std::string out_dir = "out";

    AgentAssignment assignment() const {
        AgentAssignment a;
        a.agents = agents;
        for (const auto& [node, agent] : node_agents) {
            bool found = false;
            for (std::size_t i = 0; i < agents.size(); ++i) {
                if (agents[i].id == agent) {
                    a.node_agent[node] = i;
                    found = true;
                    break;
                }
            }
            if (!found) throw DataError("scenario: node " + node + " references unknown agent " + agent);
        }
        return a;
    }
};

namespace scenario_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
    throw DataError(path + ": " + msg);
}

inline void check_keys(const json& obj, const std::vector<std::string>& allowed,
                       const std::string& path, bool lenient) {
    if (lenient) return;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            fail(path + "." + it.key(), "unknown key (strict mode)");
    }
}

inline double get_number(const json& obj, const std::string& key, const std::string& path,
                         std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        fail(path + "." + key, "missing required number");
    }
    if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

inline std::string get_string(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key) || !obj[key].is_string())
        fail(path + "." + key, "missing required string");
    return obj[key].get<std::string>();
}

inline RegimeKind parse_regime_kind(const std::string& s, const std::string& path) {
    for (RegimeKind k :
         {RegimeKind::A_Bernoulli, RegimeKind::B_Deterministic, RegimeKind::C_DiscreteDecreasing,
          RegimeKind::D_DiscreteIncreasing, RegimeKind::E_ContinuousDecreasing,
          RegimeKind::F_ContinuousIncreasing, RegimeKind::G_JointExternal})
        if (s == regime_name(k)) return k;
    fail(path, "unknown regime kind '" + s + "'");
}

inline TimeModel parse_time(const json& obj, const std::string& path, bool lenient) {
    check_keys(obj, {"kind", "base_time", "param"}, path, lenient);
    TimeModel tm;
    const std::string kind = get_string(obj, "kind", path);
    if (kind == "fixed")
        tm.kind = TimeKind::FixedTime;
    else if (kind == "geometric_retries")
        tm.kind = TimeKind::GeometricRetries;
    else if (kind == "exponential_service")
        tm.kind = TimeKind::ExponentialService;
    else
        fail(path + ".kind", "unknown time model '" + kind + "'");
    tm.base_time = get_number(obj, "base_time", path, 1.0);
    tm.rate_or_retry_param = get_number(obj, "param", path, 1.0);
    try {
        tm.validate();
    } catch (const DomainError& e) {
        fail(path, e.what());
    }
    return tm;
}

inline DensitySpec parse_density(const json& obj, const std::string& path, bool lenient) {
    check_keys(obj, {"kind", "lower", "upper", "table"}, path, lenient);
    const std::string kind = get_string(obj, "kind", path);
    try {
        if (kind == "uniform")
            return DensitySpec::uniform(get_number(obj, "lower", path),
                                        get_number(obj, "upper", path));
        if (kind == "triangular_decreasing")
            return DensitySpec::triangular_decreasing(get_number(obj, "lower", path),
                                                      get_number(obj, "upper", path));
        if (kind == "triangular_increasing")
            return DensitySpec::triangular_increasing(get_number(obj, "lower", path),
                                                      get_number(obj, "upper", path));
        if (kind == "tabulated") {
            if (!obj.contains("table") || !obj["table"].is_array())
                fail(path + ".table", "tabulated density requires an array of [x, f] pairs");
            std::vector<std::pair<double, double>> table;
            for (const auto& row : obj["table"])
                table.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
            return DensitySpec::tabulated(std::move(table));
        }
    } catch (const DataError& e) {
        fail(path, e.what());
    } catch (const DomainError& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "unknown density kind '" + kind + "'");
}

inline RegimeSpec parse_regime(const json& obj, const std::string& path, bool lenient) {
    check_keys(obj,
               {"kind", "base_precision", "time", "table", "success_index", "density", "lower",
                "upper", "cdf", "at", "rate", "mc_samples"},
               path, lenient);
    RegimeSpec spec;
    spec.kind = parse_regime_kind(get_string(obj, "kind", path + ".kind"), path + ".kind");
    spec.base_precision = get_number(obj, "base_precision", path, 0.5);
    if (!(spec.base_precision >= 0.0 && spec.base_precision <= 1.0))
        fail(path + ".base_precision",
             std::to_string(spec.base_precision) + " out of [0,1]");
    if (obj.contains("time")) spec.time_model = parse_time(obj["time"], path + ".time", lenient);
    if (obj.contains("table")) {
        const auto& t = obj["table"];
        check_keys(t, {"outcomes"}, path + ".table", lenient);
        std::vector<std::pair<std::vector<int>, double>> outcomes;
        if (!t.contains("outcomes") || !t["outcomes"].is_array())
            fail(path + ".table.outcomes", "expected an array");
        for (const auto& row : t["outcomes"]) {
            check_keys(row, {"index", "prob"}, path + ".table.outcomes", lenient);
            std::vector<int> index;
            for (const auto& v : row.at("index")) index.push_back(v.get<int>());
            outcomes.emplace_back(std::move(index), row.at("prob").get<double>());
        }
        try {
            spec.table = JointTable::checked(std::move(outcomes));
        } catch (const NormalizationError& e) {
            fail(path + ".table", e.what());
        }
    }
    if (obj.contains("success_index"))
        spec.success_index = static_cast<std::size_t>(get_number(obj, "success_index", path));
    if (obj.contains("density"))
        spec.density = parse_density(obj["density"], path + ".density", lenient);
    spec.lower = get_number(obj, "lower", path, 0.0);
    spec.upper = get_number(obj, "upper", path, 1.0);
    if (obj.contains("cdf")) {
        for (const auto& row : obj["cdf"])
            spec.cdf_samples.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
    }
    spec.eval_at = get_number(obj, "at", path, 0.0);
    spec.rate = get_number(obj, "rate", path, 1.0);
    spec.mc_samples = static_cast<int>(get_number(obj, "mc_samples", path, 10000.0));
    return spec;
}

inline ExternalSource parse_external(const json& obj, const std::string& path, bool lenient) {
    check_keys(obj, {"densities", "bounds"}, path, lenient);
    ExternalSource src;
    if (!obj.contains("densities") || !obj["densities"].is_array())
        fail(path + ".densities", "expected an array of densities");
    for (std::size_t d = 0; d < obj["densities"].size(); ++d)
        src.densities.push_back(parse_density(obj["densities"][d],
                                              path + ".densities[" + std::to_string(d) + "]",
                                              lenient));
    if (!obj.contains("bounds") || !obj["bounds"].is_array())
        fail(path + ".bounds", "expected an array of [lo, hi] pairs");
    for (const auto& b : obj["bounds"])
        src.bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    try {
        src.validate();
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    return src;
}

inline json density_to_json(const DensitySpec& d) {
    json j;
    switch (d.kind()) {
        case DensityKind::Uniform: j["kind"] = "uniform"; break;
        case DensityKind::TriangularDecreasing: j["kind"] = "triangular_decreasing"; break;
        case DensityKind::TriangularIncreasing: j["kind"] = "triangular_increasing"; break;
        case DensityKind::TabulatedPdf: j["kind"] = "tabulated"; break;
    }
    if (d.kind() == DensityKind::TabulatedPdf) {
        json table = json::array();
        for (const auto& [x, f] : d.table()) table.push_back({x, f});
        j["table"] = table;
    } else {
        j["lower"] = d.lower();
        j["upper"] = d.upper();
    }
    return j;
}

}  // namespace scenario_detail

inline Scenario parse_scenario_json(const nlohmann::json& root, bool lenient = false) {
    using namespace scenario_detail;
    if (!root.is_object()) fail("$", "scenario must be a JSON object");
    check_keys(root,
               {"spec_version", "workflow", "agents", "n_trials", "master_seed",
                "reset_experience", "out_dir"},
               "$", lenient);
    const double version = get_number(root, "spec_version", "$");
    if (version != 1.0) fail("$.spec_version", "unsupported spec_version");

    Scenario sc;
    if (!root.contains("workflow") || !root["workflow"].is_object())
        fail("$.workflow", "missing workflow object");
    const auto& wf = root["workflow"];
    check_keys(wf, {"nodes", "edges"}, "$.workflow", lenient);
    if (!wf.contains("nodes") || !wf["nodes"].is_array())
        fail("$.workflow.nodes", "expected an array of nodes");
    for (std::size_t i = 0; i < wf["nodes"].size(); ++i) {
        const auto& nj = wf["nodes"][i];
        const std::string path = "$.workflow.nodes[" + std::to_string(i) + "]";
        check_keys(nj, {"id", "agent", "info", "regime", "external", "precision_target"}, path,
                   lenient);
        WorkNode node;
        node.id = get_string(nj, "id", path);
        if (nj.contains("info")) {
            const auto& ij = nj["info"];
            check_keys(ij, {"magnitude", "support", "dimension"}, path + ".info", lenient);
            node.info.magnitude = get_number(ij, "magnitude", path + ".info", 1.0);
            node.info.dimension = static_cast<int>(get_number(ij, "dimension", path + ".info", 1.0));
            if (ij.contains("support")) {
                const std::string s = get_string(ij, "support", path + ".info");
                if (s == "discrete")
                    node.info.support = Support::Discrete;
                else if (s == "continuous")
                    node.info.support = Support::Continuous;
                else
                    fail(path + ".info.support", "expected 'discrete' or 'continuous'");
            }
            try {
                node.info.validate();
            } catch (const DomainError& e) {
                fail(path + ".info", e.what());
            }
        }
        if (!nj.contains("regime")) fail(path + ".regime", "missing regime");
        node.regime = parse_regime(nj["regime"], path + ".regime", lenient);
        if (nj.contains("external"))
            node.external = parse_external(nj["external"], path + ".external", lenient);
        node.precision_target = get_number(nj, "precision_target", path, 0.5);
        if (!(node.precision_target >= 0.0 && node.precision_target <= 1.0))
            fail(path + ".precision_target",
                 std::to_string(node.precision_target) + " out of [0,1]");
        sc.node_agents.emplace_back(node.id, get_string(nj, "agent", path));
        sc.workflow.nodes.push_back(std::move(node));
    }
    if (wf.contains("edges")) {
        for (std::size_t e = 0; e < wf["edges"].size(); ++e) {
            const auto& ej = wf["edges"][e];
            if (!ej.is_array() || ej.size() != 2)
                fail("$.workflow.edges[" + std::to_string(e) + "]",
                     "expected a [from, to] pair");
            sc.workflow.edges.emplace_back(ej[0].get<std::string>(), ej[1].get<std::string>());
        }
    }

    if (!root.contains("agents") || !root["agents"].is_array())
        fail("$.agents", "expected an array of agents");
    for (std::size_t i = 0; i < root["agents"].size(); ++i) {
        const auto& aj = root["agents"][i];
        const std::string path = "$.agents[" + std::to_string(i) + "]";
        check_keys(aj, {"id", "experience", "gain"}, path, lenient);
        Agent a;
        a.id = get_string(aj, "id", path);
        const double exp = get_number(aj, "experience", path, 1.0);
        if (exp < 0.0) fail(path + ".experience", "must be >= 0");
        a.experience = exp > 0.0 ? Experience(exp) : Experience();
        a.gain = get_number(aj, "gain", path, 0.1);
        if (!(a.gain > 0.0)) fail(path + ".gain", "must be > 0");
        sc.agents.push_back(std::move(a));
    }

    const double trials = get_number(root, "n_trials", "$", 1000.0);
    if (!(trials >= 1.0)) fail("$.n_trials", "must be >= 1");
    sc.n_trials = static_cast<std::size_t>(trials);
    if (root.contains("master_seed")) {
        if (!root["master_seed"].is_number_integer() && !root["master_seed"].is_number_unsigned())
            fail("$.master_seed", "expected an integer");
        sc.master_seed = root["master_seed"].get<std::uint64_t>();
    }
    if (root.contains("reset_experience")) {
        if (!root["reset_experience"].is_boolean())
            fail("$.reset_experience", "expected a boolean");
        sc.reset_experience = root["reset_experience"].get<bool>();
    }
    if (root.contains("out_dir")) sc.out_dir = get_string(root, "out_dir", "$");

    // Semantic resolution checks.
    for (const auto& [from, to] : sc.workflow.edges) {
        if (!sc.workflow.find_node(from)) fail("$.workflow.edges", "edge references unknown node " + from);
        if (!sc.workflow.find_node(to)) fail("$.workflow.edges", "edge references unknown node " + to);
    }
    sc.assignment();  // throws on unresolved agent references
    {
        auto issues = validate_graph(sc.workflow);
        if (!issues.empty()) fail("$.workflow", issues.front());
    }
    return sc;
}

/// Loads and fully validates a scenario file. Every failure names the
/// offending key path.
inline Scenario parse_scenario(const std::string& path, bool lenient = false) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scenario file: " + path);
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("scenario syntax error: ") + e.what());
    }
    return parse_scenario_json(root, lenient);
}

/// Serializes a scenario back to JSON; parse(emit(s)) yields an equal scenario.
inline nlohmann::json emit_scenario(const Scenario& sc) {
    using namespace scenario_detail;
    json root;
    root["spec_version"] = 1;
    json nodes = json::array();
    for (const auto& node : sc.workflow.nodes) {
        json nj;
        nj["id"] = node.id;
        for (const auto& [nid, aid] : sc.node_agents)
            if (nid == node.id) nj["agent"] = aid;
        nj["precision_target"] = node.precision_target;
        nj["info"] = {{"magnitude", node.info.magnitude},
                      {"support", node.info.support == Support::Discrete ? "discrete"
                                                                         : "continuous"},
                      {"dimension", node.info.dimension}};
        json rj;
        rj["kind"] = regime_name(node.regime.kind);
        rj["base_precision"] = node.regime.base_precision;
        json tj;
        switch (node.regime.time_model.kind) {
            case TimeKind::FixedTime: tj["kind"] = "fixed"; break;
            case TimeKind::GeometricRetries: tj["kind"] = "geometric_retries"; break;
            case TimeKind::ExponentialService: tj["kind"] = "exponential_service"; break;
        }
        tj["base_time"] = node.regime.time_model.base_time;
        tj["param"] = node.regime.time_model.rate_or_retry_param;
        rj["time"] = tj;
        if (node.regime.table) {
            json outcomes = json::array();
            for (const auto& [index, prob] : node.regime.table->outcomes)
                outcomes.push_back({{"index", index}, {"prob", prob}});
            rj["table"] = {{"outcomes", outcomes}};
            rj["success_index"] = node.regime.success_index;
        }
        if (node.regime.density) rj["density"] = density_to_json(*node.regime.density);
        rj["lower"] = node.regime.lower;
        rj["upper"] = node.regime.upper;
        if (!node.regime.cdf_samples.empty()) {
            json cdf = json::array();
            for (const auto& [x, f] : node.regime.cdf_samples) cdf.push_back({x, f});
            rj["cdf"] = cdf;
        }
        rj["at"] = node.regime.eval_at;
        rj["rate"] = node.regime.rate;
        rj["mc_samples"] = node.regime.mc_samples;
        nj["regime"] = rj;
        if (node.external) {
            json ext;
            json densities = json::array();
            for (const auto& d : node.external->densities) densities.push_back(density_to_json(d));
            json bounds = json::array();
            for (const auto& b : node.external->bounds) bounds.push_back({b.lo, b.hi});
            ext["densities"] = densities;
            ext["bounds"] = bounds;
            nj["external"] = ext;
        }
        nodes.push_back(nj);
    }
    json edges = json::array();
    for (const auto& [from, to] : sc.workflow.edges) edges.push_back({from, to});
    root["workflow"] = {{"nodes", nodes}, {"edges", edges}};
    json agents = json::array();
    for (const auto& a : sc.agents)
        agents.push_back(
            {{"id", a.id}, {"experience", a.experience.magnitude()}, {"gain", a.gain}});
    root["agents"] = agents;
    root["n_trials"] = sc.n_trials;
    root["master_seed"] = sc.master_seed;
    root["reset_experience"] = sc.reset_experience;
    root["out_dir"] = sc.out_dir;
    return root;
}

}  // namespace mflow
