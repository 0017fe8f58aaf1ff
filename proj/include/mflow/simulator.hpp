#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mflow/errors.hpp"
#include "mflow/learning.hpp"
#include "mflow/metrics.hpp"
#include "mflow/model.hpp"
#include "mflow/regimes.hpp"
#include "mflow/rng.hpp"

namespace mflow {

/// One step of the workflow: the information it presents, the regime that
/// governs its processing, and the precision level that counts as a hit.
struct WorkNode {
    std::string id;
    InfoSource info;
    RegimeSpec regime;
    std::optional<ExternalSource> external;
    double precision_target = 0.5;
};

/// A single event, a chain, or a web of events: nodes plus directed edges.
struct WorkflowGraph {
    std::vector<WorkNode> nodes;
    std::vector<std::pair<std::string, std::string>> edges;

    std::optional<std::size_t> find_node(const std::string& id) const {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].id == id) return i;
        return std::nullopt;
    }
};

struct Agent {
    std::string id;
    Experience experience;
    double gain = 0.1;
};

/// Static assignment of agents to nodes for a run.
struct AgentAssignment {
    std::vector<Agent> agents;
    std::unordered_map<std::string, std::size_t> node_agent;  // node id -> agents index
};

/// Structural checks on a workflow graph. Issues are data, not failures; a
/// valid graph yields an empty list.
inline std::vector<std::string> validate_graph(const WorkflowGraph& g) {
    std::vector<std::string> issues;
    std::unordered_set<std::string> ids;
    for (const auto& n : g.nodes) {
        if (!ids.insert(n.id).second) issues.push_back("duplicate node id: " + n.id);
        if (!(n.precision_target >= 0.0 && n.precision_target <= 1.0))
            issues.push_back("node " + n.id + ": precision_target outside [0,1]");
        const bool is_g = n.regime.kind == RegimeKind::G_JointExternal;
        if (is_g && !n.external)
            issues.push_back("node " + n.id + ": regime G requires an external source");
        if (!is_g && n.external)
            issues.push_back("node " + n.id + ": external source present but regime is not G");
        if (n.regime.kind == RegimeKind::B_Deterministic && !n.regime.table)
            issues.push_back("node " + n.id + ": regime B requires a joint table");
        if (n.regime.kind == RegimeKind::E_ContinuousDecreasing && !n.regime.density)
            issues.push_back("node " + n.id + ": regime E requires a density");
        if (n.regime.kind == RegimeKind::F_ContinuousIncreasing && n.regime.cdf_samples.empty())
            issues.push_back("node " + n.id + ": regime F requires CDF samples");
    }
    for (const auto& [from, to] : g.edges) {
        if (!ids.count(from)) issues.push_back("dangling edge: unknown node " + from);
        if (!ids.count(to)) issues.push_back("dangling edge: unknown node " + to);
    }
    // Kahn's algorithm for acyclicity, on the subgraph of known endpoints.
    std::unordered_map<std::string, int> indegree;
    std::unordered_map<std::string, std::vector<std::string>> adj;
    for (const auto& n : g.nodes) indegree[n.id] = 0;
    for (const auto& [from, to] : g.edges) {
        if (!ids.count(from) || !ids.count(to)) continue;
        adj[from].push_back(to);
        indegree[to] += 1;
    }
    std::vector<std::string> queue;
    for (const auto& [id, deg] : indegree)
        if (deg == 0) queue.push_back(id);
    std::size_t processed = 0;
    while (!queue.empty()) {
        const std::string id = queue.back();
        queue.pop_back();
        ++processed;
        for (const auto& next : adj[id])
            if (--indegree[next] == 0) queue.push_back(next);
    }
    if (processed != g.nodes.size()) issues.push_back("workflow graph contains a cycle");
    return issues;
}

/// Topological order of node indices. Throws DataError on a cyclic or
/// otherwise invalid graph.
inline std::vector<std::size_t> topological_order(const WorkflowGraph& g) {
    std::vector<int> indegree(g.nodes.size(), 0);
    std::vector<std::vector<std::size_t>> adj(g.nodes.size());
    for (const auto& [from, to] : g.edges) {
        const auto fi = g.find_node(from);
        const auto ti = g.find_node(to);
        if (!fi || !ti) throw DataError("dangling edge: " + from + " -> " + to);
        adj[*fi].push_back(*ti);
        indegree[*ti] += 1;
    }
    std::vector<std::size_t> order;
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (indegree[i] == 0) queue.push_back(i);
    while (!queue.empty()) {
        const std::size_t i = queue.back();
        queue.pop_back();
        order.push_back(i);
        for (std::size_t j : adj[i])
            if (--indegree[j] == 0) queue.push_back(j);
    }
    if (order.size() != g.nodes.size()) throw DataError("workflow graph contains a cycle");
    return order;
}

/// Realization record of one trial: per-node outcomes in node order, the
/// critical-path total time, and the all-nodes-hit indicator.
struct TrialRecord {
    int trial_index = 0;
    std::vector<EventOutcome> outcomes;
    std::vector<double> finish_times;
    std::vector<double> info_draws;
    std::vector<double> precision_probs;
    std::vector<double> experience_before;
    double total_time = 0.0;
    double end_to_end_precision = 0.0;
};

namespace detail {

inline double draw_time(const TimeModel& tm, SplitMix64& rng) {
    switch (tm.kind) {
        case TimeKind::FixedTime:
            return tm.base_time;
        case TimeKind::GeometricRetries: {
            int k = 1;
            while (!rng.bernoulli(tm.rate_or_retry_param)) ++k;
            return static_cast<double>(k) * tm.base_time;
        }
        case TimeKind::ExponentialService:
            return rng.exponential(tm.rate_or_retry_param);
    }
    return tm.base_time;
}

inline constexpr double kPrecisionLattice = 0.01;

/// Realized precision level for the discrete tilted regimes: piecewise-uniform
/// above or below the target depending on the hit, quantized to a 0.01 lattice
/// without crossing the target.
inline double quantized_precision(bool hit, double target, double u) {
    double v = hit ? target + (1.0 - target) * u : target * u;
    v = std::round(v / kPrecisionLattice) * kPrecisionLattice;
    if (hit)
        v = std::clamp(v, target, 1.0);
    else
        v = std::clamp(v, 0.0, std::max(0.0, target - kPrecisionLattice));
    return v;
}

}  // namespace detail

/// Processes one trial through the DAG: per node, builds the regime
/// distribution from the assigned agent's current experience, draws the
/// precision outcome and time, and applies the experience update. Downstream
/// nodes start at the max of their predecessors' finish times.
inline TrialRecord run_trial(const WorkflowGraph& g, const std::vector<std::size_t>& topo,
                             AgentAssignment& assignment, std::uint64_t trial_seed,
                             const std::vector<double>* joint_prob_cache = nullptr) {
    const std::size_t n = g.nodes.size();
    std::vector<std::vector<std::size_t>> preds(n);
    for (const auto& [from, to] : g.edges) preds[*g.find_node(to)].push_back(*g.find_node(from));

    TrialRecord rec;
    rec.outcomes.resize(n);
    rec.finish_times.assign(n, 0.0);
    rec.info_draws.assign(n, 0.0);
    rec.precision_probs.assign(n, 0.0);
    rec.experience_before.assign(n, 0.0);
    bool all_hit = true;

    for (std::size_t pos : topo) {
        const WorkNode& node = g.nodes[pos];
        auto agent_it = assignment.node_agent.find(node.id);
        if (agent_it == assignment.node_agent.end())
            throw LookupError("no agent assigned to node " + node.id);
        Agent& agent = assignment.agents[agent_it->second];
        SplitMix64 rng(mix_seed(trial_seed, pos + 1));

        double pp;
        if (node.regime.kind == RegimeKind::G_JointExternal && joint_prob_cache) {
            pp = (*joint_prob_cache)[pos];
        } else {
            try {
                pp = build_distribution(node.regime, agent.experience, node.info, node.external,
                                        mix_seed(trial_seed, pos + 1))
                         .precision_prob();
            } catch (const RegimeMismatchError& e) {
                throw RegimeMismatchError("node " + node.id + ": " + e.what());
            }
        }

        EventOutcome out;
        out.regime = node.regime.kind;
        const double target = node.precision_target;
        switch (node.regime.kind) {
            case RegimeKind::A_Bernoulli:
            case RegimeKind::B_Deterministic:
            case RegimeKind::G_JointExternal: {
                out.precision_hit = rng.bernoulli(pp);
                out.precision_value = out.precision_hit ? 1.0 : 0.0;
                break;
            }
            case RegimeKind::C_DiscreteDecreasing:
            case RegimeKind::D_DiscreteIncreasing: {
                out.precision_hit = rng.bernoulli(pp);
                out.precision_value =
                    detail::quantized_precision(out.precision_hit, target, rng.uniform01());
                break;
            }
            case RegimeKind::E_ContinuousDecreasing:
            case RegimeKind::F_ContinuousIncreasing: {
                const double ratio = node.info.magnitude > 0.0
                                         ? agent.experience.magnitude() / node.info.magnitude
                                         : 1.0;
                const double v = std::pow(rng.uniform01(), 1.0 / std::max(ratio, 1e-12));
                out.precision_value = v;
                out.precision_hit = v >= target;
                break;
            }
        }
        out.time_spent = detail::draw_time(node.regime.time_model, rng);

        double start = 0.0;
        for (std::size_t p : preds[pos]) start = std::max(start, rec.finish_times[p]);
        rec.finish_times[pos] = start + out.time_spent;
        rec.info_draws[pos] = node.info.magnitude * rng.uniform(0.5, 1.5);
        rec.precision_probs[pos] = pp;
        rec.experience_before[pos] = agent.experience.magnitude();
        rec.outcomes[pos] = out;
        all_hit = all_hit && out.precision_hit;

        agent.experience = update_experience(agent.experience, out, agent.gain);
    }
    rec.total_time = 0.0;
    for (double f : rec.finish_times) rec.total_time = std::max(rec.total_time, f);
    rec.end_to_end_precision = all_hit ? 1.0 : 0.0;
    return rec;
}

/// One observation row as exported to the classifier: the per-trial realized
/// information content, the achieved precision, the dwelling time, and the
/// agent's experience magnitude when the event was processed.
struct ObservationRow {
    double info = 0.0;
    double precision = 0.0;
    double time = 0.0;
    double experience = 0.0;
};

struct NodeStats {
    std::string id;
    std::size_t successes = 0;
    double success_rate = 0.0;
    double standard_error = 0.0;
    double mean_time = 0.0;
    double entropy_bits = 0.0;
    double flow_cv = 0.0;
    double utilization = 0.0;
    bool saturated = false;
    std::vector<double> dwell_times;            // per trial
    std::vector<double> precision_trajectory;   // per trial effective precision prob
    std::vector<ObservationRow> observations;   // per trial
};

struct SimReport {
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    bool learning = false;
    double end_to_end_rate = 0.0;
    std::vector<NodeStats> nodes;
};

/// Ensemble run. Per-trial seeds derive from the master seed by a counter mix,
/// so execution is order-independent and the report is bit-identical for any
/// worker count. reset_experience = true gives i.i.d. trials (parallelizable);
/// false persists experience across trials and is contractually sequential.
inline SimReport run_monte_carlo(const WorkflowGraph& g, const AgentAssignment& assignment,
                                 std::size_t n_trials, std::uint64_t master_seed,
                                 bool reset_experience, unsigned workers = 1) {
    if (n_trials < 1) throw DomainError("run_monte_carlo: n_trials must be >= 1");
    if (!reset_experience && workers > 1)
        throw DomainError("learning mode is sequential; concurrent execution refused");
    {
        auto issues = validate_graph(g);
        if (!issues.empty()) throw DataError("invalid workflow graph: " + issues.front());
    }
    const auto topo = topological_order(g);
    const std::size_t n_nodes = g.nodes.size();

    // Regime G integrals depend only on the source and the master seed; solve
    // them once per run.
    std::vector<double> joint_cache(n_nodes, 0.0);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const auto& node = g.nodes[i];
        if (node.regime.kind == RegimeKind::G_JointExternal) {
            const auto est = eval_joint_external(*node.external, node.regime.mc_samples,
                                                 mix_seed(master_seed, 0xE0000000ULL + i));
            joint_cache[i] = std::clamp(est.value, 0.0, 1.0);
        }
    }

    std::vector<TrialRecord> records(n_trials);
    if (reset_experience) {
        const unsigned w = std::max(1u, workers);
        auto work = [&](std::size_t begin, std::size_t end) {
            for (std::size_t k = begin; k < end; ++k) {
                AgentAssignment local = assignment;
                records[k] = run_trial(g, topo, local, mix_seed(master_seed, k), &joint_cache);
                records[k].trial_index = static_cast<int>(k);
            }
        };
        if (w == 1) {
            work(0, n_trials);
        } else {
            std::vector<std::thread> pool;
            const std::size_t chunk = (n_trials + w - 1) / w;
            for (unsigned t = 0; t < w; ++t) {
                const std::size_t begin = std::min<std::size_t>(t * chunk, n_trials);
                const std::size_t end = std::min<std::size_t>(begin + chunk, n_trials);
                if (begin < end) pool.emplace_back(work, begin, end);
            }
            for (auto& th : pool) th.join();
        }
    } else {
        AgentAssignment state = assignment;
        for (std::size_t k = 0; k < n_trials; ++k) {
            try {
                records[k] = run_trial(g, topo, state, mix_seed(master_seed, k), &joint_cache);
            } catch (const RegimeMismatchError& e) {
                throw RegimeMismatchError("trial " + std::to_string(k) + ": " + e.what());
            }
            records[k].trial_index = static_cast<int>(k);
        }
    }

    SimReport report;
    report.seed = master_seed;
    report.trials = n_trials;
    report.learning = !reset_experience;
    report.nodes.resize(n_nodes);

    std::size_t end_to_end_hits = 0;
    for (const auto& rec : records)
        if (rec.end_to_end_precision == 1.0) ++end_to_end_hits;
    report.end_to_end_rate = static_cast<double>(end_to_end_hits) / static_cast<double>(n_trials);

    // Lay trials end to end on a cumulative clock so each node's completions
    // form a stream whose gaps carry flow and utilization information.
    std::vector<double> offsets(n_trials, 0.0);
    for (std::size_t k = 1; k < n_trials; ++k)
        offsets[k] = offsets[k - 1] + records[k - 1].total_time;

    for (std::size_t i = 0; i < n_nodes; ++i) {
        NodeStats& ns = report.nodes[i];
        ns.id = g.nodes[i].id;
        ns.dwell_times.resize(n_trials);
        ns.precision_trajectory.resize(n_trials);
        ns.observations.resize(n_trials);
        std::vector<double> completions(n_trials);
        double time_sum = 0.0;
        for (std::size_t k = 0; k < n_trials; ++k) {
            const auto& rec = records[k];
            const auto& out = rec.outcomes[i];
            if (out.precision_hit) ++ns.successes;
            ns.dwell_times[k] = out.time_spent;
            ns.precision_trajectory[k] = rec.precision_probs[i];
            ns.observations[k] = {rec.info_draws[i], out.precision_value, out.time_spent,
                                  rec.experience_before[i]};
            completions[k] = offsets[k] + rec.finish_times[i];
            time_sum += out.time_spent;
        }
        const double nd = static_cast<double>(n_trials);
        ns.success_rate = static_cast<double>(ns.successes) / nd;
        ns.standard_error = std::sqrt(ns.success_rate * (1.0 - ns.success_rate) / nd);
        ns.mean_time = time_sum / nd;
        ns.entropy_bits = binary_entropy(ns.success_rate);
        if (n_trials >= 3) {
            const double span = completions.back() - completions.front();
            try {
                ns.flow_cv = flow_regularity(completions);
            } catch (const DataError&) {
                ns.flow_cv = 0.0;
            }
            if (span > 0.0) {
                const double mean_gap = span / (nd - 1.0);
                const auto sat = saturation_flag(1.0 / mean_gap, 1.0 / ns.mean_time);
                ns.utilization = sat.utilization;
                ns.saturated = sat.saturated;
            }
        }
    }
    return report;
}

/// Per-node histogram of dwelling times with Freedman-Diaconis bin widths.
inline Histogram dwelling_time_distribution(const SimReport& report, const std::string& node_id) {
    for (const auto& ns : report.nodes)
        if (ns.id == node_id) return make_histogram(ns.dwell_times);
    throw LookupError("unknown node id: " + node_id);
}

}  // namespace mflow
