#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mflow/classifier.hpp"
#include "mflow/simulator.hpp"

using namespace mflow;

namespace {

ObservationSet from_node_stats(const NodeStats& ns) {
    ObservationSet obs;
    for (const auto& row : ns.observations) {
        obs.info.push_back(row.info);
        obs.precision.push_back(row.precision);
        obs.time.push_back(row.time);
        obs.experience.push_back(row.experience);
    }
    return obs;
}

ObservationSet simulate_regime(const WorkNode& node, double agent_experience, std::size_t trials,
                               std::uint64_t seed) {
    WorkflowGraph g;
    g.nodes = {node};
    AgentAssignment a;
    a.agents.push_back({"agent", Experience(agent_experience), 0.1});
    a.node_agent[node.id] = 0;
    auto report = run_monte_carlo(g, a, trials, seed, true);
    return from_node_stats(report.nodes[0]);
}

WorkNode base_node(RegimeKind kind, const std::string& id) {
    WorkNode n;
    n.id = id;
    n.info = {1.0};
    n.regime.kind = kind;
    n.regime.base_precision = 0.5;
    n.regime.time_model = {TimeKind::ExponentialService, 1.0, 1.0};
    n.precision_target = 0.5;
    return n;
}

}  // namespace

TEST_CASE("empirical_cdf counts at and between sample points") {
    auto F = empirical_cdf({1.0, 2.0, 2.0, 3.0});
    CHECK(F(0.0) == 0.0);
    CHECK(F(1.0) == 0.25);
    CHECK(F(2.0) == 0.75);
    CHECK(F(2.5) == 0.75);
    CHECK(F(3.0) == 1.0);
    CHECK(F(99.0) == 1.0);
    CHECK_THROWS_AS(empirical_cdf({}), DataError);
}

TEST_CASE("detect_support separates lattices from continuous samples") {
    std::vector<double> lattice;
    SplitMix64 rng(1);
    for (int k = 0; k < 200; ++k)
        lattice.push_back(0.25 * static_cast<double>(rng.next() % 41));
    CHECK(detect_support(lattice) == Support::Discrete);

    std::vector<double> few_values;
    for (int k = 0; k < 200; ++k) few_values.push_back(k % 2 ? 0.3 : 1.7);
    CHECK(detect_support(few_values) == Support::Discrete);

    std::vector<double> cont;
    for (int k = 0; k < 200; ++k) cont.push_back(rng.uniform01());
    CHECK(detect_support(cont) == Support::Continuous);

    CHECK_THROWS_AS(detect_support(std::vector<double>(29, 1.0)), InsufficientDataError);
}

TEST_CASE("dominance_test detects one-sided stochastic order") {
    SplitMix64 rng(9);
    std::vector<double> high, low;
    for (int k = 0; k < 1000; ++k) {
        const double u = rng.uniform01();
        high.push_back(std::sqrt(u));  // CDF x^2, stochastically above uniform
        low.push_back(rng.uniform01());
    }
    auto r = dominance_test(empirical_cdf(high), empirical_cdf(low));
    CHECK(r.verdict == Dominance::PrecisionDominates);
    CHECK(r.d_plus > r.critical);
    // sup(x - x^2) = 0.25 on normalized scales
    CHECK(r.d_plus == doctest::Approx(0.25).epsilon(0.25));

    auto flipped = dominance_test(empirical_cdf(low), empirical_cdf(high));
    CHECK(flipped.verdict == Dominance::InfoDominates);
    CHECK(flipped.d_minus == doctest::Approx(r.d_plus).epsilon(1e-12));
    CHECK(flipped.d_plus == doctest::Approx(r.d_minus).epsilon(1e-12));

    auto same = dominance_test(empirical_cdf(low), empirical_cdf(low));
    CHECK(same.verdict == Dominance::Inconclusive);
    CHECK(same.d_plus == 0.0);
    CHECK(same.d_minus == 0.0);

    CHECK_THROWS_AS(dominance_test(empirical_cdf({1.0, 2.0}), empirical_cdf(low)),
                    InsufficientDataError);
    CHECK_THROWS_AS(
        dominance_test(empirical_cdf(std::vector<double>(50, 1.0)), empirical_cdf(low)),
        DataError);
}

TEST_CASE("classify_regime refuses small or incomplete inputs") {
    ObservationSet tiny;
    for (int k = 0; k < 29; ++k) {
        tiny.info.push_back(1.0);
        tiny.precision.push_back(k % 2 ? 1.0 : 0.0);
        tiny.time.push_back(1.0);
    }
    CHECK_THROWS_AS(classify_regime(tiny), InsufficientDataError);

    // Discrete non-binary data without the experience column cannot be placed
    // in a tilted regime, so classification refuses rather than guesses.
    auto obs = simulate_regime(base_node(RegimeKind::C_DiscreteDecreasing, "c"), 2.0, 2000, 5);
    obs.experience.clear();
    CHECK_THROWS_AS(classify_regime(obs), DataError);
}

TEST_CASE("round trip: simulated regimes are recovered from observations") {
    const std::size_t n = 10000;

    SUBCASE("A") {
        auto node = base_node(RegimeKind::A_Bernoulli, "a");
        node.regime.base_precision = 0.3;
        auto r = classify_regime(simulate_regime(node, 1.0, n, 11));
        CHECK(r.kind == RegimeKind::A_Bernoulli);
        CHECK(r.confidence >= 0.9);
    }
    SUBCASE("B") {
        auto node = base_node(RegimeKind::B_Deterministic, "b");
        node.regime.table = JointTable::checked({{{0}, 1.0}});
        auto r = classify_regime(simulate_regime(node, 1.0, n, 12));
        CHECK(r.kind == RegimeKind::B_Deterministic);
        CHECK(r.confidence >= 0.9);
    }
    SUBCASE("C") {
        auto r = classify_regime(
            simulate_regime(base_node(RegimeKind::C_DiscreteDecreasing, "c"), 2.0, n, 13));
        CHECK(r.kind == RegimeKind::C_DiscreteDecreasing);
        CHECK(r.confidence >= 0.9);
        CHECK(r.evidence.support == Support::Discrete);
        CHECK(r.evidence.dominance.verdict == Dominance::PrecisionDominates);
    }
    SUBCASE("D") {
        auto r = classify_regime(
            simulate_regime(base_node(RegimeKind::D_DiscreteIncreasing, "d"), 0.5, n, 14));
        CHECK(r.kind == RegimeKind::D_DiscreteIncreasing);
        CHECK(r.confidence >= 0.9);
        CHECK(r.evidence.dominance.verdict == Dominance::InfoDominates);
    }
    SUBCASE("E") {
        auto node = base_node(RegimeKind::E_ContinuousDecreasing, "e");
        node.regime.density = DensitySpec::uniform(0.0, 1.0);
        node.regime.lower = 0.5;
        node.regime.upper = 1.0;
        auto r = classify_regime(simulate_regime(node, 2.0, n, 15));
        CHECK(r.kind == RegimeKind::E_ContinuousDecreasing);
        CHECK(r.confidence >= 0.9);
        CHECK(r.evidence.support == Support::Continuous);
    }
    SUBCASE("F") {
        auto node = base_node(RegimeKind::F_ContinuousIncreasing, "f");
        node.regime.cdf_samples = {{0.0, 0.0}, {1.0, 1.0}};
        node.regime.eval_at = 0.25;
        node.regime.rate = 1.0;
        auto r = classify_regime(simulate_regime(node, 0.5, n, 16));
        CHECK(r.kind == RegimeKind::F_ContinuousIncreasing);
        CHECK(r.confidence >= 0.9);
    }
}

TEST_CASE("regime G needs covariates and residual correlation") {
    SplitMix64 rng(21);
    ObservationSet obs;
    std::vector<double> cov;
    for (int k = 0; k < 2000; ++k) {
        const double u = rng.uniform01();
        obs.precision.push_back(u);
        obs.info.push_back(rng.uniform01());  // same law: dominance inconclusive
        obs.time.push_back(1.0);
        cov.push_back(u + 0.1 * rng.uniform01());
    }
    auto without = classify_regime(obs);
    CHECK(without.kind != RegimeKind::G_JointExternal);

    obs.covariate_names = {"external_0"};
    obs.covariates = {cov};
    auto with = classify_regime(obs);
    CHECK(with.kind == RegimeKind::G_JointExternal);
    CHECK(with.evidence.max_covariate_correlation > 0.3);
    CHECK(with.confidence > 0.5);
}

TEST_CASE("classification is deterministic for a fixed config seed") {
    auto obs = simulate_regime(base_node(RegimeKind::C_DiscreteDecreasing, "c"), 2.0, 3000, 30);
    auto r1 = classify_regime(obs);
    auto r2 = classify_regime(obs);
    CHECK(r1.kind == r2.kind);
    CHECK(r1.confidence == r2.confidence);
}
