#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mflow/regimes.hpp"
#include "mflow/rng.hpp"

using namespace mflow;

TEST_CASE("eval_bernoulli two-point masses") {
    auto d1 = eval_bernoulli(1.0);
    CHECK(d1.precision_prob() == 1.0);
    CHECK(d1.table()[0].second == 1.0);
    CHECK(d1.table()[1].second == 0.0);

    auto d0 = eval_bernoulli(0.0);
    CHECK(d0.precision_prob() == 0.0);
    CHECK(d0.table()[1].second == 1.0);

    auto d = eval_bernoulli(0.3);
    CHECK(d.table()[0].second == doctest::Approx(0.3));
    CHECK(d.table()[1].second == doctest::Approx(0.7));

    CHECK_THROWS_AS(eval_bernoulli(1.2), DomainError);
}

TEST_CASE("eval_deterministic handles point mass and lookup") {
    auto point = eval_deterministic(JointTable::checked({{{0}, 1.0}}), 0);
    CHECK(point.precision_prob() == 1.0);
    CHECK(point.support() == SupportDescription::PointMass);

    auto split = eval_deterministic(JointTable::checked({{{0}, 0.5}, {{1}, 0.5}}), 0);
    CHECK(split.precision_prob() == 0.5);
    CHECK(split.support() == SupportDescription::Tabulated);

    JointTable bad{{{{0}, 0.6}, {{1}, 0.5}}};
    CHECK_THROWS_AS(eval_deterministic(bad, 0), NormalizationError);
    CHECK_THROWS_AS(JointTable::checked({{{0}, 0.6}, {{1}, 0.5}}), NormalizationError);
}

TEST_CASE("tilt_precision fixed point, examples, absorbing states") {
    CHECK(tilt_precision(0.5, 1.0) == 0.5);
    CHECK(tilt_precision(0.5, 2.0) == doctest::Approx(0.7071067811865476).epsilon(1e-15));
    CHECK(tilt_precision(0.5, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(tilt_precision(0.0, 3.0) == 0.0);
    CHECK(tilt_precision(1.0, 0.5) == 1.0);
    CHECK_THROWS_AS(tilt_precision(0.5, 0.0), DomainError);
    CHECK_THROWS_AS(tilt_precision(0.5, -1.0), DomainError);
    CHECK_THROWS_AS(tilt_precision(1.5, 1.0), DomainError);
}

TEST_CASE("tilt_precision is strictly increasing in ratio with the right limits") {
    SplitMix64 rng(42);
    for (int i = 0; i < 10000; ++i) {
        const double p = 0.01 + 0.98 * rng.uniform01();
        const double r = std::exp(rng.uniform(-5.0, 5.0));
        const double dr = 1e-6 + r * 1e-6;
        CHECK(tilt_precision(p, r + dr) > tilt_precision(p, r));
        CHECK(tilt_precision(p, 1.0) == p);
    }
    CHECK(tilt_precision(0.5, 1e6) > 1.0 - 1e-3);
    CHECK(tilt_precision(0.5, 1e-6) < 1e-3);
}

TEST_CASE("eval_monotone tilts by the experience ratio") {
    RegimeSpec c;
    c.kind = RegimeKind::C_DiscreteDecreasing;
    c.base_precision = 0.6;
    auto dist = eval_monotone(c, Experience(8.0), {4.0});
    CHECK(dist.precision_prob() == doctest::Approx(std::sqrt(0.6)).epsilon(1e-15));
    CHECK(dist.precision_prob() > c.base_precision);  // upward tilt when ratio > 1

    RegimeSpec d;
    d.kind = RegimeKind::D_DiscreteIncreasing;
    d.base_precision = 0.6;
    auto dd = eval_monotone(d, Experience(2.0), {4.0});
    CHECK(dd.precision_prob() == doctest::Approx(0.36).epsilon(1e-15));
    CHECK(dd.precision_prob() < d.base_precision);

    CHECK_THROWS_AS(eval_monotone(c, Experience(2.0), {4.0}), RegimeMismatchError);
    CHECK_THROWS_AS(eval_monotone(d, Experience(8.0), {4.0}), RegimeMismatchError);
}

TEST_CASE("eval_continuous_decreasing against closed-form antiderivatives") {
    auto uni = DensitySpec::uniform(0.0, 1.0);
    CHECK(eval_continuous_decreasing(uni, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(eval_continuous_decreasing(uni, 0.25, 0.75) == doctest::Approx(0.5).epsilon(1e-9));

    auto tri = DensitySpec::triangular_decreasing(0.0, 1.0);
    // antiderivative of 2(1-x) over [0.5, 1] is (1-x)^2 evaluated: 0.25
    CHECK(eval_continuous_decreasing(tri, 0.5, 1.0) == doctest::Approx(0.25).epsilon(1e-8));

    CHECK_THROWS_AS(eval_continuous_decreasing(uni, -0.5, 0.5), DomainError);
    CHECK_THROWS_AS(eval_continuous_decreasing(uni, 0.7, 0.2), DomainError);
}

TEST_CASE("full-support mass is 1 for every density kind") {
    std::vector<DensitySpec> kinds = {
        DensitySpec::uniform(0.0, 2.0), DensitySpec::triangular_decreasing(-1.0, 3.0),
        DensitySpec::triangular_increasing(0.0, 1.0),
        DensitySpec::tabulated({{0.0, 0.25}, {1.0, 0.75}, {2.0, 0.25}})};
    for (const auto& d : kinds)
        CHECK(eval_continuous_decreasing(d, d.lower(), d.upper()) ==
              doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("eval_continuous_increasing reads a rate-scaled CDF") {
    std::vector<std::pair<double, double>> identity = {{0.0, 0.0}, {1.0, 1.0}};
    CHECK(eval_continuous_increasing(identity, 0.5, 1.0) == doctest::Approx(0.5));
    CHECK(eval_continuous_increasing(identity, 0.5, 0.0) == 0.0);
    std::vector<std::pair<double, double>> cdf = {{0.0, 0.0}, {1.0, 0.8}, {2.0, 1.0}};
    CHECK(eval_continuous_increasing(cdf, 1.5, 2.0) == doctest::Approx(1.8).epsilon(1e-12));
    std::vector<std::pair<double, double>> bad = {{0.0, 0.5}, {1.0, 0.2}};
    CHECK_THROWS_AS(eval_continuous_increasing(bad, 0.5, 1.0), DataError);
    CHECK_THROWS_AS(eval_continuous_increasing(identity, 1.5, 1.0), DomainError);
}

TEST_CASE("joint external estimate: exact for uniform, deterministic per seed") {
    ExternalSource one;
    one.densities.push_back(DensitySpec::uniform(0.0, 1.0));
    one.bounds.push_back({0.0, 1.0});
    auto est = eval_joint_external(one, 1000, 99);
    CHECK(est.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.standard_error == doctest::Approx(0.0).epsilon(1e-12));

    ExternalSource two;
    for (int d = 0; d < 2; ++d) {
        two.densities.push_back(DensitySpec::uniform(0.0, 1.0));
        two.bounds.push_back({0.0, 0.5});
    }
    auto box = eval_joint_external(two, 10000, 7);
    CHECK(std::abs(box.value - 0.25) <= 3.0 * box.standard_error + 1e-12);

    auto again = eval_joint_external(two, 10000, 7);
    CHECK(box.value == again.value);
    CHECK(box.standard_error == again.standard_error);

    CHECK_THROWS_AS(eval_joint_external(two, 50, 7), DomainError);
}

TEST_CASE("joint external error bars cover the analytic mass") {
    // Non-constant integrand so the reported standard error is informative.
    ExternalSource src;
    src.densities.push_back(DensitySpec::triangular_decreasing(0.0, 1.0));
    src.densities.push_back(DensitySpec::triangular_increasing(0.0, 1.0));
    src.bounds.push_back({0.0, 0.5});
    src.bounds.push_back({0.0, 0.5});
    // mass = [1-(1-x)^2]_0^.5 * [x^2]_0^.5 = 0.75 * 0.25
    const double analytic = 0.75 * 0.25;
    int covered = 0;
    for (int s = 0; s < 100; ++s) {
        auto est = eval_joint_external(src, 10000, 1000 + s);
        if (std::abs(est.value - analytic) <= 3.0 * est.standard_error) ++covered;
    }
    CHECK(covered >= 99);
}

TEST_CASE("build_distribution dispatches and enforces preconditions") {
    RegimeSpec a;
    a.kind = RegimeKind::A_Bernoulli;
    a.base_precision = 0.4;
    auto da = build_distribution(a, Experience(1.0), {1.0});
    CHECK(da.support() == SupportDescription::TwoPoint);
    CHECK(da.precision_prob() == doctest::Approx(0.4));

    RegimeSpec b;
    b.kind = RegimeKind::B_Deterministic;
    b.table = JointTable::checked({{{0}, 1.0}});
    CHECK(build_distribution(b, Experience(1.0), {1.0}).precision_prob() == 1.0);
    RegimeSpec b_empty;
    b_empty.kind = RegimeKind::B_Deterministic;
    CHECK_THROWS_AS(build_distribution(b_empty, Experience(1.0), {1.0}), DataError);

    RegimeSpec g;
    g.kind = RegimeKind::G_JointExternal;
    CHECK_THROWS_AS(build_distribution(g, Experience(1.0), {1.0}), DataError);
}

TEST_CASE("random tabulated distributions: normalized or rejected") {
    SplitMix64 rng(5);
    for (int t = 0; t < 200; ++t) {
        const int k = 2 + static_cast<int>(rng.next() % 8);
        std::vector<std::pair<double, double>> entries(k);
        double sum = 0.0;
        for (int j = 0; j < k; ++j) {
            entries[j] = {static_cast<double>(j), rng.uniform01() + 1e-3};
            sum += entries[j].second;
        }
        for (auto& [v, p] : entries) p /= sum;
        CHECK_NOTHROW(MDistribution::tabulated(RegimeKind::B_Deterministic, entries[0].second,
                                               entries));
        entries[0].second += 1e-6;
        CHECK_THROWS_AS(MDistribution::tabulated(RegimeKind::B_Deterministic,
                                                 entries[0].second, entries),
                        NormalizationError);
    }
}
