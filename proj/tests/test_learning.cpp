#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mflow/learning.hpp"
#include "mflow/regimes.hpp"
#include "mflow/rng.hpp"

using namespace mflow;

namespace {
EventOutcome outcome(bool hit) {
    EventOutcome o;
    o.precision_hit = hit;
    o.precision_value = hit ? 1.0 : 0.0;
    o.time_spent = 1.0;
    return o;
}
}  // namespace

TEST_CASE("interpolate reads the ladder total and last increment") {
    auto ladder = WeightLadder::from_weights({8.0, 10.0});  // total 10, last increment 2
    CHECK(interpolate(ladder, 10.0, 0.0) == 0.0);
    CHECK(interpolate(ladder, 14.0, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(interpolate(ladder, 10.0, 3.0) == 3.0);
}

TEST_CASE("interpolate rejects a degenerate ladder") {
    auto flat = WeightLadder::from_weights({5.0, 5.0});
    CHECK_THROWS_AS(interpolate(flat, 6.0, 0.0), DataError);
    CHECK_THROWS_AS(interpolate(WeightLadder{}, 1.0, 0.0), DataError);
}

TEST_CASE("interpolate is affine in the probe") {
    SplitMix64 rng(3);
    auto ladder = WeightLadder::from_weights({1.0, 4.0, 9.0});
    for (int t = 0; t < 1000; ++t) {
        const double a = rng.uniform01();
        const double x = rng.uniform(-20.0, 20.0);
        const double y = rng.uniform(-20.0, 20.0);
        const double i = rng.uniform(-3.0, 3.0);
        const double lhs = interpolate(ladder, a * x + (1.0 - a) * y, i);
        const double rhs = a * interpolate(ladder, x, i) + (1.0 - a) * interpolate(ladder, y, i);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("WeightLadder invariants") {
    CHECK_THROWS_AS(WeightLadder::from_weights({3.0, 2.0}), DomainError);
    WeightLadder bad{{{1.0, 1}, {2.0, 3}}};
    CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("pattern_response linear form") {
    CHECK(pattern_response({1.0}, {1.0}) == 1.0);
    CHECK(pattern_response({2.0, 3.0}, {0.0, 0.0}) == 0.0);
    CHECK(pattern_response({1.0, 2.0, 3.0}, {0.5, 0.5, 0.5}) == doctest::Approx(3.0));
    CHECK_THROWS_AS(pattern_response({1.0, 2.0}, {0.5}), DataError);
    CHECK_THROWS_AS(pattern_response({1.0}, {1.5}), DomainError);
}

TEST_CASE("update_experience geometric growth") {
    auto e = Experience(10.0);
    CHECK(update_experience(e, outcome(true), 0.1).magnitude() ==
          doctest::Approx(11.0).epsilon(1e-15));
    CHECK(update_experience(e, outcome(false), 0.1).magnitude() ==
          doctest::Approx(10.1).epsilon(1e-15));
    // empty experience is seeded at the floor of 1 before the update
    CHECK(update_experience(Experience(), outcome(true), 0.1).magnitude() ==
          doctest::Approx(1.1).epsilon(1e-15));
    CHECK_THROWS_AS(update_experience(e, outcome(true), 0.0), DomainError);
}

TEST_CASE("experience magnitude is nondecreasing over any trial sequence") {
    SplitMix64 rng(17);
    Experience e;
    double last = e.magnitude();
    for (int t = 0; t < 500; ++t) {
        e = update_experience(e, outcome(rng.bernoulli(0.5)), 0.05 + 0.2 * rng.uniform01());
        CHECK(e.magnitude() >= last);
        last = e.magnitude();
    }
    CHECK(e.trials_completed() == 500);
}

TEST_CASE("k consecutive hits compound exponentially") {
    const double m0 = 2.0;
    const double g = 0.07;
    Experience e(m0);
    for (int k = 1; k <= 50; ++k) {
        e = update_experience(e, outcome(true), g);
        CHECK(e.magnitude() ==
              doctest::Approx(m0 * std::pow(1.0 + g, k)).epsilon(1e-9));
    }
}

TEST_CASE("regime C with per-trial updates drives precision toward 1") {
    InfoSource info{1.0};
    RegimeSpec c;
    c.kind = RegimeKind::C_DiscreteDecreasing;
    c.base_precision = 0.5;
    Experience e(1.1);
    SplitMix64 rng(23);
    double prev = 0.0;
    double final_p = 0.0;
    for (int t = 0; t < 200; ++t) {
        const double p = eval_monotone(c, e, info).precision_prob();
        CHECK(p >= prev - 1e-12);
        prev = p;
        final_p = p;
        e = update_experience(e, outcome(rng.bernoulli(p)), 0.1);
    }
    CHECK(final_p > 0.99);
}
