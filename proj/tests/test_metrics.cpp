#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mflow/metrics.hpp"
#include "mflow/rng.hpp"

using namespace mflow;

TEST_CASE("shannon_entropy on canonical distributions") {
    CHECK(shannon_entropy({1.0}) == 0.0);
    CHECK(shannon_entropy({0.5, 0.5}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(shannon_entropy({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(shannon_entropy({0.5, 0.4}), DataError);
    CHECK_THROWS_AS(shannon_entropy({1.5, -0.5}), DomainError);
}

TEST_CASE("uniform maximizes entropy") {
    SplitMix64 rng(31);
    for (int t = 0; t < 500; ++t) {
        const int n = 2 + static_cast<int>(rng.next() % 10);
        std::vector<double> p(n);
        double sum = 0.0;
        for (auto& v : p) sum += (v = rng.uniform01() + 1e-6);
        for (auto& v : p) v /= sum;
        CHECK(shannon_entropy(p) <= std::log2(static_cast<double>(n)) + 1e-12);
    }
    std::vector<double> uniform(8, 0.125);
    CHECK(shannon_entropy(uniform) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("entropy_trajectory maps per-trial precision to binary entropy") {
    auto single = entropy_trajectory({0.5});
    CHECK(single[0] == doctest::Approx(1.0).epsilon(1e-15));
    auto absorbing = entropy_trajectory({0.0, 1.0});
    CHECK(absorbing[0] == 0.0);
    CHECK(absorbing[1] == 0.0);
    auto path = entropy_trajectory({0.5, 0.7071, 0.99});
    CHECK(path[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(path[1] == doctest::Approx(0.8731).epsilon(1e-3));
    CHECK(path[2] == doctest::Approx(0.0808).epsilon(1e-2));
}

TEST_CASE("entropy_trajectory of a monotone path crossing 1/2 is unimodal") {
    std::vector<double> ps;
    for (int k = 0; k <= 100; ++k) ps.push_back(0.1 + 0.85 * k / 100.0);
    const auto h = entropy_trajectory(ps);
    bool falling = false;
    for (std::size_t k = 1; k < h.size(); ++k) {
        if (h[k] < h[k - 1]) falling = true;
        if (falling) CHECK(h[k] <= h[k - 1] + 1e-12);
    }
    CHECK(falling);
}

TEST_CASE("flow_regularity coefficient of variation") {
    CHECK(flow_regularity({1.0, 2.0, 3.0, 4.0}) == 0.0);
    // gaps (1,2,3): population stddev sqrt(2/3), mean 2
    CHECK(flow_regularity({0.0, 1.0, 3.0, 6.0}) ==
          doctest::Approx(std::sqrt(2.0 / 3.0) / 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(flow_regularity({5.0, 5.0, 5.0}), DataError);
    CHECK_THROWS_AS(flow_regularity({1.0, 2.0}), InsufficientDataError);
}

TEST_CASE("flow_regularity is scale invariant") {
    SplitMix64 rng(13);
    std::vector<double> times = {0.0};
    for (int k = 0; k < 50; ++k) times.push_back(times.back() + 0.1 + rng.uniform01());
    const double cv = flow_regularity(times);
    for (double c : {0.5, 3.0, 1e4}) {
        std::vector<double> scaled = times;
        for (auto& t : scaled) t *= c;
        CHECK(flow_regularity(scaled) == doctest::Approx(cv).epsilon(1e-12));
    }
}

TEST_CASE("saturation_flag utilization criterion") {
    auto half = saturation_flag(0.5, 1.0);
    CHECK(half.utilization == 0.5);
    CHECK_FALSE(half.saturated);
    auto boundary = saturation_flag(1.0, 1.0);
    CHECK(boundary.utilization == 1.0);
    CHECK(boundary.saturated);
    auto overload = saturation_flag(3.0, 1.5);
    CHECK(overload.utilization == 2.0);
    CHECK(overload.saturated);
    CHECK_THROWS_AS(saturation_flag(1.0, 0.0), DomainError);
}

TEST_CASE("histogram shape") {
    auto degenerate = make_histogram(std::vector<double>(100, 2.0));
    CHECK(degenerate.counts.size() == 1);
    CHECK(degenerate.counts[0] == 100);

    SplitMix64 rng(77);
    std::vector<double> sample;
    for (int k = 0; k < 5000; ++k) sample.push_back(rng.uniform01());
    auto h = make_histogram(sample);
    CHECK(h.counts.size() == h.edges.size() - 1);
    std::size_t total = 0;
    for (auto c : h.counts) total += c;
    CHECK(total == sample.size());
}
