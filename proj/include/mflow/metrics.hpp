#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mflow/errors.hpp"

namespace mflow {

/// Fixed-edge histogram: len(counts) = len(edges) - 1.
struct Histogram {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
};

/// Builds a histogram with Freedman-Diaconis bin widths. A degenerate sample
/// (zero IQR or zero range) collapses to a single unit-width bin.
inline Histogram make_histogram(std::vector<double> values) {
    if (values.empty()) throw InsufficientDataError("make_histogram: empty sample");
    std::sort(values.begin(), values.end());
    const double lo = values.front();
    const double hi = values.back();
    const std::size_t n = values.size();
    const double q1 = values[static_cast<std::size_t>(0.25 * static_cast<double>(n - 1))];
    const double q3 = values[static_cast<std::size_t>(0.75 * static_cast<double>(n - 1))];
    const double width = 2.0 * (q3 - q1) / std::cbrt(static_cast<double>(n));
    Histogram h;
    if (width <= 0.0 || hi <= lo) {
        h.edges = {lo - 0.5, hi + 0.5};
        h.counts = {n};
        return h;
    }
    const std::size_t bins =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - lo) / width)));
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b)
        h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
        if (b >= bins) b = bins - 1;
        h.counts[b] += 1;
    }
    return h;
}

/// Shannon entropy in bits of a normalized probability vector, 0 log 0 = 0.
inline double shannon_entropy(const std::vector<double>& probs) {
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("shannon_entropy: probability outside [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw DataError("shannon_entropy: probabilities sum to " + std::to_string(sum) +
                        ", expected 1");
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

/// Binary entropy H(p) in bits.
inline double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binary_entropy: p outside [0,1]");
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

/// Maps each per-trial success probability to its binary entropy, exposing the
/// rise-then-fall shape as learning drives p across 1/2.
inline std::vector<double> entropy_trajectory(const std::vector<double>& trial_precisions) {
    std::vector<double> out;
    out.reserve(trial_precisions.size());
    for (double p : trial_precisions) out.push_back(binary_entropy(p));
    return out;
}

/// Coefficient of variation (population stddev / mean) of inter-completion
/// gaps. 0 means perfectly regular flow.
inline double flow_regularity(const std::vector<double>& completion_times) {
    if (completion_times.size() < 3)
        throw InsufficientDataError("flow_regularity: need >= 3 completions");
    std::vector<double> gaps;
    gaps.reserve(completion_times.size() - 1);
    for (std::size_t i = 1; i < completion_times.size(); ++i) {
        const double g = completion_times[i] - completion_times[i - 1];
        if (g < 0.0) throw DataError("flow_regularity: completion times must be nondecreasing");
        gaps.push_back(g);
    }
    double mean = 0.0;
    for (double g : gaps) mean += g;
    mean /= static_cast<double>(gaps.size());
    if (mean == 0.0) throw DataError("flow_regularity: zero mean gap (degenerate)");
    double var = 0.0;
    for (double g : gaps) var += (g - mean) * (g - mean);
    var /= static_cast<double>(gaps.size());
    return std::sqrt(var) / mean;
}

struct SaturationResult {
    double utilization = 0.0;
    bool saturated = false;
};

/// Queueing utilization criterion: a work step saturates when jobs arrive at
/// least as fast as they are served.
inline SaturationResult saturation_flag(double arrival_rate, double service_rate) {
    if (!(service_rate > 0.0)) throw DomainError("saturation_flag: service_rate must be > 0");
    const double rho = arrival_rate / service_rate;
    return {rho, rho >= 1.0};
}

}  // namespace mflow
