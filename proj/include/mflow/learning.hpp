#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "mflow/errors.hpp"
#include "mflow/model.hpp"

namespace mflow {

/// Cumulative weight ladder: (cumulative weight, trial ordinal) pairs with
/// ordinals 1..n and nondecreasing weights.
struct WeightLadder {
    std::vector<std::pair<double, int>> entries;

    void validate() const {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].second != static_cast<int>(i) + 1)
                throw DataError("WeightLadder trial indices must be 1..n consecutive");
            if (entries[i].first < 0.0) throw DomainError("WeightLadder weights must be >= 0");
            if (i > 0 && entries[i].first < entries[i - 1].first)
                throw DomainError("WeightLadder weights must be nondecreasing");
        }
    }

    static WeightLadder from_weights(const std::vector<double>& weights) {
        WeightLadder l;
        l.entries.reserve(weights.size());
        for (std::size_t i = 0; i < weights.size(); ++i)
            l.entries.emplace_back(weights[i], static_cast<int>(i) + 1);
        l.validate();
        return l;
    }
};

/// Interpolated experience read-out: (probe - total) / last increment + i,
/// where the total is the ladder's final cumulative weight and the last
/// increment is the difference between its two final entries (or the sole
/// weight when n = 1). Affine in the probe.
inline double interpolate(const WeightLadder& ladder, double probe, double i) {
    if (ladder.entries.empty()) throw DataError("interpolate: empty ladder");
    const std::size_t n = ladder.entries.size();
    const double total = ladder.entries.back().first;
    const double increment = (n == 1) ? total : total - ladder.entries[n - 2].first;
    if (increment == 0.0) throw DataError("interpolate: degenerate ladder (zero last increment)");
    return (probe - total) / increment + i;
}

/// Linear pattern-search form: sum of response coefficients times precisions.
inline double pattern_response(const std::vector<double>& responses,
                               const std::vector<double>& precisions) {
    if (responses.empty() || responses.size() != precisions.size())
        throw DataError("pattern_response: responses and precisions must have equal length >= 1");
    double sum = 0.0;
    for (std::size_t k = 0; k < responses.size(); ++k) {
        if (!(precisions[k] >= 0.0 && precisions[k] <= 1.0))
            throw DomainError("pattern_response: precision outside [0,1]");
        sum += responses[k] * precisions[k];
    }
    return sum;
}

inline constexpr double kMissFactor = 0.1;
inline constexpr double kExperienceFloor = 1.0;

/// Trial-to-trial experience update: geometric growth by `gain` on a hit and
/// by `gain * 0.1` on a miss. Empty experience is seeded at the floor of 1
/// information-unit before the first update. Magnitude never decreases.
inline Experience update_experience(const Experience& exp, const EventOutcome& outcome,
                                    double gain) {
    if (!(gain > 0.0)) throw DomainError("update_experience: gain must be > 0");
    Experience base = exp;
    if (base.magnitude() <= 0.0)
        base = Experience::from_ladder({kExperienceFloor}, exp.trials_completed());
    const double factor = outcome.precision_hit ? gain : gain * kMissFactor;
    return base.appended(base.magnitude() * (1.0 + factor));
}

}  // namespace mflow
