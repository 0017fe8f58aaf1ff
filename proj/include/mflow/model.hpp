#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mflow/errors.hpp"

namespace mflow {

enum class Support { Discrete, Continuous };

/// The information content of a task: an abstract complexity magnitude on a
/// single shared scale, with discrete or continuous support.
struct InfoSource {
    double magnitude = 1.0;
    Support support = Support::Discrete;
    int dimension = 1;

    void validate() const {
        if (magnitude < 0.0) throw DomainError("InfoSource.magnitude must be >= 0");
        if (dimension < 1) throw DomainError("InfoSource.dimension must be >= 1");
    }
};

/// An agent's accumulated processing history. `weights` is the cumulative
/// weight ladder; `magnitude` always equals its last entry when nonempty.
class Experience {
  public:
    Experience() = default;

    explicit Experience(double magnitude, int trials_completed = 0)
        : magnitude_(magnitude), trials_completed_(trials_completed) {
        if (magnitude < 0.0) throw DomainError("Experience magnitude must be >= 0");
        if (magnitude > 0.0) weights_.push_back(magnitude);
    }

    static Experience from_ladder(std::vector<double> weights, int trials_completed) {
        Experience e;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] < 0.0) throw DomainError("Experience weights must be >= 0");
            if (i > 0 && weights[i] < weights[i - 1])
                throw DomainError("Experience weights must be nondecreasing");
        }
        e.weights_ = std::move(weights);
        e.magnitude_ = e.weights_.empty() ? 0.0 : e.weights_.back();
        e.trials_completed_ = trials_completed;
        return e;
    }

    double magnitude() const { return magnitude_; }
    const std::vector<double>& weights() const { return weights_; }
    int trials_completed() const { return trials_completed_; }

    /// Returns a copy extended by one cumulative weight entry.
    Experience appended(double new_total) const {
        if (new_total < magnitude_)
            throw DomainError("Experience magnitude never decreases");
        Experience e = *this;
        e.weights_.push_back(new_total);
        e.magnitude_ = new_total;
        e.trials_completed_ += 1;
        return e;
    }

  private:
    double magnitude_ = 0.0;
    std::vector<double> weights_;
    int trials_completed_ = 0;
};

enum class DensityKind { Uniform, TriangularDecreasing, TriangularIncreasing, TabulatedPdf };

/// Concrete carrier for one-dimensional probability densities on a closed
/// interval. Parametric kinds are normalized by construction; tabulated
/// densities are checked to integrate to 1 within 1e-6 at load.
class DensitySpec {
  public:
    static DensitySpec uniform(double lo, double hi) {
        check_interval(lo, hi);
        return DensitySpec(DensityKind::Uniform, lo, hi, {});
    }

    /// f(x) = 2(hi - x) / (hi - lo)^2, mass concentrated near lo.
    static DensitySpec triangular_decreasing(double lo, double hi) {
        check_interval(lo, hi);
        return DensitySpec(DensityKind::TriangularDecreasing, lo, hi, {});
    }

    /// f(x) = 2(x - lo) / (hi - lo)^2, mass concentrated near hi.
    static DensitySpec triangular_increasing(double lo, double hi) {
        check_interval(lo, hi);
        return DensitySpec(DensityKind::TriangularIncreasing, lo, hi, {});
    }

    static DensitySpec tabulated(std::vector<std::pair<double, double>> table) {
        if (table.size() < 2) throw DataError("tabulated density needs >= 2 points");
        double mass = 0.0;
        for (std::size_t i = 0; i < table.size(); ++i) {
            if (table[i].second < 0.0)
                throw DataError("tabulated density ordinates must be >= 0");
            if (i > 0) {
                if (table[i].first <= table[i - 1].first)
                    throw DataError("tabulated density abscissae must be strictly increasing");
                mass += 0.5 * (table[i].second + table[i - 1].second) *
                        (table[i].first - table[i - 1].first);
            }
        }
        if (std::abs(mass - 1.0) > 1e-6)
            throw NormalizationError("tabulated density mass " + std::to_string(mass) +
                                         " deviates from 1",
                                     mass - 1.0);
        DensitySpec d(DensityKind::TabulatedPdf, table.front().first, table.back().first, {});
        d.table_ = std::move(table);
        return d;
    }

    DensityKind kind() const { return kind_; }
    double lower() const { return lo_; }
    double upper() const { return hi_; }
    const std::vector<std::pair<double, double>>& table() const { return table_; }

    double pdf(double x) const {
        if (x < lo_ || x > hi_) return 0.0;
        const double w = hi_ - lo_;
        switch (kind_) {
            case DensityKind::Uniform:
                return 1.0 / w;
            case DensityKind::TriangularDecreasing:
                return 2.0 * (hi_ - x) / (w * w);
            case DensityKind::TriangularIncreasing:
                return 2.0 * (x - lo_) / (w * w);
            case DensityKind::TabulatedPdf: {
                auto it = std::lower_bound(
                    table_.begin(), table_.end(), x,
                    [](const std::pair<double, double>& p, double v) { return p.first < v; });
                if (it == table_.begin()) return it->second;
                if (it == table_.end()) return table_.back().second;
                const auto& [x1, y1] = *it;
                const auto& [x0, y0] = *(it - 1);
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        return 0.0;
    }

  private:
    DensitySpec(DensityKind k, double lo, double hi, std::vector<std::pair<double, double>> t)
        : kind_(k), lo_(lo), hi_(hi), table_(std::move(t)) {}

    static void check_interval(double lo, double hi) {
        if (!(lo < hi)) throw DomainError("density interval requires lower < upper");
    }

    DensityKind kind_;
    double lo_;
    double hi_;
    std::vector<std::pair<double, double>> table_;
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Multi-dimensional environmental density box: one density and one closed
/// integration interval per dimension.
struct ExternalSource {
    std::vector<DensitySpec> densities;
    std::vector<Interval> bounds;

    void validate() const {
        if (densities.empty() || densities.size() != bounds.size())
            throw DataError("ExternalSource requires equal-length densities and bounds (>= 1)");
        for (std::size_t d = 0; d < bounds.size(); ++d)
            if (!(bounds[d].lo < bounds[d].hi))
                throw DomainError("ExternalSource bounds require lo < hi");
    }
};

enum class TimeKind { FixedTime, GeometricRetries, ExponentialService };

/// Selectable concrete model for the per-event processing time T.
struct TimeModel {
    TimeKind kind = TimeKind::FixedTime;
    double base_time = 1.0;
    double rate_or_retry_param = 1.0;

    void validate() const {
        if (!(base_time > 0.0)) throw DomainError("TimeModel.base_time must be > 0");
        if (kind == TimeKind::GeometricRetries &&
            !(rate_or_retry_param > 0.0 && rate_or_retry_param <= 1.0))
            throw DomainError("GeometricRetries retry probability must be in (0,1]");
        if (kind == TimeKind::ExponentialService && !(rate_or_retry_param > 0.0))
            throw DomainError("ExponentialService rate must be > 0");
    }
};

enum class RegimeKind {
    A_Bernoulli,
    B_Deterministic,
    C_DiscreteDecreasing,
    D_DiscreteIncreasing,
    E_ContinuousDecreasing,
    F_ContinuousIncreasing,
    G_JointExternal,
};

inline const char* regime_name(RegimeKind k) {
    switch (k) {
        case RegimeKind::A_Bernoulli: return "A_Bernoulli";
        case RegimeKind::B_Deterministic: return "B_Deterministic";
        case RegimeKind::C_DiscreteDecreasing: return "C_DiscreteDecreasing";
        case RegimeKind::D_DiscreteIncreasing: return "D_DiscreteIncreasing";
        case RegimeKind::E_ContinuousDecreasing: return "E_ContinuousDecreasing";
        case RegimeKind::F_ContinuousIncreasing: return "F_ContinuousIncreasing";
        case RegimeKind::G_JointExternal: return "G_JointExternal";
    }
    return "?";
}

/// The realized outcome of one processed event.
struct EventOutcome {
    bool precision_hit = false;
    double precision_value = 0.0;
    double time_spent = 0.0;
    RegimeKind regime = RegimeKind::A_Bernoulli;
};

/// Eq-style product of the experience term and the information-conditioned
/// processing term. Commutative, bounded in [0,1], monotone in each argument.
inline double event_probability(double prob_experience, double prob_conditional) {
    if (!(prob_experience >= 0.0 && prob_experience <= 1.0))
        throw DomainError("event_probability: prob_experience outside [0,1]");
    if (!(prob_conditional >= 0.0 && prob_conditional <= 1.0))
        throw DomainError("event_probability: prob_conditional outside [0,1]");
    return prob_experience * prob_conditional;
}

/// Ratio of accumulated experience to task information; > 1 means the agent's
/// experience exceeds the task's information content.
inline double experience_ratio(const Experience& exp, const InfoSource& info) {
    if (!(info.magnitude > 0.0))
        throw DomainError(
            "experience_ratio: degenerate information (magnitude 0); "
            "handle via regime A with i = 0");
    return exp.magnitude() / info.magnitude;
}

}  // namespace mflow
