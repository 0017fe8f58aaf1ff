#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mflow/errors.hpp"
#include "mflow/model.hpp"
#include "mflow/quadrature.hpp"
#include "mflow/rng.hpp"

namespace mflow {

/// Joint outcome table for the deterministic regime: (index-vector, probability)
/// rows whose masses must total 1.
struct JointTable {
    std::vector<std::pair<std::vector<int>, double>> outcomes;

    /// Throws NormalizationError if any mass is negative or the total deviates
    /// from 1 by more than `tol`.
    void validate(double tol) const {
        double sum = 0.0;
        for (const auto& [idx, p] : outcomes) {
            if (p < 0.0) throw NormalizationError("JointTable probability < 0", p);
            sum += p;
        }
        if (std::abs(sum - 1.0) > tol)
            throw NormalizationError(
                "JointTable mass " + std::to_string(sum) + " deviates from 1 by " +
                    std::to_string(sum - 1.0),
                sum - 1.0);
    }

    static JointTable checked(std::vector<std::pair<std::vector<int>, double>> outcomes) {
        JointTable t{std::move(outcomes)};
        t.validate(1e-12);
        return t;
    }
};

enum class SupportDescription { PointMass, TwoPoint, Tabulated, ContinuousTail };

/// A regime's distribution object m: the effective precision probability plus
/// a description of the support it lives on.
class MDistribution {
  public:
    static MDistribution point_mass(RegimeKind kind, double value) {
        return MDistribution(kind, 1.0, SupportDescription::PointMass, {{value, 1.0}});
    }

    static MDistribution two_point(RegimeKind kind, double success_prob) {
        check_prob(success_prob);
        return MDistribution(kind, success_prob, SupportDescription::TwoPoint,
                             {{1.0, success_prob}, {0.0, 1.0 - success_prob}});
    }

    static MDistribution tabulated(RegimeKind kind, double precision_prob,
                                   std::vector<std::pair<double, double>> entries) {
        check_prob(precision_prob);
        double sum = 0.0;
        for (const auto& [v, p] : entries) sum += p;
        if (std::abs(sum - 1.0) > 1e-12)
            throw NormalizationError("tabulated distribution mass deviates from 1", sum - 1.0);
        return MDistribution(kind, precision_prob, SupportDescription::Tabulated,
                             std::move(entries));
    }

    static MDistribution continuous_tail(RegimeKind kind, double precision_prob) {
        check_prob(precision_prob);
        return MDistribution(kind, precision_prob, SupportDescription::ContinuousTail, {});
    }

    RegimeKind kind() const { return kind_; }
    double precision_prob() const { return precision_prob_; }
    SupportDescription support() const { return support_; }
    const std::vector<std::pair<double, double>>& table() const { return tabulated_; }

  private:
    MDistribution(RegimeKind k, double pp, SupportDescription s,
                  std::vector<std::pair<double, double>> t)
        : kind_(k), precision_prob_(pp), support_(s), tabulated_(std::move(t)) {}

    static void check_prob(double p) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("precision probability outside [0,1]");
    }

    RegimeKind kind_;
    double precision_prob_;
    SupportDescription support_;
    std::vector<std::pair<double, double>> tabulated_;
};

/// Which regime governs an event, the untilted conditional precision, the time
/// model, and the regime-specific parameters needed by its evaluator.
struct RegimeSpec {
    RegimeKind kind = RegimeKind::A_Bernoulli;
    double base_precision = 0.5;
    TimeModel time_model;

    // B: joint table and the position of the designated success outcome.
    std::optional<JointTable> table;
    std::size_t success_index = 0;

    // E: density plus the [precision threshold, experience ceiling] interval.
    std::optional<DensitySpec> density;
    double lower = 0.0;
    double upper = 1.0;

    // F: sampled CDF, read-out point, and caller-supplied rate dI^i/dI.
    std::vector<std::pair<double, double>> cdf_samples;
    double eval_at = 0.0;
    double rate = 1.0;

    // G: Monte Carlo sample count for the joint integral.
    int mc_samples = 10000;

    void validate() const {
        if (!(base_precision >= 0.0 && base_precision <= 1.0))
            throw DomainError("RegimeSpec.base_precision outside [0,1]");
        time_model.validate();
    }
};

/// Regime A: two-point success/failure distribution with success mass p.
inline MDistribution eval_bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("eval_bernoulli: p outside [0,1]");
    return MDistribution::two_point(RegimeKind::A_Bernoulli, p);
}

/// Regime B: constant processing without oscillation. A point-mass table means
/// precision is always reached; otherwise the designated success outcome's
/// mass is the precision probability.
inline MDistribution eval_deterministic(const JointTable& table, std::size_t success_index = 0) {
    table.validate(1e-9);
    if (table.outcomes.empty()) throw DataError("eval_deterministic: empty table");
    if (success_index >= table.outcomes.size())
        throw LookupError("eval_deterministic: success index out of range");
    if (table.outcomes.size() == 1 && std::abs(table.outcomes[0].second - 1.0) <= 1e-9)
        return MDistribution::point_mass(RegimeKind::B_Deterministic, 1.0);
    std::vector<std::pair<double, double>> entries;
    entries.reserve(table.outcomes.size());
    for (std::size_t i = 0; i < table.outcomes.size(); ++i)
        entries.emplace_back(static_cast<double>(i), table.outcomes[i].second);
    return MDistribution::tabulated(RegimeKind::B_Deterministic,
                                    table.outcomes[success_index].second, std::move(entries));
}

/// Experience tilt of the conditional precision: base^(1/ratio). Ratio > 1
/// raises the result toward 1, ratio < 1 lowers it toward 0, ratio = 1 is the
/// fixed point. 0 and 1 are absorbing.
inline double tilt_precision(double base, double ratio) {
    if (!(ratio > 0.0)) throw DomainError("tilt_precision: ratio must be > 0");
    if (!(base >= 0.0 && base <= 1.0)) throw DomainError("tilt_precision: base outside [0,1]");
    if (base == 0.0 || base == 1.0) return base;
    if (ratio == 1.0) return base;
    return std::pow(base, 1.0 / ratio);
}

/// Regimes C and D: monotone tilt keyed on the order of I^i and I.
inline MDistribution eval_monotone(const RegimeSpec& spec, const Experience& exp,
                                   const InfoSource& info) {
    if (spec.kind != RegimeKind::C_DiscreteDecreasing &&
        spec.kind != RegimeKind::D_DiscreteIncreasing)
        throw DomainError("eval_monotone: regime must be C or D");
    const double ratio = experience_ratio(exp, info);
    if (spec.kind == RegimeKind::C_DiscreteDecreasing && !(ratio > 1.0))
        throw RegimeMismatchError("regime C requires I^i > I (got ratio " +
                                  std::to_string(ratio) + ")");
    if (spec.kind == RegimeKind::D_DiscreteIncreasing && !(ratio < 1.0))
        throw RegimeMismatchError("regime D requires I^i < I (got ratio " +
                                  std::to_string(ratio) + ")");
    return MDistribution::two_point(spec.kind, tilt_precision(spec.base_precision, ratio));
}

/// Regime E: probability mass of the density over [lower, upper], by adaptive
/// quadrature to 1e-9 absolute tolerance.
inline double eval_continuous_decreasing(const DensitySpec& density, double lower, double upper) {
    if (!(lower < upper)) throw DomainError("eval_continuous_decreasing: lower must be < upper");
    if (lower < density.lower() - 1e-12 || upper > density.upper() + 1e-12)
        throw DomainError("eval_continuous_decreasing: interval outside density support");
    const double mass =
        integrate([&](double x) { return density.pdf(x); }, lower, upper, 1e-9, 40);
    return std::clamp(mass, 0.0, 1.0);
}

/// Regime F: rate-scaled read-out of a sampled CDF, rate = dI^i/dI.
inline double eval_continuous_increasing(const std::vector<std::pair<double, double>>& cdf_samples,
                                         double at, double rate) {
    if (cdf_samples.empty()) throw DataError("eval_continuous_increasing: empty CDF sample");
    for (std::size_t i = 1; i < cdf_samples.size(); ++i)
        if (cdf_samples[i].first < cdf_samples[i - 1].first ||
            cdf_samples[i].second < cdf_samples[i - 1].second)
            throw DataError("eval_continuous_increasing: CDF samples must be nondecreasing");
    if (at < cdf_samples.front().first || at > cdf_samples.back().first)
        throw DomainError("eval_continuous_increasing: point outside sampled range");
    auto it = std::lower_bound(
        cdf_samples.begin(), cdf_samples.end(), at,
        [](const std::pair<double, double>& p, double v) { return p.first < v; });
    double f;
    if (it == cdf_samples.begin()) {
        f = it->second;
    } else {
        const auto& [x1, y1] = *it;
        const auto& [x0, y0] = *(it - 1);
        f = (x1 == x0) ? y1 : y0 + (y1 - y0) * (at - x0) / (x1 - x0);
    }
    return rate * f;
}

struct MonteCarloEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};

/// Regime G: Monte Carlo estimate of the joint-density mass over the bounds
/// box. Deterministic for a fixed seed.
inline MonteCarloEstimate eval_joint_external(const ExternalSource& src, int samples,
                                              std::uint64_t seed) {
    src.validate();
    if (samples < 100) throw DomainError("eval_joint_external: samples must be >= 100");
    double volume = 1.0;
    for (const auto& b : src.bounds) volume *= (b.hi - b.lo);
    SplitMix64 rng(seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    std::vector<double> x(src.bounds.size());
    for (int s = 0; s < samples; ++s) {
        double g = 1.0;
        for (std::size_t d = 0; d < src.bounds.size(); ++d) {
            x[d] = rng.uniform(src.bounds[d].lo, src.bounds[d].hi);
            g *= src.densities[d].pdf(x[d]);
        }
        sum += g;
        sum_sq += g * g;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return {volume * mean, volume * std::sqrt(var / n)};
}

/// Single dispatch over the seven regimes. `seed` feeds the Monte Carlo
/// integration of regime G only.
inline MDistribution build_distribution(const RegimeSpec& spec, const Experience& exp,
                                        const InfoSource& info,
                                        const std::optional<ExternalSource>& src = std::nullopt,
                                        std::uint64_t seed = 0) {
    switch (spec.kind) {
        case RegimeKind::A_Bernoulli:
            return eval_bernoulli(spec.base_precision);
        case RegimeKind::B_Deterministic:
            if (!spec.table) throw DataError("regime B requires a joint table");
            return eval_deterministic(*spec.table, spec.success_index);
        case RegimeKind::C_DiscreteDecreasing:
        case RegimeKind::D_DiscreteIncreasing:
            return eval_monotone(spec, exp, info);
        case RegimeKind::E_ContinuousDecreasing: {
            if (!spec.density) throw DataError("regime E requires a density");
            const double p = eval_continuous_decreasing(*spec.density, spec.lower, spec.upper);
            return MDistribution::continuous_tail(spec.kind, p);
        }
        case RegimeKind::F_ContinuousIncreasing: {
            const double p = eval_continuous_increasing(spec.cdf_samples, spec.eval_at, spec.rate);
            return MDistribution::continuous_tail(spec.kind, std::clamp(p, 0.0, 1.0));
        }
        case RegimeKind::G_JointExternal: {
            if (!src) throw DataError("regime G requires an external source");
            const auto est = eval_joint_external(*src, spec.mc_samples, seed);
            return MDistribution::continuous_tail(spec.kind, std::clamp(est.value, 0.0, 1.0));
        }
    }
    throw DomainError("unknown regime kind");
}

}  // namespace mflow
