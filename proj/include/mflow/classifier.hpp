#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mflow/errors.hpp"
#include "mflow/model.hpp"
#include "mflow/rng.hpp"

namespace mflow {

/// Empirical observations of workflow behavior. `experience` entries mirror
/// `info`/`precision`/`time` row-for-row when present. Optional covariate
/// columns carry external-source measurements; without them regime G is never
/// considered.
struct ObservationSet {
    std::vector<double> info;
    std::vector<double> precision;
    std::vector<double> time;
    std::vector<double> experience;  // empty when the column is absent
    std::vector<std::string> covariate_names;
    std::vector<std::vector<double>> covariates;  // one column per name

    std::size_t size() const { return precision.size(); }
    bool has_experience() const { return !experience.empty(); }

    void validate() const {
        if (info.size() != precision.size() || time.size() != precision.size())
            throw DataError("ObservationSet columns must have equal length");
        if (has_experience() && experience.size() != precision.size())
            throw DataError("ObservationSet experience column length mismatch");
        for (const auto& c : covariates)
            if (c.size() != precision.size())
                throw DataError("ObservationSet covariate column length mismatch");
        for (double p : precision)
            if (!(p >= 0.0 && p <= 1.0))
                throw DataError("ObservationSet precision outside [0,1]");
    }
};

/// Right-continuous step CDF over a sample: F(x) = #(samples <= x) / n.
class EmpiricalCdf {
  public:
    explicit EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
        if (sorted_.empty()) throw DataError("empirical_cdf: empty sample");
        std::sort(sorted_.begin(), sorted_.end());
    }

    double operator()(double x) const {
        auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
    }

    const std::vector<double>& sorted() const { return sorted_; }
    double min() const { return sorted_.front(); }
    double max() const { return sorted_.back(); }
    std::size_t size() const { return sorted_.size(); }

  private:
    std::vector<double> sorted_;
};

inline EmpiricalCdf empirical_cdf(std::vector<double> samples) {
    return EmpiricalCdf(std::move(samples));
}

/// Distinguishes lattice-valued from continuous samples: Discrete when the
/// distinct-value fraction is at most 5% or all values sit on a common lattice.
inline Support detect_support(const std::vector<double>& samples) {
    if (samples.size() < 30)
        throw InsufficientDataError("detect_support: need >= 30 samples, got " +
                                    std::to_string(samples.size()));
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const double distinct_ratio =
        static_cast<double>(sorted.size()) / static_cast<double>(samples.size());
    if (distinct_ratio <= 0.05) return Support::Discrete;
    if (sorted.size() < 2) return Support::Discrete;
    // Approximate real gcd of consecutive differences.
    const double scale = sorted.back() - sorted.front();
    double g = 0.0;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        double a = g;
        double b = sorted[i] - sorted[i - 1];
        while (b > 1e-9 * scale) {
            const double r = std::fmod(a, b);
            a = b;
            b = r;
        }
        g = a;
        if (g > 0.0 && g <= 1e-9 * scale) return Support::Continuous;
    }
    if (g <= 1e-9 * scale) return Support::Continuous;
    for (double v : sorted) {
        const double k = (v - sorted.front()) / g;
        if (std::abs(k - std::round(k)) > 1e-6) return Support::Continuous;
    }
    return Support::Discrete;
}

enum class Dominance { PrecisionDominates, InfoDominates, Inconclusive };

inline const char* dominance_name(Dominance d) {
    switch (d) {
        case Dominance::PrecisionDominates: return "PrecisionDominates";
        case Dominance::InfoDominates: return "InfoDominates";
        case Dominance::Inconclusive: return "Inconclusive";
    }
    return "?";
}

struct DominanceResult {
    Dominance verdict = Dominance::Inconclusive;
    double d_plus = 0.0;   // sup(F_info - F_precision)
    double d_minus = 0.0;  // sup(F_precision - F_info)
    double critical = 0.0;
};

namespace detail {

inline double ks_critical(double alpha, std::size_t n, std::size_t m) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt(static_cast<double>(n + m) / static_cast<double>(n * m));
}

/// Signed KS sups between two min-max-normalized samples given as sorted
/// unique values with multiplicities.
struct SignedKs {
    double d_plus = 0.0;
    double d_minus = 0.0;
};

inline SignedKs signed_ks(const std::vector<double>& pu, const std::vector<std::size_t>& pc,
                          std::size_t pn, const std::vector<double>& iu,
                          const std::vector<std::size_t>& ic, std::size_t in) {
    // Locate sampled ranges for normalization.
    auto range_of = [](const std::vector<double>& u, const std::vector<std::size_t>& c)
        -> std::pair<double, double> {
        double lo = 0.0, hi = 0.0;
        bool found = false;
        for (std::size_t j = 0; j < u.size(); ++j) {
            if (c[j] == 0) continue;
            if (!found) lo = u[j], found = true;
            hi = u[j];
        }
        return {lo, hi};
    };
    const auto [plo, phi] = range_of(pu, pc);
    const auto [ilo, ihi] = range_of(iu, ic);
    if (!(phi > plo) || !(ihi > ilo))
        throw DataError("dominance_test: degenerate sample range, cannot normalize");
    const double pspan = phi - plo;
    const double ispan = ihi - ilo;

    double fp = 0.0, fi = 0.0;
    double d_plus = 0.0, d_minus = 0.0;
    std::size_t jp = 0, ji = 0;
    const double inf = std::numeric_limits<double>::infinity();
    while (jp < pu.size() || ji < iu.size()) {
        const double vp = jp < pu.size() ? (pu[jp] - plo) / pspan : inf;
        const double vi = ji < iu.size() ? (iu[ji] - ilo) / ispan : inf;
        const double v = std::min(vp, vi);
        while (jp < pu.size() && (pu[jp] - plo) / pspan <= v) {
            fp += static_cast<double>(pc[jp]) / static_cast<double>(pn);
            ++jp;
        }
        while (ji < iu.size() && (iu[ji] - ilo) / ispan <= v) {
            fi += static_cast<double>(ic[ji]) / static_cast<double>(in);
            ++ji;
        }
        const double d = fp - fi;
        d_minus = std::max(d_minus, d);
        d_plus = std::max(d_plus, -d);
    }
    return {d_plus, d_minus};
}

}  // namespace detail

/// Two-sample dominance test on min-max-normalized scales. PrecisionDominates
/// when the precision sample sits stochastically above the info sample
/// (F_info - F_precision exceeds the Kolmogorov critical value one-sidedly).
inline DominanceResult dominance_test(const EmpiricalCdf& precision_cdf,
                                      const EmpiricalCdf& info_cdf, double alpha = 0.05) {
    if (precision_cdf.size() < 30 || info_cdf.size() < 30)
        throw InsufficientDataError("dominance_test: both samples need >= 30 points");
    auto to_unique = [](const EmpiricalCdf& cdf, std::vector<double>& u,
                        std::vector<std::size_t>& c) {
        for (double v : cdf.sorted()) {
            if (u.empty() || v != u.back()) {
                u.push_back(v);
                c.push_back(1);
            } else {
                c.back() += 1;
            }
        }
    };
    std::vector<double> pu, iu;
    std::vector<std::size_t> pc, ic;
    to_unique(precision_cdf, pu, pc);
    to_unique(info_cdf, iu, ic);
    const auto ks = detail::signed_ks(pu, pc, precision_cdf.size(), iu, ic, info_cdf.size());
    DominanceResult r;
    r.d_plus = ks.d_plus;
    r.d_minus = ks.d_minus;
    r.critical = detail::ks_critical(alpha, precision_cdf.size(), info_cdf.size());
    const bool plus_sig = r.d_plus > r.critical;
    const bool minus_sig = r.d_minus > r.critical;
    if (plus_sig && !minus_sig)
        r.verdict = Dominance::PrecisionDominates;
    else if (minus_sig && !plus_sig)
        r.verdict = Dominance::InfoDominates;
    else
        r.verdict = Dominance::Inconclusive;
    return r;
}

struct ClassifierConfig {
    double alpha = 0.05;
    int bootstrap_resamples = 200;
    std::uint64_t seed = 0x5EEDC1A551F1ULL;
    double discrete_ratio = 0.05;
    double experience_fraction = 0.95;
    double covariate_correlation = 0.3;
};

struct ClassificationEvidence {
    Support support = Support::Discrete;
    double distinct_ratio = 0.0;
    std::size_t distinct_values = 0;
    bool experience_trend = false;
    double exp_gt_info_fraction = 0.0;
    DominanceResult dominance;
    bool dominance_computed = false;
    double max_covariate_correlation = 0.0;
    std::string note;
};

struct ClassificationResult {
    RegimeKind kind = RegimeKind::A_Bernoulli;
    double confidence = 0.0;
    ClassificationEvidence evidence;
};

namespace detail {

/// Shared machinery for the point classification and its bootstrap resamples.
/// Columns are pre-ranked so each resample costs O(n + distinct values).
class RegimeClassifier {
  public:
    RegimeClassifier(const ObservationSet& obs, const ClassifierConfig& cfg)
        : obs_(obs), cfg_(cfg), n_(obs.size()) {
        rank_column(obs.precision, p_unique_, p_rank_);
        rank_column(obs.info, i_unique_, i_rank_);
        if (obs.has_experience()) {
            exp_gt_.resize(n_);
            for (std::size_t r = 0; r < n_; ++r)
                exp_gt_[r] = obs.experience[r] > obs.info[r] ? 1 : 0;
            trend_ = experience_trend();
        }
        full_support_ = detect_support(obs.precision);
        pc_.resize(p_unique_.size());
        ic_.resize(i_unique_.size());
    }

    Support full_support() const { return full_support_; }
    bool trend() const { return trend_; }

    /// Classifies the rows selected by `idx` (with repetition allowed).
    /// `evidence` is only filled when non-null.
    RegimeKind classify(const std::vector<std::size_t>& idx, ClassificationEvidence* evidence) {
        std::fill(pc_.begin(), pc_.end(), 0);
        std::fill(ic_.begin(), ic_.end(), 0);
        std::size_t exp_gt_count = 0;
        for (std::size_t r : idx) {
            pc_[p_rank_[r]] += 1;
            ic_[i_rank_[r]] += 1;
            if (!exp_gt_.empty() && exp_gt_[r]) ++exp_gt_count;
        }
        std::size_t distinct = 0;
        for (std::size_t c : pc_)
            if (c > 0) ++distinct;
        const double dn = static_cast<double>(idx.size());
        const double distinct_ratio = static_cast<double>(distinct) / dn;
        const double exp_gt_frac =
            exp_gt_.empty() ? 0.0 : static_cast<double>(exp_gt_count) / dn;

        if (evidence) {
            evidence->distinct_values = distinct;
            evidence->distinct_ratio = distinct_ratio;
            evidence->experience_trend = trend_;
            evidence->exp_gt_info_fraction = exp_gt_frac;
        }

        // Rule 2: degenerate precision at a single value.
        if (distinct == 1) {
            if (evidence) evidence->support = Support::Discrete;
            return RegimeKind::B_Deterministic;
        }
        // Rule 1: two-valued precision with no experience trend.
        if (distinct == 2 && !trend_) {
            if (evidence) evidence->support = Support::Discrete;
            return RegimeKind::A_Bernoulli;
        }

        // The distinct-value criterion tracks the resample; the lattice rule
        // is a property of the full sample.
        const bool discrete =
            distinct_ratio <= cfg_.discrete_ratio || full_support_ == Support::Discrete;
        if (evidence) evidence->support = discrete ? Support::Discrete : Support::Continuous;

        DominanceResult dom;
        bool dom_ok = false;
        try {
            const auto ks = signed_ks(p_unique_, pc_, idx.size(), i_unique_, ic_, idx.size());
            dom.d_plus = ks.d_plus;
            dom.d_minus = ks.d_minus;
            dom.critical = ks_critical(cfg_.alpha, idx.size(), idx.size());
            const bool plus_sig = dom.d_plus > dom.critical;
            const bool minus_sig = dom.d_minus > dom.critical;
            dom.verdict = plus_sig && !minus_sig  ? Dominance::PrecisionDominates
                          : minus_sig && !plus_sig ? Dominance::InfoDominates
                                                   : Dominance::Inconclusive;
            dom_ok = true;
        } catch (const DataError&) {
            dom.verdict = Dominance::Inconclusive;
        }
        if (evidence) {
            evidence->dominance = dom;
            evidence->dominance_computed = dom_ok;
        }

        if (discrete) {
            if (exp_gt_.empty())
                throw DataError(
                    "classification requires the experience column for discrete tilted "
                    "regimes (missing field: experience)");
            // Rules 3 and 4: tilt direction keyed on the experience comparison.
            if (exp_gt_frac > cfg_.experience_fraction &&
                dom.verdict == Dominance::PrecisionDominates)
                return RegimeKind::C_DiscreteDecreasing;
            if (1.0 - exp_gt_frac > cfg_.experience_fraction &&
                dom.verdict == Dominance::InfoDominates)
                return RegimeKind::D_DiscreteIncreasing;
        } else {
            // Rule 5: continuous support split by dominance direction.
            if (dom.verdict == Dominance::PrecisionDominates)
                return RegimeKind::E_ContinuousDecreasing;
            if (dom.verdict == Dominance::InfoDominates)
                return RegimeKind::F_ContinuousIncreasing;
        }

        // Rule 6: residual dependence on external covariates, attempted only
        // when covariates are supplied.
        if (!obs_.covariates.empty()) {
            const double corr = max_covariate_correlation(idx);
            if (evidence) evidence->max_covariate_correlation = corr;
            if (corr > cfg_.covariate_correlation) return RegimeKind::G_JointExternal;
        }

        // Fallthrough: report the closest regime on the detected support.
        if (evidence) evidence->note = "no decision rule fired; nearest-regime fallback";
        if (discrete) return RegimeKind::A_Bernoulli;
        return dom.d_plus >= dom.d_minus ? RegimeKind::E_ContinuousDecreasing
                                         : RegimeKind::F_ContinuousIncreasing;
    }

  private:
    static void rank_column(const std::vector<double>& col, std::vector<double>& unique,
                            std::vector<std::size_t>& rank) {
        std::vector<std::size_t> order(col.size());
        for (std::size_t r = 0; r < col.size(); ++r) order[r] = r;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
        rank.resize(col.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            const double v = col[order[k]];
            if (unique.empty() || v != unique.back()) unique.push_back(v);
            rank[order[k]] = unique.size() - 1;
        }
    }

    bool experience_trend() const {
        const std::size_t third = n_ / 3;
        if (third == 0) return false;
        double head = 0.0, tail = 0.0, mean = 0.0;
        for (std::size_t r = 0; r < third; ++r) head += obs_.experience[r];
        for (std::size_t r = n_ - third; r < n_; ++r) tail += obs_.experience[r];
        for (double e : obs_.experience) mean += e;
        head /= static_cast<double>(third);
        tail /= static_cast<double>(third);
        mean /= static_cast<double>(n_);
        double var = 0.0;
        for (double e : obs_.experience) var += (e - mean) * (e - mean);
        const double sd = std::sqrt(var / static_cast<double>(n_));
        return tail - head > 0.5 * sd && sd > 1e-12 * std::max(1.0, std::abs(mean));
    }

    double max_covariate_correlation(const std::vector<std::size_t>& idx) const {
        double best = 0.0;
        for (const auto& col : obs_.covariates) {
            double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
            for (std::size_t r : idx) {
                const double x = col[r];
                const double y = obs_.precision[r];
                sx += x;
                sy += y;
                sxx += x * x;
                syy += y * y;
                sxy += x * y;
            }
            const double dn = static_cast<double>(idx.size());
            const double cov = sxy - sx * sy / dn;
            const double vx = sxx - sx * sx / dn;
            const double vy = syy - sy * sy / dn;
            if (vx > 0.0 && vy > 0.0) best = std::max(best, std::abs(cov / std::sqrt(vx * vy)));
        }
        return best;
    }

    const ObservationSet& obs_;
    ClassifierConfig cfg_;
    std::size_t n_;
    std::vector<double> p_unique_, i_unique_;
    std::vector<std::size_t> p_rank_, i_rank_;
    std::vector<std::size_t> pc_, ic_;  // reusable count buffers
    std::vector<char> exp_gt_;
    bool trend_ = false;
    Support full_support_ = Support::Discrete;
};

}  // namespace detail

/// Identifies which regime best explains an observation set. Confidence is the
/// agreement fraction of seeded bootstrap resamples with the point decision.
inline ClassificationResult classify_regime(const ObservationSet& obs,
                                            const ClassifierConfig& cfg = {}) {
    obs.validate();
    const std::size_t n = obs.size();
    if (n < 30)
        throw InsufficientDataError("classify_regime: need >= 30 rows, got " +
                                    std::to_string(n));
    detail::RegimeClassifier machine(obs, cfg);

    std::vector<std::size_t> idx(n);
    for (std::size_t r = 0; r < n; ++r) idx[r] = r;
    ClassificationResult result;
    result.kind = machine.classify(idx, &result.evidence);

    SplitMix64 rng(cfg.seed);
    int agree = 0;
    for (int b = 0; b < cfg.bootstrap_resamples; ++b) {
        for (std::size_t r = 0; r < n; ++r)
            idx[r] = static_cast<std::size_t>(rng.next() % n);
        try {
            if (machine.classify(idx, nullptr) == result.kind) ++agree;
        } catch (const DataError&) {
            // resample lost the structure needed for a decision: disagreement
        }
    }
    result.confidence = cfg.bootstrap_resamples > 0
                            ? static_cast<double>(agree) / cfg.bootstrap_resamples
                            : 1.0;
    return result;
}

}  // namespace mflow
