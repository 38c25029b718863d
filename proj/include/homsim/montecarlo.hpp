#pragma once

// Seeded simulation of repeated HOM experiments and estimator precision
// studies. All sampling is bit-reproducible across platforms: mt19937_64
// drives per-event Bernoulli draws, so results depend only on (inputs, seed).

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "homsim/estimation.hpp"
#include "homsim/information.hpp"
#include "homsim/physics.hpp"

namespace homsim {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits of the generator output.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Binomial draw as a sum of n Bernoulli trials. O(n), but exactly
/// reproducible everywhere, unlike std::binomial_distribution.
inline std::uint64_t sample_binomial(std::uint64_t n, double p, std::mt19937_64& rng) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i)
        if (uniform01(rng) < p) ++k;
    return k;
}

}  // namespace detail

/// Seed for an independent repetition, derived from the master seed and the
/// repetition index.
inline std::uint64_t repetition_seed(std::uint64_t master_seed, std::uint64_t index) {
    return detail::splitmix64(detail::splitmix64(master_seed) ^
                              (0x9E3779B97F4A7C15ULL * (index + 1)));
}

/// Multinomial draw of (N0, N1, N2) by sequential conditional binomials:
/// N0 ~ B(n, p0), N1 ~ B(n - N0, p1 / (p1 + p2)), N2 the remainder.
inline CountRecord sample_counts(const OutcomeProbs& probs, std::uint64_t n_events, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    CountRecord c;
    c.n0 = detail::sample_binomial(n_events, probs.p0, rng);
    const std::uint64_t rest = n_events - c.n0;
    const double p12 = probs.p1 + probs.p2;
    c.n1 = p12 > 0.0 ? detail::sample_binomial(rest, probs.p1 / p12, rng) : 0;
    c.n2 = rest - c.n1;
    return c;
}

struct TrialConfig {
    std::uint64_t n_events = 10000;     // photon pairs per experiment
    std::uint64_t n_repetitions = 500;  // independent experiments
    std::uint64_t seed = 0;
    double tau_true = 0.0;  // ps

    void validate() const {
        if (n_events < 1) throw std::invalid_argument("TrialConfig: n_events must be >= 1");
        if (n_repetitions < 1) throw std::invalid_argument("TrialConfig: n_repetitions must be >= 1");
        if (!std::isfinite(tau_true)) throw std::invalid_argument("TrialConfig: non-finite tau_true");
    }
};

/// Aggregate precision of an estimator against the Cramer-Rao bounds.
/// Failed estimations are counted and excluded from the moments. With a
/// single repetition the spread fields are NaN.
struct PrecisionReport {
    double mean_estimate;     // ps
    double empirical_std;     // ps, NaN when fewer than 2 successes
    double bias;              // ps, mean - tau_true
    double cr_bound;          // ps, at tau_true
    double qcr_bound;         // ps
    double efficiency_ratio;  // empirical_std / cr_bound
    std::uint64_t failure_count;
    std::uint64_t n_used;
};

/// Repeats the experiment cfg.n_repetitions times: samples counts at
/// cfg.tau_true, estimates the delay with the chosen method, aggregates.
/// The coarse position (closed form) and the bracket (numeric, +-0.45 half
/// beat periods) are taken from tau_true.
inline PrecisionReport run_precision_study(const BiphotonState& s, const ChannelParams& ch,
                                           const TrialConfig& cfg, EstimateMethod method) {
    cfg.validate();
    const auto fisher = fisher_information(s, ch, cfg.tau_true);
    if (!fisher || !(*fisher > 0.0))
        throw std::invalid_argument("run_precision_study: tau_true is a degenerate working point");

    const OutcomeProbs probs = outcome_probabilities(s, ch, cfg.tau_true);
    double bracket_lo = 0.0, bracket_hi = 0.0;
    if (method == EstimateMethod::numeric) {
        // stay inside the half-period around the working point where the
        // fringe is monotone; a wider bracket admits the mirror solution of
        // the cosine and the likelihood grows a second peak
        const double half = s.delta > 0.0 ? 0.45 * std::numbers::pi / s.delta : 10.0 / s.sigma;
        bracket_lo = cfg.tau_true - half;
        bracket_hi = cfg.tau_true + half;
    }

    std::vector<double> estimates;
    estimates.reserve(cfg.n_repetitions);
    std::uint64_t failures = 0;
    for (std::uint64_t rep = 0; rep < cfg.n_repetitions; ++rep) {
        const CountRecord counts = sample_counts(probs, cfg.n_events, repetition_seed(cfg.seed, rep));
        EstimateResult est;
        if (method == EstimateMethod::closed_form)
            est = mle_closed_form(counts, s, ch, cfg.tau_true);
        else
            est = mle_numeric(counts, s, ch, bracket_lo, bracket_hi);
        if (est.ok())
            estimates.push_back(est.tau_hat);
        else
            ++failures;
    }
    if (estimates.empty()) throw std::runtime_error("run_precision_study: every repetition failed");

    double mean = 0.0;
    for (double e : estimates) mean += e;
    mean /= static_cast<double>(estimates.size());
    double stdev = std::numeric_limits<double>::quiet_NaN();
    if (estimates.size() > 1) {
        double ss = 0.0;
        for (double e : estimates) ss += (e - mean) * (e - mean);
        stdev = std::sqrt(ss / static_cast<double>(estimates.size() - 1));
    }

    const double cr = cr_bound(*fisher, cfg.n_events);
    const double qcr = qcr_bound(s, cfg.n_events);
    return PrecisionReport{mean,
                           stdev,
                           mean - cfg.tau_true,
                           cr,
                           qcr,
                           stdev / cr,
                           failures,
                           static_cast<std::uint64_t>(estimates.size())};
}

/// Synthetic fringe scan: at each grid point, coincidences are drawn
/// binomially among `trials_per_point` post-selected pair events with
/// probability (1/2)(1 + alpha * fringe). Points are sampled in grid order
/// from a single generator, so the scan is a pure function of (inputs, seed).
inline FringeScan simulate_fringe(const BiphotonState& s, const ChannelParams& ch,
                                  const std::vector<double>& tau_grid, std::uint64_t trials_per_point,
                                  std::uint64_t seed) {
    if (tau_grid.empty()) throw std::invalid_argument("simulate_fringe: empty grid");
    for (std::size_t i = 1; i < tau_grid.size(); ++i)
        if (!(tau_grid[i] > tau_grid[i - 1]))
            throw std::invalid_argument("simulate_fringe: grid must be strictly increasing");
    if (trials_per_point < 1) throw std::invalid_argument("simulate_fringe: trials_per_point must be >= 1");

    std::mt19937_64 rng(seed);
    FringeScan scan;
    scan.samples.reserve(tau_grid.size());
    for (double tau : tau_grid) {
        const double p = post_selected_coincidence_probability(s, ch, tau);
        FringeSample smp;
        smp.tau = tau;
        smp.trials = trials_per_point;
        smp.coincidences = detail::sample_binomial(trials_per_point, p, rng);
        scan.samples.push_back(smp);
    }
    return scan;
}

}  // namespace homsim
