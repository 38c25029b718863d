#pragma once

// Multinomial likelihood, maximum-likelihood delay estimators and
// fringe-scan fitting.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "homsim/information.hpp"
#include "homsim/physics.hpp"

namespace homsim {

/// Observed event counts for the three outcomes.
struct CountRecord {
    std::uint64_t n0 = 0;
    std::uint64_t n1 = 0;
    std::uint64_t n2 = 0;

    std::uint64_t total() const { return n0 + n1 + n2; }
    void validate() const {
        if (total() < 1) throw std::invalid_argument("CountRecord: needs at least one event");
    }
};

/// Multinomial log-likelihood N0 ln P0 + N1 ln P1 + N2 ln P2 at delay tau,
/// up to the count-dependent multinomial coefficient (a constant in tau,
/// omitted). A zero probability paired with a nonzero count gives -infinity.
inline double log_likelihood(const CountRecord& counts, const BiphotonState& s, const ChannelParams& ch,
                             double tau) {
    counts.validate();
    const OutcomeProbs p = outcome_probabilities(s, ch, tau);
    const double probs[3] = {p.p0, p.p1, p.p2};
    const std::uint64_t ns[3] = {counts.n0, counts.n1, counts.n2};
    double ll = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (ns[i] == 0) continue;
        if (!(probs[i] > 0.0)) return -std::numeric_limits<double>::infinity();
        ll += static_cast<double>(ns[i]) * std::log(probs[i]);
    }
    return ll;
}

enum class EstimateMethod { closed_form, numeric };

enum class EstimateStatus {
    ok,
    clamped,           // arccos argument clipped to [-1, 1] within the slack
    failed_overflow,   // arccos argument out of range beyond the slack
    failed_flat,       // likelihood carries no tau dependence
    failed_no_data,    // no usable counts
};

struct EstimateResult {
    double tau_hat = std::numeric_limits<double>::quiet_NaN();  // ps
    double std_err = std::numeric_limits<double>::quiet_NaN();  // ps, 1/sqrt(N F(tau_hat))
    EstimateMethod method = EstimateMethod::closed_form;
    EstimateStatus status = EstimateStatus::ok;

    bool ok() const { return status == EstimateStatus::ok || status == EstimateStatus::clamped; }
};

namespace detail {

inline double plugin_std_err(const BiphotonState& s, const ChannelParams& ch, double tau_hat,
                             std::uint64_t n_total) {
    const auto f = fisher_information(s, ch, tau_hat);
    if (f && *f > 0.0) return 1.0 / std::sqrt(static_cast<double>(n_total) * *f);
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// Closed-form maximum-likelihood estimate. With the envelope frozen at the
/// coarse position tau_s,
///
///   cos(delta tau + phi) = [((1+3g)/(1-g)) N2 - N1] / [alpha (N1+N2) e^{-2 sigma^2 tau_s^2}]
///
/// and the arccos branch (sign and beat-period multiple) is the one closest
/// to tau_s. Statistical fluctuations can push the argument slightly past
/// +-1; it is clamped when within `slack`, and the estimate fails beyond it.
inline EstimateResult mle_closed_form(const CountRecord& counts, const BiphotonState& s,
                                      const ChannelParams& ch, double tau_s, double slack = 0.05) {
    if (!(s.delta > 0.0)) throw std::invalid_argument("mle_closed_form: requires delta > 0");
    if (!std::isfinite(tau_s)) throw std::invalid_argument("mle_closed_form: non-finite tau_s");
    counts.validate();

    EstimateResult r;
    r.method = EstimateMethod::closed_form;
    const double n1 = static_cast<double>(counts.n1);
    const double n2 = static_cast<double>(counts.n2);
    if (counts.n1 + counts.n2 == 0) {
        r.status = EstimateStatus::failed_no_data;
        return r;
    }
    if (!(ch.alpha > 0.0)) {
        r.status = EstimateStatus::failed_flat;
        return r;
    }

    const double b = (1.0 + 3.0 * ch.gamma) / (1.0 - ch.gamma);
    const double env = std::exp(-2.0 * s.sigma * s.sigma * tau_s * tau_s);
    double x = (b * n2 - n1) / (ch.alpha * (n1 + n2) * env);
    if (std::abs(x) > 1.0 + slack) {
        r.status = EstimateStatus::failed_overflow;
        return r;
    }
    if (std::abs(x) > 1.0) {
        x = std::clamp(x, -1.0, 1.0);
        r.status = EstimateStatus::clamped;
    }

    // unwrap: delta*tau + phi = +-acos(x) + 2 pi k, branch nearest tau_s
    const double a = std::acos(x);
    const double k0 = std::round((s.delta * tau_s + s.phi) / two_pi);
    double best = std::numeric_limits<double>::quiet_NaN();
    for (int dk = -1; dk <= 1; ++dk) {
        for (double sign : {1.0, -1.0}) {
            const double tau = (sign * a - s.phi + two_pi * (k0 + dk)) / s.delta;
            if (std::isnan(best) || std::abs(tau - tau_s) < std::abs(best - tau_s) ||
                (std::abs(tau - tau_s) == std::abs(best - tau_s) && tau < best))
                best = tau;
        }
    }
    r.tau_hat = best;
    r.std_err = detail::plugin_std_err(s, ch, best, counts.total());
    return r;
}

/// Direct maximization of the multinomial log-likelihood on a bracket by
/// dense grid scan (pitch <= pi / (100 delta)) plus golden-section
/// refinement. The bracket should span less than one beat period unless the
/// global maximum over the bracket is wanted.
inline EstimateResult mle_numeric(const CountRecord& counts, const BiphotonState& s, const ChannelParams& ch,
                                  double lo, double hi) {
    if (!(hi > lo)) throw std::invalid_argument("mle_numeric: degenerate bracket");
    counts.validate();

    EstimateResult r;
    r.method = EstimateMethod::numeric;

    const double width = hi - lo;
    std::size_t n = 2001;
    if (s.delta > 0.0) {
        const double needed = std::ceil(width * 100.0 * s.delta / std::numbers::pi) + 1.0;
        if (needed > static_cast<double>(n)) n = static_cast<std::size_t>(needed);
    }

    auto ll = [&](double tau) { return log_likelihood(counts, s, ch, tau); };

    double best_tau = lo;
    double best = -std::numeric_limits<double>::infinity();
    double lo_seen = std::numeric_limits<double>::infinity();
    double hi_seen = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const double tau = lo + width * static_cast<double>(k) / static_cast<double>(n - 1);
        const double v = ll(tau);
        if (std::isfinite(v)) {
            lo_seen = std::min(lo_seen, v);
            hi_seen = std::max(hi_seen, v);
        }
        if (v > best) {
            best = v;
            best_tau = tau;
        }
    }
    if (!std::isfinite(best) || hi_seen - lo_seen <= 1e-9 * (1.0 + std::abs(hi_seen))) {
        r.status = EstimateStatus::failed_flat;
        return r;
    }

    const double pitch = width / static_cast<double>(n - 1);
    double a = std::max(lo, best_tau - pitch);
    double b = std::min(hi, best_tau + pitch);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = ll(x1);
    double f2 = ll(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = ll(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = ll(x2);
        }
    }
    const double mid = 0.5 * (a + b);
    if (ll(mid) >= best) best_tau = mid;

    r.tau_hat = best_tau;
    r.std_err = detail::plugin_std_err(s, ch, best_tau, counts.total());
    return r;
}

/// One sample of a delay scan: observed coincidences among `trials`
/// post-selected pair events at stage position tau.
struct FringeSample {
    double tau = 0.0;  // ps
    std::uint64_t coincidences = 0;
    std::uint64_t trials = 0;
};

/// Ordered delay-scan data.
struct FringeScan {
    std::vector<FringeSample> samples;

    void validate() const {
        if (samples.empty()) throw std::invalid_argument("FringeScan: empty scan");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& smp = samples[i];
            if (!std::isfinite(smp.tau)) throw std::invalid_argument("FringeScan: non-finite tau");
            if (smp.trials < 1) throw std::invalid_argument("FringeScan: trials must be >= 1");
            if (smp.coincidences > smp.trials)
                throw std::invalid_argument("FringeScan: coincidences exceed trials");
            if (i > 0 && !(smp.tau > samples[i - 1].tau))
                throw std::invalid_argument("FringeScan: taus must be strictly increasing");
        }
    }
};

/// Parameters of the fitted fringe model
///   m(tau) = 1/2 [1 + alpha cos(delta (tau - tau0) + phi) e^{-2 sigma^2 (tau - tau0)^2}].
struct FringeModel {
    double delta = 0.0;
    double sigma = 1.0;
    double alpha = 0.5;
    double phi = 0.0;
    double tau0 = 0.0;
};

struct FitResult {
    BiphotonState state;    // fitted delta, sigma, phi
    ChannelParams channel;  // gamma fixed at 0 (post-selected data), alpha = visibility
    double visibility;      // fitted fringe amplitude, in [0, 1]
    double tau0;            // fitted envelope center, ps
    double delta_err, sigma_err, alpha_err, phi_err, tau0_err;  // 1-sigma, 0 for pinned params
    double rss;             // weighted residual sum of squares at the optimum
    int iterations;
    bool reduced_model;     // true when fitted as a beat-free Gaussian profile
};

struct FitOptions {
    int max_iterations = 200;
    std::optional<FringeModel> initial;  // overrides the automatic guess
};

namespace detail {

// model value and jacobian row in the order {delta, sigma, alpha, phi, tau0}
inline double fringe_model_value(const std::array<double, 5>& p, double tau) {
    const double u = tau - p[4];
    const double e = std::exp(-2.0 * p[1] * p[1] * u * u);
    return 0.5 * (1.0 + p[2] * std::cos(p[0] * u + p[3]) * e);
}

inline std::array<double, 5> fringe_model_jacobian(const std::array<double, 5>& p, double tau) {
    const double u = tau - p[4];
    const double e = std::exp(-2.0 * p[1] * p[1] * u * u);
    const double c = std::cos(p[0] * u + p[3]);
    const double s = std::sin(p[0] * u + p[3]);
    return {
        -0.5 * p[2] * u * s * e,                                  // d/d delta
        -2.0 * p[2] * p[1] * u * u * c * e,                       // d/d sigma
        0.5 * c * e,                                              // d/d alpha
        -0.5 * p[2] * s * e,                                      // d/d phi
        0.5 * p[2] * e * (p[0] * s + 4.0 * p[1] * p[1] * u * c),  // d/d tau0
    };
}

// Cholesky solve of a small SPD system; returns false when not positive
// definite.
template <std::size_t M>
inline bool cholesky_solve(std::array<std::array<double, M>, M> a, std::array<double, M>& x,
                           const std::array<double, M>& rhs, std::size_t m) {
    std::array<std::array<double, M>, M> l{};
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a[i][j];
            for (std::size_t k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
            if (i == j) {
                if (!(sum > 0.0)) return false;
                l[i][i] = std::sqrt(sum);
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    std::array<double, M> y{};
    for (std::size_t i = 0; i < m; ++i) {
        double sum = rhs[i];
        for (std::size_t k = 0; k < i; ++k) sum -= l[i][k] * y[k];
        y[i] = sum / l[i][i];
    }
    for (std::size_t ii = m; ii-- > 0;) {
        double sum = y[ii];
        for (std::size_t k = ii + 1; k < m; ++k) sum -= l[k][ii] * x[k];
        x[ii] = sum / l[ii][ii];
    }
    return true;
}

struct AutoGuess {
    FringeModel model;
    bool carrier;  // beat oscillation resolved in the scan
};

inline AutoGuess fringe_initial_guess(const std::vector<double>& taus, const std::vector<double>& ys) {
    const std::size_t n = taus.size();
    const double span = taus.back() - taus.front();
    const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);

    std::vector<double> gaps(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) gaps[i] = taus[i + 1] - taus[i];
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    const double h = gaps[gaps.size() / 2];

    // carrier frequency from the periodogram peak below Nyquist
    const std::size_t n_freq = 2048;
    const double w_max = std::numbers::pi / h;
    double peak_w = 0.0, peak_p = -1.0;
    for (std::size_t k = 1; k <= n_freq; ++k) {
        const double w = w_max * static_cast<double>(k) / static_cast<double>(n_freq);
        std::complex<double> z = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            z += (ys[j] - ybar) * std::polar(1.0, -w * taus[j]);
        const double p = std::norm(z);
        if (p > peak_p) {
            peak_p = p;
            peak_w = w;
        }
    }
    const bool carrier = peak_w * span / two_pi >= 2.5;  // at least ~2.5 oscillations resolved

    // envelope center and width from noise-floor-subtracted rectified signal
    std::vector<double> rect(n);
    for (std::size_t j = 0; j < n; ++j) rect[j] = std::abs(ys[j] - ybar);
    std::vector<double> sorted = rect;
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    const double floor_level = sorted[n / 2];
    double wsum = 0.0, tsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double w = std::max(rect[j] - floor_level, 0.0);
        wsum += w;
        tsum += w * taus[j];
    }
    double tau0 = wsum > 0.0 ? tsum / wsum : 0.5 * (taus.front() + taus.back());
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double w = std::max(rect[j] - floor_level, 0.0);
        var += w * (taus[j] - tau0) * (taus[j] - tau0);
    }
    var = wsum > 0.0 ? var / wsum : 0.0;
    double sigma0 = var > 0.0 ? 1.0 / (2.0 * std::sqrt(var)) : 4.0 / span;

    FringeModel m;
    m.sigma = sigma0;
    m.tau0 = tau0;
    if (carrier) {
        m.delta = peak_w;
        m.alpha = std::clamp(2.0 * (*std::max_element(ys.begin(), ys.end()) - ybar), 0.05, 1.0);
        std::complex<double> z = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            z += (ys[j] - ybar) * std::polar(1.0, -peak_w * taus[j]);
        m.phi = wrap_phase(std::arg(z) + peak_w * tau0);
    } else {
        m.delta = 0.0;
        m.phi = 0.0;
        // signed dip/peak amplitude at the envelope center
        std::size_t j0 = 0;
        for (std::size_t j = 1; j < n; ++j)
            if (std::abs(taus[j] - tau0) < std::abs(taus[j0] - tau0)) j0 = j;
        m.alpha = std::clamp(2.0 * ys[j0] - 1.0, -1.0, 1.0);
    }
    return {m, carrier};
}

}  // namespace detail

/// Weighted nonlinear least-squares fit of normalized coincidence data to the
/// fringe model, by Levenberg-Marquardt with analytic derivatives and
/// binomial variance weights. The automatic initial guess takes the carrier
/// from the periodogram peak, the envelope from rectified-signal moments and
/// the phase from the carrier component. Scans without a resolved beat
/// (delta ~ 0) are fitted to the reduced beat-free profile with delta and phi
/// pinned.
///
/// Throws on rank-deficient data or when the iteration budget is exhausted.
inline FitResult fit_fringe(const FringeScan& scan, const FitOptions& options = {}) {
    scan.validate();
    const std::size_t n = scan.samples.size();
    if (n < 20) throw std::invalid_argument("fit_fringe: need at least 20 samples");

    std::vector<double> taus(n), ys(n), wts(n);
    for (std::size_t i = 0; i < n; ++i) {
        taus[i] = scan.samples[i].tau;
        ys[i] = static_cast<double>(scan.samples[i].coincidences) /
                static_cast<double>(scan.samples[i].trials);
        const double pc = std::clamp(ys[i], 0.01, 0.99);
        wts[i] = static_cast<double>(scan.samples[i].trials) / (pc * (1.0 - pc));
    }

    const auto [mn, mx] = std::minmax_element(ys.begin(), ys.end());
    if (*mx - *mn <= 0.0) throw std::runtime_error("fit_fringe: rank-deficient normal matrix (constant scan)");

    bool carrier = true;
    std::array<double, 5> p{};
    if (options.initial) {
        const FringeModel& g = *options.initial;
        p = {g.delta, g.sigma, g.alpha, g.phi, g.tau0};
        carrier = g.delta != 0.0;
    } else {
        const auto guess = detail::fringe_initial_guess(taus, ys);
        p = {guess.model.delta, guess.model.sigma, guess.model.alpha, guess.model.phi, guess.model.tau0};
        carrier = guess.carrier;
    }

    // active parameter indices; the beat-free profile pins delta and phi
    std::vector<int> active = carrier ? std::vector<int>{0, 1, 2, 3, 4} : std::vector<int>{1, 2, 4};
    const std::size_t m = active.size();

    auto cost = [&](const std::array<double, 5>& q) {
        double cst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ys[i] - detail::fringe_model_value(q, taus[i]);
            cst += wts[i] * r * r;
        }
        return cst;
    };

    double current = cost(p);
    double lambda = 1e-3;
    int iterations = 0;
    bool converged = false;
    std::array<std::array<double, 5>, 5> hess{};
    std::array<double, 5> grad{};

    for (; iterations < options.max_iterations; ++iterations) {
        for (auto& row : hess) row.fill(0.0);
        grad.fill(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto jrow = detail::fringe_model_jacobian(p, taus[i]);
            const double r = ys[i] - detail::fringe_model_value(p, taus[i]);
            for (std::size_t a = 0; a < m; ++a) {
                grad[a] += wts[i] * jrow[active[a]] * r;
                for (std::size_t b = 0; b <= a; ++b)
                    hess[a][b] += wts[i] * jrow[active[a]] * jrow[active[b]];
            }
        }
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = a + 1; b < m; ++b) hess[a][b] = hess[b][a];

        double max_diag = 0.0;
        for (std::size_t a = 0; a < m; ++a) max_diag = std::max(max_diag, hess[a][a]);
        if (!(max_diag > 0.0)) throw std::runtime_error("fit_fringe: rank-deficient normal matrix");
        for (std::size_t a = 0; a < m; ++a)
            if (hess[a][a] < 1e-14 * max_diag)
                throw std::runtime_error("fit_fringe: rank-deficient normal matrix");

        bool stepped = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            auto damped = hess;
            for (std::size_t a = 0; a < m; ++a) damped[a][a] += lambda * (hess[a][a] + 1e-12 * max_diag);
            std::array<double, 5> dp{};
            if (!detail::cholesky_solve<5>(damped, dp, grad, m)) {
                lambda *= 10.0;
                continue;
            }
            auto trial = p;
            for (std::size_t a = 0; a < m; ++a) trial[active[a]] += dp[a];
            const double trial_cost = cost(trial);
            if (trial_cost <= current) {
                double step_size = 0.0;
                for (std::size_t a = 0; a < m; ++a)
                    step_size = std::max(step_size, std::abs(dp[a]) / (1.0 + std::abs(p[active[a]])));
                const double drop = current - trial_cost;
                p = trial;
                current = trial_cost;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (step_size < 1e-11 || drop <= 1e-14 * (1.0 + current)) converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped) {
            // no downhill step found at any damping: already at the optimum
            converged = true;
        }
        if (converged) break;
    }
    if (!converged)
        throw std::runtime_error("fit_fringe: did not converge within the iteration budget");

    // canonical parameter ranges: sigma > 0, alpha in [0, 1], delta >= 0
    if (p[1] < 0.0) p[1] = -p[1];
    if (p[2] < 0.0) {
        p[2] = -p[2];
        p[3] = wrap_phase(p[3] + std::numbers::pi);
    }
    if (p[0] < 0.0) {
        p[0] = -p[0];
        p[3] = -p[3];
    }
    p[3] = wrap_phase(p[3]);

    // covariance from the undamped normal matrix at the optimum, scaled by
    // the reduced chi-square
    for (auto& row : hess) row.fill(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto jrow = detail::fringe_model_jacobian(p, taus[i]);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b <= a; ++b)
                hess[a][b] += wts[i] * jrow[active[a]] * jrow[active[b]];
    }
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) hess[a][b] = hess[b][a];
    const double chi2_red = n > m ? current / static_cast<double>(n - m) : 1.0;
    std::array<double, 5> errs{};
    for (std::size_t a = 0; a < m; ++a) {
        std::array<double, 5> unit{};
        std::array<double, 5> col{};
        unit[a] = 1.0;
        if (!detail::cholesky_solve<5>(hess, col, unit, m))
            throw std::runtime_error("fit_fringe: rank-deficient normal matrix");
        errs[active[a]] = std::sqrt(std::max(col[a] * chi2_red, 0.0));
    }

    const double alpha_fit = std::min(p[2], 1.0);
    FitResult out{
        BiphotonState(p[0], p[1], p[3]),
        ChannelParams(0.0, alpha_fit),
        alpha_fit,
        p[4],
        errs[0],
        errs[1],
        errs[2],
        errs[3],
        errs[4],
        current,
        iterations,
        !carrier,
    };
    return out;
}

/// Wavelength bandwidth and coherence time equivalent to an RMS angular
/// bandwidth. The coherence time follows the Gaussian convention
/// tau_c = (4 ln 2 / pi) / nu with nu = sigma / 2 pi; the wavelength
/// bandwidth is lambda^2 nu / c at the reference wavelength.
struct BandwidthConversions {
    double wavelength_bandwidth_nm;
    double coherence_time_ps;
};

inline BandwidthConversions bandwidth_conversions(double sigma_rad_ps, double reference_lambda_nm = 810.0) {
    if (!(sigma_rad_ps > 0.0)) throw std::invalid_argument("bandwidth_conversions: sigma must be > 0");
    if (!(reference_lambda_nm > 0.0))
        throw std::invalid_argument("bandwidth_conversions: reference wavelength must be > 0");
    const double nu = sigma_rad_ps / two_pi;  // THz = 1/ps
    const double dlambda = reference_lambda_nm * reference_lambda_nm * nu / speed_of_light_nm_ps;
    const double coherence = (4.0 * std::numbers::ln2 / std::numbers::pi) / nu;
    return {dlambda, coherence};
}

}  // namespace homsim
