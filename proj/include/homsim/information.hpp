#pragma once

// Fisher information, Cramer-Rao bounds and working-point search for the
// three-outcome HOM measurement.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

#include "homsim/physics.hpp"

namespace homsim {

/// Q of the probe state: (delta^2 + 4 sigma^2) / 4, in ps^-2. The quantum
/// Cramer-Rao bound is 1 / (2 sqrt(N Q)).
inline double quantum_fisher_information(const BiphotonState& s) {
    return (s.delta * s.delta + 4.0 * s.sigma * s.sigma) / 4.0;
}

/// Quantum Cramer-Rao bound on the delay estimate, ps:
/// 1 / sqrt(N (delta^2 + 4 sigma^2)).
inline double qcr_bound(const BiphotonState& s, std::uint64_t n_trials) {
    if (n_trials < 1) throw std::invalid_argument("qcr_bound: n_trials must be >= 1");
    return 1.0 / std::sqrt(static_cast<double>(n_trials) * (s.delta * s.delta + 4.0 * s.sigma * s.sigma));
}

/// Classical Cramer-Rao bound 1 / sqrt(N F), ps.
inline double cr_bound(double fisher, std::uint64_t n_trials) {
    if (!(fisher > 0.0)) throw std::invalid_argument("cr_bound: Fisher information must be > 0");
    if (n_trials < 1) throw std::invalid_argument("cr_bound: n_trials must be >= 1");
    return 1.0 / std::sqrt(static_cast<double>(n_trials) * fisher);
}

/// Closed-form Fisher information of the three-outcome measurement, ps^-2:
///
///   F = (1-gamma^2) [alpha delta sin(delta tau + phi)
///        + 4 alpha sigma^2 tau cos(delta tau + phi)]^2 e^{-4 sigma^2 tau^2}
///       / (4 P1 P2 / (1-gamma)^4)
///
/// P0 is constant in tau and contributes nothing. Returns nullopt where the
/// expression is undefined (P1 or P2 vanishes, i.e. the ideal case at a
/// fringe extremum such as tau = 0).
inline std::optional<double> fisher_information(const BiphotonState& s, const ChannelParams& ch, double tau) {
    if (!std::isfinite(tau)) throw std::invalid_argument("fisher_information: non-finite tau");
    const double g = ch.gamma;
    const double a = ch.alpha;
    const double env = std::exp(-2.0 * s.sigma * s.sigma * tau * tau);
    const double arg = s.delta * tau + s.phi;
    const double c = std::cos(arg) * env;
    // bracket factors of P1 and P2; P_i = (1/2)(1-gamma)^2 * factor
    const double f2 = 1.0 + a * c;
    const double f1 = (1.0 + 3.0 * g) / (1.0 - g) - a * c;
    if (!(f1 > 0.0) || !(f2 > 0.0)) return std::nullopt;
    const double deriv = a * s.delta * std::sin(arg) + 4.0 * a * s.sigma * s.sigma * tau * std::cos(arg);
    return (1.0 - g * g) * deriv * deriv * env * env / (f1 * f2);
}

/// Direct evaluation of F = sum_i (dP_i/dtau)^2 / P_i with second-order
/// central differences; the independent check on the closed form. Outcomes
/// with P_i = 0 and a vanishing difference contribute zero; a vanishing P_i
/// with a nonzero difference makes the value undefined.
inline std::optional<double> fisher_information_numeric(const BiphotonState& s, const ChannelParams& ch,
                                                        double tau, double step = 1e-6) {
    if (!(step > 0.0)) throw std::invalid_argument("fisher_information_numeric: step must be > 0");
    const OutcomeProbs pp = outcome_probabilities(s, ch, tau + step);
    const OutcomeProbs pm = outcome_probabilities(s, ch, tau - step);
    const OutcomeProbs p0 = outcome_probabilities(s, ch, tau);
    const double probs[3] = {p0.p0, p0.p1, p0.p2};
    const double dplus[3] = {pp.p0, pp.p1, pp.p2};
    const double dminus[3] = {pm.p0, pm.p1, pm.p2};
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double d = (dplus[i] - dminus[i]) / (2.0 * step);
        if (probs[i] <= 0.0) {
            if (d == 0.0) continue;
            return std::nullopt;
        }
        total += d * d / probs[i];
    }
    return total;
}

/// Delay maximizing the Fisher information on a bracket, with its value.
struct WorkingPoint {
    double tau_star;    // ps
    double fisher_max;  // ps^-2
};

/// Scans [lo, hi] on a grid fine enough to resolve the beat oscillation
/// (pitch <= pi / (50 delta)) and refines the best node by golden-section
/// search. Undefined Fisher points are holes and are skipped. Deterministic;
/// ties resolve to the smallest tau.
inline WorkingPoint max_fisher(const BiphotonState& s, const ChannelParams& ch, double lo, double hi) {
    if (!(hi > lo)) throw std::invalid_argument("max_fisher: degenerate bracket");

    const double width = hi - lo;
    std::size_t n = 1001;
    if (s.delta > 0.0) {
        const double pitch = std::numbers::pi / (50.0 * s.delta);
        const double needed = std::ceil(width / pitch) + 1.0;
        if (needed > static_cast<double>(n)) n = static_cast<std::size_t>(needed);
    }

    auto value = [&](double tau) {
        const auto f = fisher_information(s, ch, tau);
        return f ? *f : -std::numeric_limits<double>::infinity();
    };

    double best_tau = lo;
    double best_f = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const double tau = lo + width * static_cast<double>(k) / static_cast<double>(n - 1);
        const double f = value(tau);
        if (f > best_f) {
            best_f = f;
            best_tau = tau;
        }
    }
    if (!std::isfinite(best_f)) throw std::runtime_error("max_fisher: Fisher information undefined on the whole bracket");

    // golden-section refinement around the best node
    const double pitch = width / static_cast<double>(n - 1);
    double a = std::max(lo, best_tau - pitch);
    double b = std::min(hi, best_tau + pitch);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = value(x1);
    double f2 = value(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        if (f1 >= f2) {  // keep the left interval on ties: smallest tau wins
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = value(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = value(x2);
        }
    }
    const double mid = 0.5 * (a + b);
    const double fmid = value(mid);
    if (fmid >= best_f) {
        best_tau = mid;
        best_f = fmid;
    }
    return WorkingPoint{best_tau, best_f};
}

}  // namespace homsim
