#pragma once

// Frequency-entangled biphoton state and Hong-Ou-Mandel outcome statistics.
//
// Unit conventions used throughout the library:
//   time              ps
//   angular frequency rad/ps  (1 THz ordinary = 2*pi rad/ps)
//   wavelength        nm
// Detunings quoted in THz (ordinary frequency) must be converted with
// angular_from_thz() before they enter any formula here.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace homsim {

inline constexpr double speed_of_light_nm_ps = 299792.458;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Wraps an angle into [-pi, pi).
inline double wrap_phase(double phi) {
    double w = std::remainder(phi, two_pi);
    if (w >= std::numbers::pi) w -= two_pi;  // remainder returns (-pi, pi]; fold +pi
    return w;
}

/// omega = 2*pi*nu. Input in THz (ordinary), output in rad/ps.
inline double angular_from_thz(double nu_thz) {
    if (!std::isfinite(nu_thz)) throw std::invalid_argument("angular_from_thz: non-finite input");
    return two_pi * nu_thz;
}

/// Inverse of angular_from_thz.
inline double thz_from_angular(double omega_rad_ps) {
    if (!std::isfinite(omega_rad_ps)) throw std::invalid_argument("thz_from_angular: non-finite input");
    return omega_rad_ps / two_pi;
}

/// Angular detuning |2*pi*c*(1/lambda_i - 1/lambda_s)| in rad/ps from two
/// center wavelengths in nm. Argument order does not matter.
inline double detuning_from_wavelengths(double lambda_s_nm, double lambda_i_nm) {
    if (!(lambda_s_nm > 0.0) || !(lambda_i_nm > 0.0))
        throw std::invalid_argument("detuning_from_wavelengths: wavelengths must be positive");
    return std::abs(two_pi * speed_of_light_nm_ps * (1.0 / lambda_i_nm - 1.0 / lambda_s_nm));
}

/// Two-color entangled probe state. The two center frequencies enter only
/// through their separation delta; sigma is the RMS bandwidth of the
/// single-photon intensity spectrum (the interference envelope is
/// exp(-2 sigma^2 tau^2)); phi is the relative phase of the two colors.
struct BiphotonState {
    double delta;  // angular detuning, rad/ps, >= 0
    double sigma;  // RMS bandwidth, rad/ps, > 0
    double phi;    // relative phase, rad, in [-pi, pi)

    BiphotonState(double delta_, double sigma_, double phi_ = 0.0) {
        if (!std::isfinite(delta_) || !std::isfinite(sigma_) || !std::isfinite(phi_))
            throw std::invalid_argument("BiphotonState: non-finite field");
        if (!(sigma_ > 0.0)) throw std::invalid_argument("BiphotonState: sigma must be > 0");
        if (delta_ < 0.0) {  // fold the sign of the detuning into the phase
            delta_ = -delta_;
            phi_ = -phi_;
        }
        delta = delta_;
        sigma = sigma_;
        phi = wrap_phase(phi_);
    }
};

/// Loss and visibility of a real interferometer. gamma is the per-photon
/// probability of non-detection, alpha the fringe visibility.
struct ChannelParams {
    double gamma;
    double alpha;

    ChannelParams(double gamma_, double alpha_) {
        if (!(gamma_ >= 0.0 && gamma_ < 1.0))
            throw std::invalid_argument("ChannelParams: gamma must be in [0, 1)");
        if (!(alpha_ >= 0.0 && alpha_ <= 1.0))
            throw std::invalid_argument("ChannelParams: alpha must be in [0, 1]");
        gamma = gamma_;
        alpha = alpha_;
    }
};

/// Probabilities of zero/one/two detector clicks. Always sums to one.
struct OutcomeProbs {
    double p0;
    double p1;
    double p2;

    OutcomeProbs(double p0_, double p1_, double p2_) : p0(p0_), p1(p1_), p2(p2_) {
        for (double p : {p0, p1, p2})
            if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("OutcomeProbs: component outside [0, 1]");
        if (std::abs(p0 + p1 + p2 - 1.0) > 1e-12)
            throw std::invalid_argument("OutcomeProbs: components do not sum to 1");
    }
};

/// cos(delta*tau + phi) * exp(-2 sigma^2 tau^2), the oscillating fringe term.
inline double fringe_term(const BiphotonState& s, double tau) {
    return std::cos(s.delta * tau + s.phi) * std::exp(-2.0 * s.sigma * s.sigma * tau * tau);
}

/// Normalized coincidence probability of the ideal interferometer,
/// (1/2) [1 + cos(delta*tau + phi) exp(-2 sigma^2 tau^2)].
inline double coincidence_probability(const BiphotonState& s, double tau) {
    if (!std::isfinite(tau)) throw std::invalid_argument("coincidence_probability: non-finite tau");
    return 0.5 * (1.0 + fringe_term(s, tau));
}

/// Outcome probabilities given the unscaled fringe value c = cos(...)*envelope.
/// Shared by the delay and temperature parametrizations.
inline OutcomeProbs outcome_probabilities_from_fringe(const ChannelParams& ch, double c) {
    const double g = ch.gamma;
    const double t = 0.5 * (1.0 - g) * (1.0 - g);
    const double ac = ch.alpha * c;
    const double p2 = t * (1.0 + ac);
    const double p1 = t * ((1.0 + 3.0 * g) / (1.0 - g) - ac);
    return OutcomeProbs(g * g, p1, p2);
}

/// Three-outcome probabilities of the lossy interferometer at delay tau.
inline OutcomeProbs outcome_probabilities(const BiphotonState& s, const ChannelParams& ch, double tau) {
    if (!std::isfinite(tau)) throw std::invalid_argument("outcome_probabilities: non-finite tau");
    return outcome_probabilities_from_fringe(ch, fringe_term(s, tau));
}

/// Coincidence probability among pairs post-selected on both photons being
/// detected: (1/2) [1 + alpha * fringe]. This is what normalized fringe scans
/// measure.
inline double post_selected_coincidence_probability(const BiphotonState& s, const ChannelParams& ch,
                                                    double tau) {
    return 0.5 * (1.0 + ch.alpha * fringe_term(s, tau));
}

/// Uniform discretization of the spectral integral. points must be odd so
/// that Omega = 0 is a node; half_width is the grid extent in units of sigma.
struct SpectralGrid {
    double half_width = 8.0;
    std::size_t points = 2001;

    void validate() const {
        if (points < 3 || points % 2 == 0)
            throw std::invalid_argument("SpectralGrid: points must be odd and >= 3");
        if (!(half_width >= 5.0))
            throw std::invalid_argument("SpectralGrid: half_width must be >= 5");
    }
};

/// Numerical oracle for the coincidence probability: discretizes the spectral
/// amplitude, applies the branch phase e^{i((delta+2*Omega)tau + phi)} to the
/// first amplitude branch of the entangled state, pushes both branches through the
/// 50:50 beam-splitter map a1 -> (a3+a4)/sqrt2, a2 -> (a3-a4)/sqrt2, and sums
/// |amplitude|^2 over the opposite-port (anti-bunched) sector.
///
/// Independent of coincidence_probability(); agrees with it (phi = 0) to
/// within quadrature error.
inline double beam_splitter_oracle(const BiphotonState& s, double tau, const SpectralGrid& grid) {
    grid.validate();
    if (!std::isfinite(tau)) throw std::invalid_argument("beam_splitter_oracle: non-finite tau");

    const std::size_t n = grid.points;
    const double lim = grid.half_width * s.sigma;
    const double h = 2.0 * lim / static_cast<double>(n - 1);

    // |f(Omega_k)|^2 on the grid, trapezoid-weighted and normalized.
    std::vector<double> f2(n);
    double norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double omega = -lim + static_cast<double>(k) * h;
        double w = std::exp(-omega * omega / (2.0 * s.sigma * s.sigma));
        if (k == 0 || k == n - 1) w *= 0.5;
        f2[k] = w;
        norm += w;
    }

    // Opposite-port amplitudes for the mode pairs
    //   a[k]: a3^+(omega1 + Omega_k) a4^+(omega2 - Omega_k)
    //   b[k]: a3^+(omega2 - Omega_k) a4^+(omega1 + Omega_k)
    // Branch one of the state carries the delay phase; branch two maps onto
    // the mirrored node (omega2 + Omega_k = omega2 - Omega_{n-1-k}).
    std::vector<std::complex<double>> a(n), b(n);
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    for (std::size_t k = 0; k < n; ++k) {
        const double omega = -lim + static_cast<double>(k) * h;
        const double f = std::sqrt(f2[k] / norm);
        const double theta = (s.delta + 2.0 * omega) * tau + s.phi;
        const std::complex<double> g = f * inv_sqrt2 * std::complex<double>(std::cos(theta), std::sin(theta));
        a[k] -= 0.5 * g;
        b[k] += 0.5 * g;
        const std::complex<double> q = -f * inv_sqrt2;  // second branch, relative sign of the entangled state
        const std::size_t m = n - 1 - k;
        b[m] -= 0.5 * q;
        a[m] += 0.5 * q;
    }

    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) total += std::norm(a[k]) + std::norm(b[k]);
    return total;
}

}  // namespace homsim
