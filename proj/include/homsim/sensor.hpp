#pragma once

// Fiber temperature sensor on the biphoton beat note: heating shifts the
// relative phase of the two colors, which moves the coincidence fringe.
// Temperatures are degrees of heating above room temperature.

#include <cmath>
#include <stdexcept>
#include <utility>

#include "homsim/physics.hpp"

namespace homsim {

/// Thermo-optic model of the sensing fiber at room temperature.
struct FiberModel {
    double lambda_s_nm;  // signal center wavelength
    double lambda_i_nm;  // idler center wavelength
    double n_group_s;    // group index at lambda_s
    double n_group_i;    // group index at lambda_i
    double length_m;     // fiber length L0
    double dn_dt;        // d(group index)/dT, 1/deg
    double dl_dt;        // d(length)/dT, m/deg

    FiberModel(double lambda_s, double lambda_i, double n_s, double n_i, double length, double dn,
               double dl)
        : lambda_s_nm(lambda_s),
          lambda_i_nm(lambda_i),
          n_group_s(n_s),
          n_group_i(n_i),
          length_m(length),
          dn_dt(dn),
          dl_dt(dl) {
        if (!(lambda_s_nm > 0.0) || !(lambda_i_nm > 0.0))
            throw std::invalid_argument("FiberModel: wavelengths must be positive");
        if (!(n_group_s >= 1.0) || !(n_group_i >= 1.0))
            throw std::invalid_argument("FiberModel: group indices must be >= 1");
        if (!(length_m >= 0.0)) throw std::invalid_argument("FiberModel: length must be >= 0");
        if (!std::isfinite(dn_dt) || std::abs(dn_dt) >= 1e-2)
            throw std::invalid_argument("FiberModel: dn_dt outside the sanity bound");
        if (!std::isfinite(dl_dt) || std::abs(dl_dt) >= 1e-2)
            throw std::invalid_argument("FiberModel: dl_dt outside the sanity bound");
    }
};

/// Energy-conserving (signal, idler) wavelength pair in nm around a center
/// wavelength, for a given angular detuning: 1/ls + 1/li = 2/center and
/// c (1/ls - 1/li) = detuning / 2 pi.
inline std::pair<double, double> wavelengths_from_detuning(double center_nm, double delta_rad_ps) {
    if (!(center_nm > 0.0)) throw std::invalid_argument("wavelengths_from_detuning: center must be > 0");
    if (!(delta_rad_ps >= 0.0))
        throw std::invalid_argument("wavelengths_from_detuning: detuning must be >= 0");
    const double nu_sum = 2.0 * speed_of_light_nm_ps / center_nm;  // THz
    const double nu_det = delta_rad_ps / two_pi;
    if (nu_det >= nu_sum)
        throw std::invalid_argument("wavelengths_from_detuning: detuning exceeds the pair energy");
    const double nu_s = 0.5 * (nu_sum + nu_det);
    const double nu_i = 0.5 * (nu_sum - nu_det);
    return {speed_of_light_nm_ps / nu_s, speed_of_light_nm_ps / nu_i};
}

namespace detail {

inline double wavenumber_per_m(double lambda_nm) { return two_pi / (lambda_nm * 1e-9); }

}  // namespace detail

/// Differential biphoton phase after heating by temp_delta degrees,
///
///   beta = (k_s - k_i) dN/dT L0 T + (k_s N_s - k_i N_i) dL/dT T,
///
/// with k = 2 pi / lambda in 1/m. The quadratic (dN/dT)(dL/dT) T^2 term is
/// dropped; beta is exactly linear in T.
inline double phase_shift(const FiberModel& m, double temp_delta) {
    if (!std::isfinite(temp_delta)) throw std::invalid_argument("phase_shift: non-finite temperature");
    const double ks = detail::wavenumber_per_m(m.lambda_s_nm);
    const double ki = detail::wavenumber_per_m(m.lambda_i_nm);
    return ((ks - ki) * m.dn_dt * m.length_m + (ks * m.n_group_s - ki * m.n_group_i) * m.dl_dt) *
           temp_delta;
}

/// d(beta)/dT in rad/deg; equals phase_shift at one degree.
inline double thermal_coefficient(const FiberModel& m) { return phase_shift(m, 1.0); }

/// Fiber length that reproduces a measured thermal coefficient with the
/// remaining model fields held fixed (the length field of `m` is ignored).
inline double calibrate_length(double measured_coefficient, const FiberModel& m) {
    const double ks = detail::wavenumber_per_m(m.lambda_s_nm);
    const double ki = detail::wavenumber_per_m(m.lambda_i_nm);
    const double slope = (ks - ki) * m.dn_dt;
    if (slope == 0.0)
        throw std::invalid_argument("calibrate_length: degenerate wavelengths or zero dn_dt");
    const double expansion = (ks * m.n_group_s - ki * m.n_group_i) * m.dl_dt;
    return (measured_coefficient - expansion) / slope;
}

/// Outcome probabilities at the working point tau_s with the fringe phase
/// shifted by beta(T). The envelope is held at its working-point value; over
/// the scanned temperature range the coincidence probability is a pure
/// cosine in T.
inline OutcomeProbs coincidence_vs_temperature(const FiberModel& m, const BiphotonState& s,
                                               const ChannelParams& ch, double tau_s,
                                               double temp_delta) {
    if (!std::isfinite(tau_s)) throw std::invalid_argument("coincidence_vs_temperature: non-finite tau_s");
    const double env = std::exp(-2.0 * s.sigma * s.sigma * tau_s * tau_s);
    const double c = std::cos(s.delta * tau_s + s.phi + phase_shift(m, temp_delta)) * env;
    return outcome_probabilities_from_fringe(ch, c);
}

/// Temperature resolution from a delay precision: delta_beta = delta *
/// delta_tau, delta_T = delta_beta / (d beta / dT).
inline double temperature_resolution(double coefficient, const BiphotonState& s, double delta_tau_ps) {
    if (!(coefficient > 0.0))
        throw std::invalid_argument("temperature_resolution: coefficient must be > 0");
    if (!(delta_tau_ps >= 0.0))
        throw std::invalid_argument("temperature_resolution: delay precision must be >= 0");
    return s.delta * delta_tau_ps / coefficient;
}

}  // namespace homsim
