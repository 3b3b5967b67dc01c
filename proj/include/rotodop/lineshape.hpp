#pragma once

#include "doppler.hpp"
#include "parallel.hpp"
#include "physics.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string_view>
#include <vector>

namespace rotodop {

enum class Method { DoubleIntegral, ClosedConvolution, NarrowLimit, MonteCarlo };

inline std::string_view method_name(Method m) {
    switch (m) {
    case Method::DoubleIntegral: return "double_integral";
    case Method::ClosedConvolution: return "closed_form";
    case Method::NarrowLimit: return "narrow_limit";
    case Method::MonteCarlo: return "monte_carlo";
    }
    return "unknown";
}

// Two copropagating LG fields driving one Hanle/EIT resonance in a vapor.
struct ResonanceModel {
    AtomEnsemble ensemble{};
    BeamMode beam1{};
    BeamMode beam2{};
    double amplitude_A = 1.0;

    int l1() const noexcept { return beam1.charge_l; }
    int l2() const noexcept { return beam2.charge_l; }
    bool equal_charges() const noexcept { return l1() == l2(); }
    int charge_difference() const noexcept { return l1() - l2(); }

    // Exponent of the inhomogeneous profile, |l1| + |l2| + 3/2.
    double q() const noexcept { return beam1.abs_charge() + beam2.abs_charge() + 1.5; }

    // Shared beam radius w(z) at the cell.
    double radius() const { return beam_radius(beam1); }

    void validate() const {
        ensemble.validate();
        beam1.validate();
        beam2.validate();
        if (beam1.wavelength != beam2.wavelength) throw InvalidArgument("model: beams must share the wavelength");
        if (beam1.z != beam2.z) throw InvalidArgument("model: beams must share the propagation distance");
        if (beam_radius(beam1) != beam_radius(beam2)) throw InvalidArgument("model: beams must share w(z)");
        if (!(amplitude_A > 0.0) || !std::isfinite(amplitude_A))
            throw InvalidArgument("model: amplitude must be > 0");
    }

    // Geometry under which only the rotational term survives in delta'.
    void require_cancellation_premise() const {
        validate();
        if (beam1.abs_charge() != beam2.abs_charge())
            throw InvalidArgument("model: |l1| must equal |l2| for the velocity-space signal");
        if (beam1.waist_w0 != beam2.waist_w0) throw InvalidArgument("model: beams must share the waist");
    }

    // Width scale of the inhomogeneous profile: 2 |l1 - l2| / (sqrt(alpha) w).
    double doppler_scale() const {
        return 2.0 * std::abs(charge_difference()) / (std::sqrt(ensemble.alpha()) * radius());
    }
};

struct LineshapeResult {
    std::vector<double> deltas;
    std::vector<double> values;
    Method method = Method::ClosedConvolution;
    double error_estimate = 0.0; // largest per-point relative error estimate
    double raw_peak = 1.0;       // values * raw_peak recovers the unnormalized signal
};

struct LineshapeOptions {
    double rel_tol = 1e-8;
    int max_intervals = 4000;
    unsigned threads = 1;
};

// Unit-area Lorentzian of FWHM gamma.
inline double lorentzian(double gamma, double x) {
    return gamma / (two_pi * (x * x + 0.25 * gamma * gamma));
}

inline double homogeneous_response(const ResonanceModel& model, double r, double delta_prime, double delta) {
    return model.amplitude_A * lg_intensity(model.beam1, r) * lg_intensity(model.beam2, r) *
           lorentzian(model.ensemble.gamma, delta_prime - delta);
}

namespace detail {

struct SignalPoint {
    double value = 0.0;
    double error = 0.0;
};

inline void require_distinct_charges(const ResonanceModel& model, const char* what) {
    if (model.equal_charges())
        throw DegenerateCharges(std::string(what) + ": l1 == l2 has no Doppler-broadened profile");
}

// Offsets that grade a sharp Lorentzian feature for the adaptive rule.
inline void add_graded(std::vector<double>& pts, double centre, double half_width) {
    pts.push_back(centre);
    for (double m : {1.0, 10.0, 100.0}) {
        pts.push_back(centre - m * half_width);
        pts.push_back(centre + m * half_width);
    }
}

inline SignalPoint double_integral_point(const ResonanceModel& model, double delta, const LineshapeOptions& opt) {
    const double alpha = model.ensemble.alpha();
    const double gamma = model.ensemble.gamma;
    const double w = model.radius();
    const int l1 = model.l1();
    const int l2 = model.l2();
    const int c = l2 - l1;
    const double v_cut = 9.0 / std::sqrt(alpha);
    const double sigma_v = 1.0 / std::sqrt(2.0 * alpha);

    quad::Options inner_opt{opt.rel_tol * 1e-2, 0.0, opt.max_intervals};
    quad::Options outer_opt{opt.rel_tol, 0.0, opt.max_intervals};
    double inner_err_max = 0.0;

    auto velocity_integral = [&](double r) {
        auto integrand = [&](double v) {
            const double dp = rotational_detuning(l1, l2, r, v);
            return lorentzian(gamma, dp - delta) * maxwell_weight(model.ensemble, v);
        };
        std::vector<double> pts{0.0, -sigma_v, sigma_v, -3.0 * sigma_v, 3.0 * sigma_v};
        if (c != 0) add_graded(pts, delta * r / c, 0.5 * gamma * r / std::abs(c));
        const auto bp = quad::breakpoints(std::move(pts), -v_cut, v_cut);
        const quad::Result res = quad::integrate(integrand, std::span<const double>(bp), inner_opt);
        if (res.value > 0.0) inner_err_max = std::max(inner_err_max, res.error / res.value);
        return res.value;
    };

    auto radial = [&](double r) {
        if (r <= 0.0) return 0.0;
        const double intensity = lg_intensity(model.beam1, r) * lg_intensity(model.beam2, r);
        if (intensity == 0.0) return 0.0;
        return two_pi * r * model.amplitude_A * intensity * velocity_integral(r);
    };

    const int total_l = model.beam1.abs_charge() + model.beam2.abs_charge();
    const double r_peak = w * std::sqrt((2.0 * total_l + 1.0) / 8.0);
    const auto bp = quad::breakpoints({0.5 * r_peak, r_peak, 1.5 * r_peak, 2.0 * r_peak, 3.0 * r_peak}, 0.0,
                                      6.0 * w);
    const quad::Result res = quad::integrate(radial, std::span<const double>(bp), outer_opt);
    const double rel = res.value > 0.0 ? res.error / res.value : 0.0;
    return {model.ensemble.density_scale_N * res.value, rel + inner_err_max};
}

inline SignalPoint closed_form_point(const ResonanceModel& model, double delta, const LineshapeOptions& opt) {
    require_distinct_charges(model, "signal_closed_form");
    const double gamma = model.ensemble.gamma;
    const double s = model.doppler_scale();
    const double q = model.q();
    auto integrand = [&](double dp) {
        const double u = dp / s;
        return lorentzian(gamma, dp - delta) * std::pow(1.0 + u * u, -q);
    };
    const double reach = 20.0 * std::max(s, 0.5 * gamma);
    const double lo = std::min(0.0, delta) - reach;
    const double hi = std::max(0.0, delta) + reach;
    std::vector<double> pts{0.0, -s, s, -3.0 * s, 3.0 * s};
    add_graded(pts, delta, 0.5 * gamma);
    const auto bp = quad::breakpoints(std::move(pts), lo, hi);
    const quad::Result res = quad::integrate_line(integrand, std::span<const double>(bp), std::max(s, gamma),
                                                  {opt.rel_tol, 0.0, opt.max_intervals});
    return {res.value, res.value > 0.0 ? res.error / res.value : 0.0};
}

} // namespace detail

// Ensemble signal as the position-velocity double integral over the
// product-intensity weighted beam cross section and the thermal V_phi
// distribution. Requires |l1| = |l2| and shared beam geometry.
inline double signal_double_integral(const ResonanceModel& model, double delta, const LineshapeOptions& opt = {}) {
    model.require_cancellation_premise();
    return detail::double_integral_point(model, delta, opt).value;
}

// Single convolution of the Lorentzian with the rotational-Doppler profile
// [alpha d'^2/(l1-l2)^2 + 4/w^2]^-q. The coefficient is chosen so that the
// profile equals 1 at d' = 0; the result then tends to signal_narrow_limit
// as gamma -> 0.
inline double signal_closed_form(const ResonanceModel& model, double delta, const LineshapeOptions& opt = {}) {
    model.validate();
    return detail::closed_form_point(model, delta, opt).value;
}

// gamma -> 0 limit, normalized to 1 at delta = 0.
inline double signal_narrow_limit(const ResonanceModel& model, double delta) {
    model.validate();
    detail::require_distinct_charges(model, "signal_narrow_limit");
    const double u = delta / model.doppler_scale();
    return std::pow(1.0 + u * u, -model.q());
}

// FWHM of the narrow-limit profile.
inline double fwhm_analytic(const ResonanceModel& model) {
    model.validate();
    detail::require_distinct_charges(model, "fwhm_analytic");
    return 2.0 * model.doppler_scale() * std::sqrt(std::exp2(1.0 / model.q()) - 1.0);
}

// Separation of the derivative extrema of the narrow-limit profile.
inline double peak_to_peak_narrow_limit(const ResonanceModel& model) {
    model.validate();
    detail::require_distinct_charges(model, "peak_to_peak_narrow_limit");
    return 2.0 * model.doppler_scale() / std::sqrt(2.0 * model.q() + 1.0);
}

// Area of the unit-peak rotational-Doppler profile. Dividing
// signal_closed_form by it gives the Lorentzian averaged over the normalized
// distribution of delta', i.e. the quantity a direct ensemble average estimates.
inline double doppler_profile_area(const ResonanceModel& model) {
    model.validate();
    detail::require_distinct_charges(model, "doppler_profile_area");
    const double q = model.q();
    return model.doppler_scale() * std::sqrt(pi) * std::exp(std::lgamma(q - 0.5) - std::lgamma(q));
}

// Convolution lineshape for any charges: the exact Lorentzian branch when
// l1 == l2, otherwise signal_closed_form over the profile area. The scale of
// both branches is that of a direct ensemble average of L(delta' - delta).
inline double signal_convolution(const ResonanceModel& model, double delta, const LineshapeOptions& opt = {}) {
    model.validate();
    if (model.equal_charges()) return lorentzian(model.ensemble.gamma, delta);
    return signal_closed_form(model, delta, opt) / doppler_profile_area(model);
}

// n points from lo to hi; symmetric ranges give exactly mirrored values
// with an exact zero at the centre for odd n.
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
    if (n < 2 || !(hi > lo)) throw InvalidArgument("uniform_grid: need n >= 2 and hi > lo");
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double denom = static_cast<double>(n - 1);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double k = 2.0 * static_cast<double>(i) - denom;
        out[i] = mid + half * (k / denom);
    }
    return out;
}

inline void require_increasing(std::span<const double> deltas) {
    if (deltas.empty()) throw InvalidArgument("detuning grid is empty");
    for (std::size_t i = 1; i < deltas.size(); ++i)
        if (!(deltas[i] > deltas[i - 1])) throw InvalidArgument("detuning grid must be strictly increasing");
}

// Rescales values to unit peak, storing the raw maximum.
inline void normalize_to_peak(LineshapeResult& shape) {
    const double peak = shape.values.empty() ? 0.0 : *std::max_element(shape.values.begin(), shape.values.end());
    if (!(peak > 0.0)) throw InvalidArgument("lineshape has no positive values to normalize");
    for (double& v : shape.values) v /= peak;
    shape.raw_peak = peak;
}

// Evaluates a deterministic method over a grid and normalizes to unit peak.
// For ClosedConvolution, l1 == l2 takes the Lorentzian branch.
inline LineshapeResult compute_lineshape(const ResonanceModel& model, std::span<const double> deltas, Method method,
                                         const LineshapeOptions& opt = {}) {
    require_increasing(deltas);
    if (method == Method::MonteCarlo) throw InvalidArgument("compute_lineshape: use mc_signal for Monte Carlo");
    if (method == Method::DoubleIntegral) model.require_cancellation_premise();
    else model.validate();
    if (method == Method::NarrowLimit) detail::require_distinct_charges(model, "narrow limit lineshape");

    LineshapeResult out;
    out.method = method;
    out.deltas.assign(deltas.begin(), deltas.end());
    out.values.assign(deltas.size(), 0.0);
    std::vector<double> errors(deltas.size(), 0.0);

    parallel_for(deltas.size(), opt.threads, [&](std::size_t i) {
        const double d = deltas[i];
        switch (method) {
        case Method::DoubleIntegral: {
            const auto p = detail::double_integral_point(model, d, opt);
            out.values[i] = p.value;
            errors[i] = p.error;
            break;
        }
        case Method::ClosedConvolution: {
            if (model.equal_charges()) {
                out.values[i] = lorentzian(model.ensemble.gamma, d);
            } else {
                const auto p = detail::closed_form_point(model, d, opt);
                out.values[i] = p.value;
                errors[i] = p.error;
            }
            break;
        }
        case Method::NarrowLimit:
            out.values[i] = signal_narrow_limit(model, d);
            break;
        case Method::MonteCarlo:
            break;
        }
    });

    out.error_estimate = errors.empty() ? 0.0 : *std::max_element(errors.begin(), errors.end());
    normalize_to_peak(out);
    return out;
}

} // namespace rotodop
