#pragma once

#include "constants.hpp"
#include "errors.hpp"

#include <cmath>
#include <cstdlib>
#include <optional>

namespace rotodop {

// Thermal vapor parameters. gamma is the ground-coherence relaxation rate,
// i.e. the FWHM (rad/s) of the homogeneous Lorentzian.
struct AtomEnsemble {
    double mass_m = defaults::rb87_mass_u * PhysicalConstants::atomic_mass_unit_u;
    double temperature_T = defaults::temperature_K;
    double gyro_g = defaults::rb87_ground_g;
    double gamma = defaults::gamma_rad_s;
    double density_scale_N = 1.0;

    // m / (2 kB T), s^2/m^2.
    double alpha() const noexcept {
        return mass_m / (2.0 * PhysicalConstants::boltzmann_kB * temperature_T);
    }

    void validate() const {
        if (!(mass_m > 0.0) || !std::isfinite(mass_m)) throw InvalidArgument("ensemble: mass must be > 0");
        if (!(temperature_T > 0.0) || !std::isfinite(temperature_T))
            throw InvalidArgument("ensemble: temperature must be > 0");
        if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("ensemble: gamma must be > 0");
        if (!std::isfinite(gyro_g)) throw InvalidArgument("ensemble: g factor must be finite");
    }
};

// One Laguerre-Gaussian field. Only p = 0 modes are supported.
// radius_override replaces the hyperbolic w(z) when the beam radius at the
// cell has been measured directly.
struct BeamMode {
    int charge_l = 0;
    int radial_p = 0;
    double waist_w0 = 0.5e-3;
    double wavelength = defaults::d1_wavelength_m;
    double z = 0.0;
    double intensity_scale_I0 = 1.0;
    std::optional<double> radius_override{};

    int abs_charge() const noexcept { return std::abs(charge_l); }
    double wavenumber() const noexcept { return two_pi / wavelength; }

    void validate() const {
        if (radial_p != 0) throw InvalidArgument("beam: only p = 0 modes are supported");
        if (!(waist_w0 > 0.0) || !std::isfinite(waist_w0)) throw InvalidArgument("beam: waist must be > 0");
        if (!(wavelength > 0.0) || !std::isfinite(wavelength))
            throw InvalidArgument("beam: wavelength must be > 0");
        if (!(intensity_scale_I0 >= 0.0) || !std::isfinite(intensity_scale_I0))
            throw InvalidArgument("beam: intensity scale must be >= 0");
        if (!std::isfinite(z)) throw InvalidArgument("beam: z must be finite");
        if (radius_override && !(*radius_override > 0.0 && std::isfinite(*radius_override)))
            throw InvalidArgument("beam: radius override must be > 0");
    }
};

// Atom position (r, z, phi) and velocity (V_R, V_z, V_phi), cylindrical.
struct CylKinematics {
    double r = 0.0;
    double z = 0.0;
    double phi = 0.0;
    double V_R = 0.0;
    double V_z = 0.0;
    double V_phi = 0.0;

    void validate() const {
        if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("kinematics: r must be >= 0");
        if (!std::isfinite(V_R) || !std::isfinite(V_z) || !std::isfinite(V_phi))
            throw InvalidArgument("kinematics: velocities must be finite");
    }
};

// Axial magnetic field, tesla. The sign is meaningful.
struct ZeemanConfig {
    double B = 0.0;
};

inline double rayleigh_range(const BeamMode& beam) {
    return pi * beam.waist_w0 * beam.waist_w0 / beam.wavelength;
}

inline double beam_radius(const BeamMode& beam) {
    if (beam.radius_override) return *beam.radius_override;
    const double zr = rayleigh_range(beam);
    const double s = beam.z / zr;
    return beam.waist_w0 * std::sqrt(1.0 + s * s);
}

// Far-field p = 0 intensity profile I0 r^{2|l|} exp(-2 r^2 / w^2).
inline double lg_intensity(const BeamMode& beam, double r) {
    if (!(r >= 0.0)) throw InvalidArgument("lg_intensity: r must be >= 0");
    const double w = beam_radius(beam);
    const double radial = std::pow(r, 2 * beam.abs_charge());
    return beam.intensity_scale_I0 * radial * std::exp(-2.0 * r * r / (w * w));
}

// Normalized 1D thermal distribution of the azimuthal velocity.
inline double maxwell_weight(const AtomEnsemble& ens, double V_phi) {
    const double a = ens.alpha();
    return std::sqrt(a / pi) * std::exp(-a * V_phi * V_phi);
}

// delta = 2 g muB B / hbar, rad/s.
inline double zeeman_shift(const AtomEnsemble& ens, const ZeemanConfig& field) {
    return 2.0 * ens.gyro_g * PhysicalConstants::bohr_magneton_muB * field.B /
           PhysicalConstants::reduced_planck_hbar;
}

// Inverse of zeeman_shift: field (T) producing the shift delta (rad/s).
inline double field_for_shift(const AtomEnsemble& ens, double delta) {
    if (ens.gyro_g == 0.0) throw InvalidArgument("field_for_shift: g factor is zero");
    return delta * PhysicalConstants::reduced_planck_hbar /
           (2.0 * ens.gyro_g * PhysicalConstants::bohr_magneton_muB);
}

} // namespace rotodop
