#pragma once

#include <numbers>

namespace rotodop {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018 exact/recommended values, SI units.
struct PhysicalConstants {
    static constexpr double boltzmann_kB = 1.380649e-23;            // J/K (exact)
    static constexpr double bohr_magneton_muB = 9.2740100783e-24;   // J/T
    static constexpr double reduced_planck_hbar = 1.054571817e-34;  // J s (exact)
    static constexpr double atomic_mass_unit_u = 1.66053906660e-27; // kg
};

static_assert(PhysicalConstants::boltzmann_kB > 0.0);
static_assert(PhysicalConstants::bohr_magneton_muB > 0.0);
static_assert(PhysicalConstants::reduced_planck_hbar > 0.0);
static_assert(PhysicalConstants::atomic_mass_unit_u > 0.0);

// Config defaults: 87Rb on the D1 line in a room-temperature cell.
namespace defaults {
inline constexpr double rb87_mass_u = 86.9092;
inline constexpr double rb87_ground_g = 0.5;
inline constexpr double temperature_K = 293.15;
inline constexpr double d1_wavelength_m = 794.98e-9;
inline constexpr double gamma_rad_s = two_pi * 52.0e3;
} // namespace defaults

// Angular frequency <-> cyclic frequency.
constexpr double hz_to_rad_s(double hz) noexcept { return two_pi * hz; }
constexpr double rad_s_to_hz(double w) noexcept { return w / two_pi; }

} // namespace rotodop
