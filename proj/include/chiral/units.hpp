#pragma once

#include <numbers>

// Internal unit system: hbar = 1, time in ps, energies as angular
// frequencies in rad/ps. Conversions live here and are only applied at the
// configuration boundary.
namespace chiral::units {

inline constexpr double pi = std::numbers::pi;

inline constexpr double speed_of_light = 2.99792458e8;        // m/s
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
inline constexpr double hbar_si = 1.054571817e-34;            // J s
inline constexpr double boltzmann_si = 1.380649e-23;          // J/K

/// 1 cm^-1 expressed in rad/ps (2 pi c with c in cm/ps).
inline constexpr double rad_per_ps_per_wavenumber = 2.0 * pi * 2.99792458e-2;

/// k_B / hbar in rad/ps per kelvin.
inline constexpr double rad_per_ps_per_kelvin = boltzmann_si / hbar_si * 1e-12;

/// Polarizability volume (Angstrom^3) to SI polarizability (C m^2 / V).
inline constexpr double si_per_cubic_angstrom = 4.0 * pi * vacuum_permittivity * 1e-30;

constexpr double from_wavenumber(double cm) { return cm * rad_per_ps_per_wavenumber; }
constexpr double to_wavenumber(double rad_ps) { return rad_ps / rad_per_ps_per_wavenumber; }
constexpr double kelvin_to_rad_per_ps(double kelvin) { return kelvin * rad_per_ps_per_kelvin; }

} // namespace chiral::units
