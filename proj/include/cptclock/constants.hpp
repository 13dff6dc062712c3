#pragma once

namespace cptclock {

// CODATA 2018 values, SI units.
struct PhysicalConstants {
    double hbar;               // J s
    double h;                  // J s
    double bohr_radius;        // m
    double elementary_charge;  // C
    double bohr_magneton;      // J/T
    double boltzmann;          // J/K
    double atomic_mass_unit;   // kg
};

inline constexpr PhysicalConstants codata{
    1.054571817e-34,
    6.62607015e-34,
    5.29177210903e-11,
    1.602176634e-19,
    9.2740100783e-24,
    1.380649e-23,
    1.66053906660e-27,
};

inline constexpr double two_pi = 6.283185307179586476925286766559;

// User-facing I/O is in ordinary frequency (Hz); everything internal is
// angular (s^-1). These two are the only conversion points.
inline constexpr double hz_to_angular(double f_hz) { return two_pi * f_hz; }
inline constexpr double angular_to_hz(double w) { return w / two_pi; }

}  // namespace cptclock
