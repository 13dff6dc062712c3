#pragma once

#include <array>

#include <Eigen/Dense>

#include "cptclock/laser.hpp"
#include "cptclock/species.hpp"

namespace cptclock {

// Regime checks for the closed-form linewidth. Each inequality is enforced
// as a ratio >= 100; outside the regime the flag goes false (warn, not fail).
struct ValidityFlags {
    bool alpha_sq_small = true;       // alpha_W^2 << 1
    bool weak_vs_repump = true;       // alpha_W^2 Omega_B^2 << Omega_R^2
    bool pump_dominates = true;       // beta_PD Omega_B^2 >> beta_PS Omega_R^2
    double ratio_alpha_sq = 0.0;      // 1 / alpha_W^2
    double ratio_weak_vs_repump = 0.0;
    double ratio_pump_dominates = 0.0;
    static constexpr double threshold = 100.0;

    bool all_green() const { return alpha_sq_small && weak_vs_repump && pump_dominates; }
};

// First-order dressing of the weakly driven (|S>, |Q>) pair and the
// effective Lambda system it leaves behind.
struct DressedModel {
    double alpha_W = 0.0;           // Omega_W / (2 Delta_W)
    double light_shift = 0.0;       // alpha_W * Omega_W / 2, s^-1
    std::array<double, 2> s_Q_coeffs{1.0, 0.0};  // |S_Q> over (|S>, |Q>)
    std::array<double, 2> q_S_coeffs{0.0, 1.0};  // |Q_S> over (|S>, |Q>)
    double effective_rabi_QP = 0.0;  // -alpha_W * Omega_B, s^-1
    double gamma_Lambda = 0.0;       // gamma_P (beta_PD + alpha_W^2 beta_PS), s^-1
    double epsilon = 0.0;            // alpha_W * Omega_B / Omega_R
    bool perturbation_warning = false;  // |alpha_W| > 0.01
};

// Analytic dark-line observables.
struct LineEstimate {
    double gamma_eff = 0.0;     // FWHM, s^-1
    double signal_rate = 0.0;   // photons/s per ion on resonance
    double center_offset = 0.0; // dip center relative to the bare three-photon resonance, s^-1
    ValidityFlags validity;
};

// Requires Delta_W != 0 and |alpha_W| < 0.1; warns above 0.01.
DressedModel make_dressed(const LaserParams& lasers, const IonSpecies& species);

// Delta_R + Delta_W - Delta_B + alpha_W Omega_W / 2.
double three_photon_detuning(const LaserParams& lasers, const DressedModel& dressed);

// Normalized dark-state amplitudes over (|D>, |Q_S>): (E, 1)/sqrt(1+E^2).
Eigen::Vector2d dark_state(const DressedModel& dressed);

// Dark-state amplitudes in the bare 4-level basis (|S>,|P>,|D>,|Q>),
// obtained by expanding |Q_S>.
Eigen::Vector4d dark_state_bare(const DressedModel& dressed);

// Power-broadened FWHM and on-resonance signal rate of the dark line.
// Rejects Omega_R = 0.
LineEstimate analytic_linewidth(const LaserParams& lasers, const IonSpecies& species,
                                const DressedModel& dressed);

ValidityFlags check_validity(const LaserParams& lasers, const IonSpecies& species,
                             const DressedModel& dressed);

}  // namespace cptclock
