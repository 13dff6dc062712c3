#include "cptclock/dressed.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cptclock {

DressedModel make_dressed(const LaserParams& lasers, const IonSpecies& species) {
    lasers.validate();
    species.validate();

    DressedModel dm;
    if (lasers.omega_W == 0.0) {
        dm.gamma_Lambda = species.gamma_P * species.beta_PD;
        dm.epsilon = 0.0;
        return dm;  // no coupling: |S_Q> = |S>, |Q_S> = |Q>
    }
    if (lasers.delta_W == 0.0)
        throw std::invalid_argument("make_dressed: Delta_W = 0, perturbation undefined");

    dm.alpha_W = lasers.omega_W / (2.0 * lasers.delta_W);
    if (std::abs(dm.alpha_W) >= 0.1)
        throw std::invalid_argument("make_dressed: |alpha_W| >= 0.1, outside perturbative model");
    dm.perturbation_warning = std::abs(dm.alpha_W) > 0.01;

    const double norm = std::sqrt(1.0 + dm.alpha_W * dm.alpha_W);
    dm.s_Q_coeffs = {1.0 / norm, dm.alpha_W / norm};
    dm.q_S_coeffs = {-dm.alpha_W / norm, 1.0 / norm};
    dm.light_shift = dm.alpha_W * lasers.omega_W / 2.0;
    dm.effective_rabi_QP = -dm.alpha_W * lasers.omega_B;
    dm.gamma_Lambda =
        species.gamma_P * (species.beta_PD + dm.alpha_W * dm.alpha_W * species.beta_PS);
    dm.epsilon = lasers.omega_R > 0.0 ? dm.alpha_W * lasers.omega_B / lasers.omega_R
                                      : std::numeric_limits<double>::quiet_NaN();
    return dm;
}

double three_photon_detuning(const LaserParams& lasers, const DressedModel& dressed) {
    return lasers.delta_R + lasers.delta_W - lasers.delta_B +
           dressed.alpha_W * lasers.omega_W / 2.0;
}

Eigen::Vector2d dark_state(const DressedModel& dressed) {
    const double e = dressed.epsilon;
    const double norm = std::sqrt(1.0 + e * e);
    return {e / norm, 1.0 / norm};
}

Eigen::Vector4d dark_state_bare(const DressedModel& dressed) {
    const Eigen::Vector2d dq = dark_state(dressed);
    Eigen::Vector4d v;
    v << dq(1) * dressed.q_S_coeffs[0],  // |S>
        0.0,                             // |P>
        dq(0),                           // |D>
        dq(1) * dressed.q_S_coeffs[1];   // |Q>
    return v.normalized();
}

ValidityFlags check_validity(const LaserParams& lasers, const IonSpecies& species,
                             const DressedModel& dressed) {
    ValidityFlags f;
    const double a2 = dressed.alpha_W * dressed.alpha_W;
    f.ratio_alpha_sq = a2 > 0 ? 1.0 / a2 : std::numeric_limits<double>::infinity();
    f.alpha_sq_small = f.ratio_alpha_sq >= ValidityFlags::threshold;

    const double weak2 = a2 * lasers.omega_B * lasers.omega_B;
    f.ratio_weak_vs_repump = weak2 > 0 ? lasers.omega_R * lasers.omega_R / weak2
                                       : std::numeric_limits<double>::infinity();
    f.weak_vs_repump = f.ratio_weak_vs_repump >= ValidityFlags::threshold;

    const double rhs = species.beta_PS * lasers.omega_R * lasers.omega_R;
    f.ratio_pump_dominates = rhs > 0
                                 ? species.beta_PD * lasers.omega_B * lasers.omega_B / rhs
                                 : std::numeric_limits<double>::infinity();
    f.pump_dominates = f.ratio_pump_dominates >= ValidityFlags::threshold;
    return f;
}

LineEstimate analytic_linewidth(const LaserParams& lasers, const IonSpecies& species,
                                const DressedModel& dressed) {
    if (lasers.omega_R <= 0.0)
        throw std::invalid_argument("analytic_linewidth: Omega_R = 0, no dark line");

    LineEstimate est;
    est.validity = check_validity(lasers, species, dressed);

    const double gp = species.gamma_P;
    const double wr2 = lasers.omega_R * lasers.omega_R;
    const double under = 1.0 + (3.0 - dressed.gamma_Lambda / gp) * wr2 / (gp * gp * species.beta_PD) +
                         4.0 * lasers.delta_R * lasers.delta_R / (gp * gp);
    est.gamma_eff = wr2 / (gp * std::sqrt(under));
    est.signal_rate =
        gp * (est.gamma_eff * est.gamma_eff / wr2) * (species.beta_PS / species.beta_PD);
    est.center_offset = -dressed.light_shift;
    return est;
}

}  // namespace cptclock
