#include "cptclock/budget.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "cptclock/constants.hpp"

namespace cptclock {

void TrapParams::validate() const {
    if (n_ions < 1.0) throw std::invalid_argument("TrapParams: n_ions must be >= 1");
    if (secular_freq_MHz < 0.0)
        throw std::invalid_argument("TrapParams: secular_freq_MHz must be >= 0");
    if (temperature_K < 0.0) throw std::invalid_argument("TrapParams: temperature_K must be >= 0");
    if (!(eta > 0.0) || eta > 1.0) throw std::invalid_argument("TrapParams: eta must be in (0,1]");
    if (!(cycle_time_s > 0.0)) throw std::invalid_argument("TrapParams: cycle_time_s must be > 0");
    if (b_field_G < 0.0 || b_instability_G < 0.0)
        throw std::invalid_argument("TrapParams: magnetic field values must be >= 0");
}

double allan_deviation(double delta_fwhm, double f_QD, double s_over_n, double t_c, double tau) {
    if (!(delta_fwhm > 0) || !(f_QD > 0) || !(s_over_n > 0) || !(t_c > 0) || !(tau > 0))
        throw std::invalid_argument("allan_deviation: all inputs must be > 0");
    return delta_fwhm / (two_pi * f_QD) / s_over_n * std::sqrt(t_c / tau);
}

double doppler2_shift(const TrapParams& trap, const IonSpecies& species) {
    trap.validate();
    return -3.0e-14 * std::pow(trap.secular_freq_MHz * trap.n_ions / species.mass_u, 2.0 / 3.0);
}

namespace {

// e*a0^2 -> C m^2 and V/cm^2 -> V/m^2.
constexpr double e_a0_sq =
    1.602176634e-19 * 5.29177210903e-11 * 5.29177210903e-11;
constexpr double vpcm2_to_vpm2 = 1.0e4;

void check_jm(double j, double m_j) {
    const bool j_ok = j == 1.5 || j == 2.5;
    const double twice_m = 2.0 * m_j;
    const bool m_half_integer =
        std::abs(twice_m - std::round(twice_m)) < 1e-12 &&
        std::abs(std::fmod(std::round(twice_m), 2.0)) == 1.0;
    if (!j_ok || !m_half_integer || std::abs(m_j) > j)
        throw std::invalid_argument("quadrupole_shift: invalid (J, m_J)");
}

}  // namespace

double quadrupole_shift(double j, double m_j, double theta, double grad_times_pi) {
    check_jm(j, m_j);
    const double coeff = (j * (j + 1.0) - 3.0 * m_j * m_j) / (j * (2.0 * j - 1.0));
    return coeff * theta * e_a0_sq * grad_times_pi * vpcm2_to_vpm2 / codata.h;
}

double clock_quadrupole_shift(double theta_q52, double grad_times_pi) {
    return (11.0 / 40.0) * theta_q52 * e_a0_sq * grad_times_pi * vpcm2_to_vpm2 / codata.h;
}

ZeemanShift zeeman_shift(double b_field_G, const IonSpecies& species, double b_instability_G) {
    if (b_field_G < 0.0 || b_instability_G < 0.0)
        throw std::invalid_argument("zeeman_shift: field values must be >= 0");
    ZeemanShift z;
    // (+-1/2 -> +-1/2) pair: shift = +-(g_D52 - g_D32)/2 * mu_B * B / h.
    z.coeff_Hz_per_G =
        0.5 * std::abs(species.g_D52 - species.g_D32) * codata.bohr_magneton / codata.h * 1e-4;
    z.shift_per_transition_Hz = z.coeff_Hz_per_G * b_field_G;
    z.splitting_Hz = 2.0 * z.shift_per_transition_Hz;
    z.cancellation_residual_Hz = z.coeff_Hz_per_G * b_instability_G;
    return z;
}

double bbr_stark_shift(double temperature_K, double dc_field_Vpcm,
                       double stark_coeff_Hz_per_V2cm2) {
    if (temperature_K < 0.0) throw std::invalid_argument("bbr_stark_shift: T must be >= 0");
    const double t_ratio = temperature_K / 300.0;
    const double e2_bb_vpm2 = 831.9 * 831.9 * t_ratio * t_ratio * t_ratio * t_ratio;
    const double e2_bb_vpcm2 = e2_bb_vpm2 / 1.0e4;
    return stark_coeff_Hz_per_V2cm2 * (e2_bb_vpcm2 + dc_field_Vpcm * dc_field_Vpcm);
}

double probe_light_shift(const DressedModel& dressed) {
    return angular_to_hz(dressed.light_shift);
}

double offres_light_shift_bound(const LaserParams& lasers, const IonSpecies& species,
                                double bound_at_1MHz_Hz) {
    (void)species;  // per-species bound values may differ; default covers the worst case (Ca+)
    const double ratio = lasers.omega_R / hz_to_angular(1.0e6);
    return bound_at_1MHz_Hz * ratio * ratio;
}

PhaseMatchResult phase_matching(const IonSpecies& species) {
    species.validate();
    PhaseMatchResult res;
    BeamGeometry& g = res.geometry;
    g.k_B = two_pi / species.lambda_B;
    g.k_R = two_pi / species.lambda_R;
    g.k_W = two_pi / species.lambda_W;

    if (g.k_B > g.k_R + g.k_W) {
        res.violated_inequality = "k_B > k_R + k_W";
        return res;
    }
    if (g.k_R > g.k_B + g.k_W) {
        res.violated_inequality = "k_R > k_B + k_W";
        return res;
    }
    if (g.k_W > g.k_B + g.k_R) {
        res.violated_inequality = "k_W > k_B + k_R";
        return res;
    }

    // Close the triangle k_R + k_W = k_B in the xy plane, B along x.
    g.u_B = Eigen::Vector3d::UnitX();
    const double cos_r =
        std::clamp((g.k_B * g.k_B + g.k_R * g.k_R - g.k_W * g.k_W) / (2.0 * g.k_B * g.k_R), -1.0,
                   1.0);
    const double sin_r = std::sqrt(std::max(0.0, 1.0 - cos_r * cos_r));
    g.u_R = Eigen::Vector3d(cos_r, sin_r, 0.0);
    const Eigen::Vector3d w_vec = g.k_B * g.u_B - g.k_R * g.u_R;
    g.u_W = w_vec.norm() > 0 ? w_vec.normalized() : Eigen::Vector3d::UnitX();
    g.residual_dk = (g.k_R * g.u_R + g.k_W * g.u_W - g.k_B * g.u_B).norm();
    res.feasible = true;
    return res;
}

double residual_doppler_width(const BeamGeometry& geometry, double misalignment_rad,
                              double temperature_K, const IonSpecies& species) {
    const double c = std::cos(misalignment_rad), s = std::sin(misalignment_rad);
    Eigen::Vector3d u_w(c * geometry.u_W.x() - s * geometry.u_W.y(),
                        s * geometry.u_W.x() + c * geometry.u_W.y(), geometry.u_W.z());
    const Eigen::Vector3d dk =
        geometry.k_R * geometry.u_R + geometry.k_W * u_w - geometry.k_B * geometry.u_B;
    const double v_rms =
        std::sqrt(codata.boltzmann * temperature_K / (species.mass_u * codata.atomic_mass_unit));
    return dk.norm() * v_rms / two_pi;
}

ClockBudget full_budget(const IonSpecies& species, const TrapParams& trap,
                        const LaserParams& lasers, const DressedModel& dressed) {
    species.validate();
    trap.validate();
    lasers.validate();

    ClockBudget budget;
    budget.species_name = species.name;
    budget.f_QD = species.f_QD;
    budget.header_note =
        "Allan coefficient uses the dark-line FWHM as the servo discriminator width; "
        "shifts are per-ion worst cases; fractional = absolute / f_QD";

    auto add = [&](std::string name, double abs_hz, std::string note) {
        budget.entries.push_back(
            {std::move(name), abs_hz, abs_hz / species.f_QD, std::move(note)});
    };

    add("second-order Doppler", doppler2_shift(trap, species) * species.f_QD,
        "-3.0e-14 (nu_S N_i / M)^(2/3), micromotion of the trapped cloud");
    add("electric quadrupole",
        clock_quadrupole_shift(species.theta_Q52, trap.grad_times_pi),
        "(11/40) Theta(5/2) A*Pi / h on the m=+-1/2 pair");
    const ZeemanShift z = zeeman_shift(trap.b_field_G, species, trap.b_instability_G);
    add("first-order Zeeman residual", z.cancellation_residual_Hz,
        "after pair cancellation; coefficient " + std::to_string(z.coeff_Hz_per_G / 1e6) +
            " MHz/G times the field instability");
    add("second-order Zeeman", 0.0, "negligible here");
    add("blackbody + DC Stark",
        bbr_stark_shift(trap.temperature_K, trap.dc_field_Vpcm),
        "1e-5 Hz per (V/cm)^2 on <E^2>_BB + E_dc^2");
    add("probe light shift", probe_light_shift(dressed), "alpha_W Omega_W / 2 dark-line pull");
    add("off-resonant light shift (bound)", offres_light_shift_bound(lasers, species),
        "declared bound, quadratic in Omega_R, 0.1 Hz at Omega_R = 2pi*1 MHz");

    std::stable_sort(budget.entries.begin(), budget.entries.end(),
                     [](const BudgetEntry& a, const BudgetEntry& b) {
                         return std::abs(a.absolute_shift_Hz) > std::abs(b.absolute_shift_Hz);
                     });
    for (const auto& e : budget.entries) budget.worst_case_total_Hz += std::abs(e.absolute_shift_Hz);

    if (lasers.omega_R > 0.0) {
        const LineEstimate line = analytic_linewidth(lasers, species, dressed);
        const double sn =
            std::sqrt(trap.eta * trap.n_ions * line.signal_rate / 2.0);
        if (sn > 0.0)
            budget.allan_coefficient =
                allan_deviation(line.gamma_eff, species.f_QD, sn, trap.cycle_time_s, 1.0);
    }
    return budget;
}

std::string budget_to_text(const ClockBudget& budget) {
    std::ostringstream out;
    out << "Clock budget for " << budget.species_name << " (f_QD = " << budget.f_QD / 1e12
        << " THz)\n";
    out << "# " << budget.header_note << "\n";
    out << std::left << std::setw(36) << "effect" << std::right << std::setw(14) << "shift [Hz]"
        << std::setw(14) << "fractional" << "  note\n";
    for (const auto& e : budget.entries) {
        out << std::left << std::setw(36) << e.name << std::right << std::setw(14)
            << std::setprecision(3) << std::scientific << e.absolute_shift_Hz << std::setw(14)
            << e.fractional_shift << "  " << e.note << "\n";
    }
    out << std::left << std::setw(36) << "worst-case total" << std::right << std::setw(14)
        << budget.worst_case_total_Hz << "\n";
    out << "sigma_y(1 s) = " << budget.allan_coefficient << "\n";
    return out.str();
}

std::string budget_to_json(const ClockBudget& budget) {
    nlohmann::json j;
    j["species"] = budget.species_name;
    j["f_QD_Hz"] = budget.f_QD;
    j["header_note"] = budget.header_note;
    j["allan_coefficient_1s"] = budget.allan_coefficient;
    j["worst_case_total_Hz"] = budget.worst_case_total_Hz;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : budget.entries)
        j["entries"].push_back({{"name", e.name},
                                {"absolute_shift_Hz", e.absolute_shift_Hz},
                                {"fractional_shift", e.fractional_shift},
                                {"note", e.note}});
    return j.dump(2);
}

}  // namespace cptclock
