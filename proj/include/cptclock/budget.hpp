#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cptclock/dressed.hpp"
#include "cptclock/laser.hpp"
#include "cptclock/species.hpp"

namespace cptclock {

struct TrapParams {
    double n_ions = 1.0;            // N_i
    double secular_freq_MHz = 0.1;  // nu_S
    double temperature_K = 300.0;
    double b_field_G = 0.0;         // applied quantization field
    double b_instability_G = 0.0;   // residual field instability after cancellation
    double grad_times_pi = 0.0;     // A*Pi, V/cm^2
    double eta = 1e-4;              // detection efficiency
    double cycle_time_s = 1.0;      // T_c
    double dc_field_Vpcm = 0.0;     // residual static field, V/cm

    void validate() const;
};

struct BudgetEntry {
    std::string name;
    double absolute_shift_Hz = 0.0;
    double fractional_shift = 0.0;  // absolute / f_QD, exact identity
    std::string note;
};

struct ClockBudget {
    std::string species_name;
    double f_QD = 0.0;
    std::vector<BudgetEntry> entries;  // ordered by |absolute|, descending
    double allan_coefficient = 0.0;    // sigma_y(1 s)
    double worst_case_total_Hz = 0.0;  // sum of |absolute|
    std::string header_note;
};

struct BeamGeometry {
    Eigen::Vector3d u_B, u_R, u_W;  // unit propagation directions
    double k_B = 0.0, k_R = 0.0, k_W = 0.0;  // 2*pi/lambda, m^-1
    double residual_dk = 0.0;  // |k_R u_R + k_W u_W - k_B u_B|, m^-1
};

struct PhaseMatchResult {
    bool feasible = false;
    BeamGeometry geometry;
    std::string violated_inequality;  // set when infeasible
};

// sigma_y = (Delta / omega_QD) * (1 / (S/N)) * sqrt(T_c / tau) with Delta
// the dark-line FWHM in angular units and omega_QD = 2*pi*f_QD.
double allan_deviation(double delta_fwhm, double f_QD, double s_over_n, double t_c, double tau);

// -3.0e-14 * (nu_S[MHz] * N_i / M[u])^(2/3), signed fractional shift.
double doppler2_shift(const TrapParams& trap, const IonSpecies& species);

// Per-state quadrupole shift [J(J+1)-3m^2]/[J(2J-1)] * Theta * A*Pi / h, Hz.
// J in {3/2, 5/2}, m half-integer with |m| <= J; theta in e*a0^2,
// grad_times_pi in V/cm^2.
double quadrupole_shift(double j, double m_j, double theta, double grad_times_pi);

// Clock-transition (m = +-1/2 -> +-1/2) quadrupole shift,
// (11/40) * Theta(5/2) * A*Pi / h.
double clock_quadrupole_shift(double theta_q52, double grad_times_pi);

struct ZeemanShift {
    double coeff_Hz_per_G = 0.0;          // |g_D52 - g_D32|/2 * mu_B/h
    double shift_per_transition_Hz = 0.0; // first-order shift of one +-1/2 transition
    double splitting_Hz = 0.0;            // between the +1/2 and -1/2 transitions
    double cancellation_residual_Hz = 0.0;
};

ZeemanShift zeeman_shift(double b_field_G, const IonSpecies& species,
                         double b_instability_G = 0.0);

// Blackbody + static Stark shift magnitude, Hz. Mean-squared blackbody
// field 831.9^2 (T/300)^4 (V/m)^2, coefficient in Hz per (V/cm)^2.
double bbr_stark_shift(double temperature_K, double dc_field_Vpcm,
                       double stark_coeff_Hz_per_V2cm2 = 1e-5);

// Dark-line pull alpha_W * Omega_W / 2 in Hz.
double probe_light_shift(const DressedModel& dressed);

// Declared bound on the off-resonant P_3/2 light shift: 0.1 Hz at
// Omega_R = 2*pi*1 MHz, scaling quadratically with Omega_R.
double offres_light_shift_bound(const LaserParams& lasers, const IonSpecies& species,
                                double bound_at_1MHz_Hz = 0.1);

// Closes the k_R + k_W = k_B wave-vector triangle in a plane, or reports
// which triangle inequality fails.
PhaseMatchResult phase_matching(const IonSpecies& species);

// First-order Doppler width |dk| * v_rms / (2*pi) after tilting the W beam
// by misalignment_rad, with the 1D thermal rms velocity at temperature_K.
double residual_doppler_width(const BeamGeometry& geometry, double misalignment_rad,
                              double temperature_K, const IonSpecies& species);

// Aggregates every shift plus the Allan coefficient into one report.
ClockBudget full_budget(const IonSpecies& species, const TrapParams& trap,
                        const LaserParams& lasers, const DressedModel& dressed);

std::string budget_to_text(const ClockBudget& budget);
std::string budget_to_json(const ClockBudget& budget);

}  // namespace cptclock
