#pragma once

namespace cptclock {

// The three laser couplings of the N scheme. All values angular (s^-1):
// omega_X is the full Rabi frequency Omega_X, delta_X the signed detuning
// of laser X from its transition, dephase_X the phase-diffusion rate.
struct LaserParams {
    double omega_B = 0.0;
    double omega_R = 0.0;
    double omega_W = 0.0;
    double delta_B = 0.0;
    double delta_R = 0.0;
    double delta_W = 0.0;
    double dephase_B = 0.0;
    double dephase_R = 0.0;
    double dephase_W = 0.0;

    void validate() const;  // throws std::invalid_argument
};

}  // namespace cptclock
