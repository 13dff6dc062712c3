#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cptclock/bloch.hpp"
#include "cptclock/dressed.hpp"
#include "cptclock/laser.hpp"
#include "cptclock/species.hpp"

namespace cptclock {

enum class ScanAxis { W, R, B };

// One detuning scan across the dark resonance. All values angular (s^-1).
struct ScanSpec {
    IonSpecies species;
    LaserParams lasers;  // base point; the scanned detuning is overwritten
    ScanAxis axis = ScanAxis::W;
    double scan_center = 0.0;
    double scan_span = 0.0;
    int n_points = 201;
    // Delta_R - Delta_B held during a W scan; applied by moving Delta_B.
    double two_photon_offset = 0.0;
    bool apply_two_photon_offset = false;

    void validate() const;  // n_points >= 11 and odd, span > 0
};

struct DipFit {
    double center = 0.0;
    double fwhm = 0.0;
    double contrast = 0.0;  // (background - minimum) / background
    double residual_rms = 0.0;
    double background = 0.0;
    double fwhm_half_depth = 0.0;  // model-free cross-check
};

struct ScanResult {
    std::vector<double> detunings;     // s^-1
    std::vector<double> fluorescence;  // photons/s per ion
    DipFit fit;
    bool fit_ok = false;
    std::string fit_message;
    ValidityFlags validity;
    LaserParams lasers_used;  // base point after two-photon offset handling
};

struct NoDipError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FitDivergedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One steady-state solve per detuning point, fluorescence_rate per point,
// then fit_dip. Points are independent; the parallel variant distributes
// them over OpenMP threads and assembles by index, so both variants return
// bit-identical results.
ScanResult scan_spectrum(const ScanSpec& spec);
ScanResult scan_spectrum_serial(const ScanSpec& spec);

// Inverted Lorentzian on a constant background, least squares
// (Levenberg-Marquardt). Throws NoDipError when contrast < 1e-6 and
// FitDivergedError with diagnostics when the fit fails.
DipFit fit_dip(const std::vector<double>& detunings, const std::vector<double>& fluorescence);

// sqrt(eta * n_ions * signal_rate / 2).
double signal_to_noise(double signal_rate, double eta, double n_ions);
// Uses the measured dip depth as the signal rate.
double signal_to_noise(const ScanResult& result, double eta, double n_ions);

// Two-column CSV (detuning_Hz, fluorescence_rate_per_ion) plus a JSON
// sidecar with fit metadata and validity flags.
void write_scan_csv(const ScanResult& result, const std::string& path);
void write_scan_sidecar(const ScanResult& result, const std::string& path);

}  // namespace cptclock
