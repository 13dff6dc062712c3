#include "cptclock/spectroscopy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cptclock/constants.hpp"

namespace cptclock {

void ScanSpec::validate() const {
    species.validate();
    lasers.validate();
    if (n_points < 11 || n_points % 2 == 0)
        throw std::invalid_argument("ScanSpec: n_points must be odd and >= 11");
    if (!(scan_span > 0)) throw std::invalid_argument("ScanSpec: scan_span must be > 0");
}

namespace {

double solve_point(const IonSpecies& species, LaserParams lasers, ScanAxis axis, double detuning) {
    switch (axis) {
        case ScanAxis::W: lasers.delta_W = detuning; break;
        case ScanAxis::R: lasers.delta_R = detuning; break;
        case ScanAxis::B: lasers.delta_B = detuning; break;
    }
    const Matrix4c h = build_hamiltonian(lasers);
    const Liouvillian l = build_liouvillian(h, species, lasers);
    return fluorescence_rate(steady_state(l), species);
}

ScanResult run_scan(const ScanSpec& spec, bool parallel) {
    spec.validate();

    LaserParams base = spec.lasers;
    if (spec.apply_two_photon_offset && spec.axis == ScanAxis::W)
        base.delta_B = base.delta_R - spec.two_photon_offset;

    ScanResult result;
    result.lasers_used = base;
    result.detunings.resize(spec.n_points);
    result.fluorescence.resize(spec.n_points);
    const double x0 = spec.scan_center - spec.scan_span / 2.0;
    const double dx = spec.scan_span / (spec.n_points - 1);
    for (int i = 0; i < spec.n_points; ++i) result.detunings[i] = x0 + i * dx;

    std::vector<std::string> errors(spec.n_points);

#pragma omp parallel for schedule(static) if (parallel)
    for (int i = 0; i < spec.n_points; ++i) {
        try {
            result.fluorescence[i] = solve_point(spec.species, base, spec.axis, result.detunings[i]);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (int i = 0; i < spec.n_points; ++i) {
        if (!errors[i].empty()) {
            std::ostringstream msg;
            msg << "scan_spectrum: solver failed at detuning " << result.detunings[i]
                << " s^-1: " << errors[i];
            throw std::runtime_error(msg.str());
        }
    }

    try {
        result.fit = fit_dip(result.detunings, result.fluorescence);
        result.fit_ok = true;
    } catch (const std::exception& e) {
        result.fit_message = e.what();
    }

    if (base.omega_W > 0.0 && base.delta_W != 0.0) {
        LaserParams at_center = base;
        at_center.delta_W = spec.scan_center != 0.0 ? spec.scan_center : base.delta_W;
        result.validity =
            check_validity(at_center, spec.species, make_dressed(at_center, spec.species));
    }
    return result;
}

}  // namespace

ScanResult scan_spectrum(const ScanSpec& spec) { return run_scan(spec, true); }
ScanResult scan_spectrum_serial(const ScanSpec& spec) { return run_scan(spec, false); }

namespace {

struct LorentzianParams {
    double background, depth, center, width;  // width = FWHM
};

double lorentzian_dip(const LorentzianParams& p, double x) {
    const double u = 2.0 * (x - p.center) / p.width;
    return p.background - p.depth / (1.0 + u * u);
}

}  // namespace

DipFit fit_dip(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 11)
        throw std::invalid_argument("fit_dip: need >= 11 matched points");
    const int n = static_cast<int>(xs.size());

    // Background from the outer 20% of points.
    const int n_edge = std::max(1, n / 10);
    double background = 0.0;
    for (int i = 0; i < n_edge; ++i) background += ys[i] + ys[n - 1 - i];
    background /= 2.0 * n_edge;

    const auto it_min = std::min_element(ys.begin(), ys.end());
    const int i_min = static_cast<int>(it_min - ys.begin());
    const double depth0 = background - *it_min;
    const double contrast0 = background > 0 ? depth0 / background : 0.0;
    if (contrast0 < 1e-6) throw NoDipError("fit_dip: no dip (contrast below 1e-6)");

    // Model-free FWHM from linear interpolation at half depth.
    const double half = background - depth0 / 2.0;
    double x_lo = xs.front(), x_hi = xs.back();
    for (int i = i_min; i > 0; --i) {
        if (ys[i - 1] >= half && ys[i] < half) {
            const double f = (half - ys[i]) / (ys[i - 1] - ys[i]);
            x_lo = xs[i] + f * (xs[i - 1] - xs[i]);
            break;
        }
    }
    for (int i = i_min; i < n - 1; ++i) {
        if (ys[i + 1] >= half && ys[i] < half) {
            const double f = (half - ys[i]) / (ys[i + 1] - ys[i]);
            x_hi = xs[i] + f * (xs[i + 1] - xs[i]);
            break;
        }
    }
    const double fwhm_interp = std::max(x_hi - x_lo, (xs[1] - xs[0]) * 0.5);

    // Levenberg-Marquardt on (background, depth, center, width).
    LorentzianParams p{background, depth0, xs[i_min], fwhm_interp};
    const double yscale = std::max(background, 1e-300);

    auto cost = [&](const LorentzianParams& q) {
        double c = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = (lorentzian_dip(q, xs[i]) - ys[i]) / yscale;
            c += r * r;
        }
        return c;
    };

    double lambda = 1e-3;
    double last_cost = cost(p);
    bool converged = false;
    for (int iter = 0; iter < 200 && !converged; ++iter) {
        Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
        Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
        for (int i = 0; i < n; ++i) {
            const double u = 2.0 * (xs[i] - p.center) / p.width;
            const double den = 1.0 + u * u;
            const double r = (lorentzian_dip(p, xs[i]) - ys[i]) / yscale;
            Eigen::Vector4d j;
            j(0) = 1.0 / yscale;                                           // d/d background
            j(1) = -1.0 / (den * yscale);                                  // d/d depth
            j(2) = -p.depth * 2.0 * u * (2.0 / p.width) / (den * den * yscale);   // d/d center
            j(3) = -p.depth * 2.0 * u * u / (p.width * den * den * yscale);       // d/d width
            jtj += j * j.transpose();
            jtr += j * r;
        }
        Eigen::Matrix4d damped = jtj;
        damped.diagonal() += lambda * jtj.diagonal();
        const Eigen::Vector4d step = damped.ldlt().solve(-jtr);
        if (!step.allFinite()) {
            throw FitDivergedError("fit_dip: fit diverged (non-finite LM step)");
        }
        LorentzianParams trial{p.background + step(0), p.depth + step(1), p.center + step(2),
                               p.width + step(3)};
        if (trial.width <= 0 || trial.depth <= 0) {
            lambda *= 10;
            if (lambda > 1e12) throw FitDivergedError("fit_dip: fit diverged (damping blow-up)");
            continue;
        }
        const double c = cost(trial);
        if (c <= last_cost) {
            const double rel = (last_cost - c) / std::max(last_cost, 1e-300);
            p = trial;
            last_cost = c;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel < 1e-14 && step.cwiseAbs().maxCoeff() <
                                   1e-10 * std::max({std::abs(p.width), std::abs(p.center), 1e-300}))
                converged = true;
        } else {
            lambda *= 10;
            if (lambda > 1e12) break;  // stuck at a (good enough) minimum
        }
    }

    DipFit fit;
    fit.center = p.center;
    fit.fwhm = p.width;
    fit.background = p.background;
    fit.contrast = p.background > 0 ? std::clamp(p.depth / p.background, 0.0, 1.0) : 0.0;
    fit.residual_rms = std::sqrt(last_cost / n) * yscale;
    fit.fwhm_half_depth = fwhm_interp;
    if (!(fit.fwhm > 0) || !std::isfinite(fit.center)) {
        std::ostringstream msg;
        msg << "fit_dip: fit diverged (center=" << fit.center << ", fwhm=" << fit.fwhm << ")";
        throw FitDivergedError(msg.str());
    }
    return fit;
}

double signal_to_noise(double signal_rate, double eta, double n_ions) {
    if (!(eta > 0.0) || eta > 1.0) throw std::invalid_argument("signal_to_noise: eta must be in (0,1]");
    if (n_ions < 1.0) throw std::invalid_argument("signal_to_noise: n_ions must be >= 1");
    if (signal_rate < 0.0) throw std::invalid_argument("signal_to_noise: signal_rate must be >= 0");
    return std::sqrt(eta * n_ions * signal_rate / 2.0);
}

double signal_to_noise(const ScanResult& result, double eta, double n_ions) {
    if (!result.fit_ok) throw std::invalid_argument("signal_to_noise: scan has no fitted dip");
    return signal_to_noise(result.fit.background * result.fit.contrast, eta, n_ions);
}

void write_scan_csv(const ScanResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "detuning_Hz,fluorescence_rate_per_ion\n";
    out.precision(12);
    for (size_t i = 0; i < result.detunings.size(); ++i)
        out << result.detunings[i] / two_pi << ',' << result.fluorescence[i] << '\n';
}

void write_scan_sidecar(const ScanResult& result, const std::string& path) {
    nlohmann::json j;
    j["fit_ok"] = result.fit_ok;
    if (result.fit_ok) {
        j["fit"] = {
            {"center_Hz", result.fit.center / two_pi},
            {"fwhm_Hz", result.fit.fwhm / two_pi},
            {"fwhm_half_depth_Hz", result.fit.fwhm_half_depth / two_pi},
            {"contrast", result.fit.contrast},
            {"background_rate", result.fit.background},
            {"residual_rms", result.fit.residual_rms},
        };
    } else {
        j["fit_error"] = result.fit_message;
    }
    j["contrast_definition"] = "(background - minimum) / background";
    j["validity"] = {
        {"alpha_sq_small", result.validity.alpha_sq_small},
        {"weak_vs_repump", result.validity.weak_vs_repump},
        {"pump_dominates", result.validity.pump_dominates},
        {"threshold_ratio", ValidityFlags::threshold},
    };
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace cptclock
