// cptclock: simulator and systematics calculator for a three-photon CPT
// frequency standard on trapped ions. Subcommands: species, scan, budget,
// phase-match. All user-facing numbers are in Hz; conversion to angular
// units happens at config parse time.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cptclock/budget.hpp"
#include "cptclock/constants.hpp"
#include "cptclock/spectroscopy.hpp"

using nlohmann::json;
using namespace cptclock;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitReproMiss = 4;
constexpr int kExitInfeasible = 5;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string species_name = "Ca+";
    LaserParams lasers;  // angular after parse
    TrapParams trap;
    bool trap_defaulted = true;
    ScanAxis axis = ScanAxis::W;
    double scan_center = 0.0;  // angular
    double scan_span = 0.0;
    int scan_points = 201;
    double two_photon_offset = 0.0;
    bool apply_two_photon_offset = false;
    std::string out_csv = "scan.csv";
    std::string out_sidecar;
};

double get_num(const json& block, const std::string& path, const std::string& key,
               double fallback) {
    if (!block.contains(key)) return fallback;
    if (!block.at(key).is_number())
        throw ConfigError("config: " + path + "." + key + ": expected a number");
    return block.at(key).get<double>();
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }

    RunConfig cfg;
    if (j.contains("species")) {
        if (!j.at("species").is_string())
            throw ConfigError("config: species: expected a string");
        cfg.species_name = j.at("species").get<std::string>();
    }

    if (j.contains("lasers")) {
        const json& l = j.at("lasers");
        cfg.lasers.omega_B = hz_to_angular(get_num(l, "lasers", "rabi_B_Hz", 0.0));
        cfg.lasers.omega_R = hz_to_angular(get_num(l, "lasers", "rabi_R_Hz", 0.0));
        cfg.lasers.omega_W = hz_to_angular(get_num(l, "lasers", "rabi_W_Hz", 0.0));
        cfg.lasers.delta_B = hz_to_angular(get_num(l, "lasers", "detuning_B_Hz", 0.0));
        cfg.lasers.delta_R = hz_to_angular(get_num(l, "lasers", "detuning_R_Hz", 0.0));
        cfg.lasers.delta_W = hz_to_angular(get_num(l, "lasers", "detuning_W_Hz", 0.0));
        cfg.lasers.dephase_B = hz_to_angular(get_num(l, "lasers", "dephasing_B_Hz", 0.0));
        cfg.lasers.dephase_R = hz_to_angular(get_num(l, "lasers", "dephasing_R_Hz", 0.0));
        cfg.lasers.dephase_W = hz_to_angular(get_num(l, "lasers", "dephasing_W_Hz", 0.0));
    }

    if (j.contains("trap")) {
        const json& t = j.at("trap");
        cfg.trap_defaulted = t.empty();
        TrapParams d;  // documented defaults
        cfg.trap.n_ions = get_num(t, "trap", "n_ions", d.n_ions);
        cfg.trap.secular_freq_MHz = get_num(t, "trap", "secular_freq_MHz", d.secular_freq_MHz);
        cfg.trap.temperature_K = get_num(t, "trap", "temperature_K", d.temperature_K);
        cfg.trap.b_field_G = get_num(t, "trap", "b_field_G", d.b_field_G);
        cfg.trap.b_instability_G = get_num(t, "trap", "b_instability_G", d.b_instability_G);
        cfg.trap.grad_times_pi = get_num(t, "trap", "grad_times_pi_Vpcm2", d.grad_times_pi);
        cfg.trap.eta = get_num(t, "trap", "eta", d.eta);
        cfg.trap.cycle_time_s = get_num(t, "trap", "cycle_time_s", d.cycle_time_s);
        cfg.trap.dc_field_Vpcm = get_num(t, "trap", "dc_field_Vpcm", d.dc_field_Vpcm);
    }

    if (j.contains("scan")) {
        const json& s = j.at("scan");
        if (s.contains("axis")) {
            const std::string a = s.at("axis").get<std::string>();
            if (a == "W" || a == "w")
                cfg.axis = ScanAxis::W;
            else if (a == "R" || a == "r")
                cfg.axis = ScanAxis::R;
            else if (a == "B" || a == "b")
                cfg.axis = ScanAxis::B;
            else
                throw ConfigError("config: scan.axis: expected one of W, R, B");
        }
        cfg.scan_center = hz_to_angular(get_num(s, "scan", "center_Hz", 0.0));
        cfg.scan_span = hz_to_angular(get_num(s, "scan", "span_Hz", 0.0));
        cfg.scan_points = static_cast<int>(get_num(s, "scan", "points", 201));
        if (s.contains("two_photon_offset_Hz")) {
            cfg.two_photon_offset =
                hz_to_angular(get_num(s, "scan", "two_photon_offset_Hz", 0.0));
            cfg.apply_two_photon_offset = true;
        }
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        if (o.contains("csv")) cfg.out_csv = o.at("csv").get<std::string>();
        if (o.contains("sidecar")) cfg.out_sidecar = o.at("sidecar").get<std::string>();
    }

    try {
        cfg.lasers.validate();
        cfg.trap.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

std::string sidecar_path(const RunConfig& cfg) {
    if (!cfg.out_sidecar.empty()) return cfg.out_sidecar;
    const std::string& p = cfg.out_csv;
    if (p.size() > 4 && p.substr(p.size() - 4) == ".csv")
        return p.substr(0, p.size() - 4) + ".fit.json";
    return p + ".fit.json";
}

json species_record(const IonSpecies& s) {
    return {
        {"name", s.name},           {"mass_u", s.mass_u},
        {"lambda_B", s.lambda_B},   {"lambda_R", s.lambda_R},
        {"lambda_W", s.lambda_W},   {"f_QD", s.f_QD},
        {"gamma_P", s.gamma_P},     {"beta_PS", s.beta_PS},
        {"beta_PD", s.beta_PD},     {"theta_Q52", s.theta_Q52},
        {"g_D32", s.g_D32},         {"g_D52", s.g_D52},
        {"source_note", s.source_note}, {"caveat", s.caveat},
    };
}

int cmd_species(const std::string& filter, const std::string& format) {
    std::vector<IonSpecies> rows;
    if (filter.empty()) {
        rows = builtin_species();
    } else {
        rows.push_back(find_species(filter));
    }

    if (format == "json") {
        json recs = json::array();
        for (const auto& s : rows) recs.push_back(species_record(s));
        std::cout << json{{"species", recs}}.dump(2) << "\n";
        return kExitOk;
    }

    std::cout << std::left << std::setw(6) << "ion" << std::setw(9) << "B" << std::setw(10)
              << "R" << std::setw(9) << "W" << std::setw(11) << "f_QD" << std::setw(12)
              << "gamma_P" << std::setw(9) << "beta_PD" << std::setw(7) << "Theta"
              << "g(D3/2) g(D5/2)\n";
    for (const auto& s : rows) {
        std::ostringstream fq;
        const double thz = s.f_QD / 1e12;
        if (thz == std::round(thz))
            fq << std::fixed << std::setprecision(1) << thz << " THz";
        else
            fq << thz << " THz";
        auto nm = [](double m) {
            std::ostringstream o;
            if (m >= 2e-6)
                o << m * 1e6 << " um";
            else
                o << m * 1e9 << " nm";
            return o.str();
        };
        std::cout << std::left << std::setw(6) << s.name << std::setw(9) << nm(s.lambda_B)
                  << std::setw(10) << nm(s.lambda_R) << std::setw(9) << nm(s.lambda_W)
                  << std::setw(11) << fq.str() << std::setw(12) << s.gamma_P << std::setw(9)
                  << s.beta_PD << std::setw(7) << s.theta_Q52 << s.g_D32 << "     " << s.g_D52
                  << "\n";
    }
    for (const auto& s : rows) {
        std::cout << "# " << s.name << ": " << s.source_note << "\n";
        if (!s.caveat.empty()) std::cout << "# " << s.name << " caveat: " << s.caveat << "\n";
    }
    return kExitOk;
}

int cmd_scan(const RunConfig& cfg, const std::string& format, int points_override,
             const std::string& out_override) {
    ScanSpec spec;
    spec.species = find_species(cfg.species_name);
    spec.lasers = cfg.lasers;
    spec.axis = cfg.axis;
    spec.scan_center = cfg.scan_center;
    spec.scan_span = cfg.scan_span;
    spec.n_points = points_override > 0 ? points_override : cfg.scan_points;
    spec.two_photon_offset = cfg.two_photon_offset;
    spec.apply_two_photon_offset = cfg.apply_two_photon_offset;
    try {
        spec.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: scan: ") + e.what());
    }

    const ScanResult res = scan_spectrum(spec);

    RunConfig out_cfg = cfg;
    if (!out_override.empty()) out_cfg.out_csv = out_override;
    write_scan_csv(res, out_cfg.out_csv);
    write_scan_sidecar(res, sidecar_path(out_cfg));

    if (!res.fit_ok) {
        std::cerr << "scan: fit failed: " << res.fit_message << "\n";
        return kExitSolver;
    }

    // Analytic prediction at the scan center for the side-by-side report.
    LaserParams at_center = res.lasers_used;
    if (spec.axis == ScanAxis::W) at_center.delta_W = spec.scan_center;
    if (spec.axis == ScanAxis::R) at_center.delta_R = spec.scan_center;
    if (spec.axis == ScanAxis::B) at_center.delta_B = spec.scan_center;
    const DressedModel dm = make_dressed(at_center, spec.species);
    const LineEstimate est = analytic_linewidth(at_center, spec.species, dm);
    // Predicted dip position on the scanned axis (W axis: light-shifted
    // three-photon resonance).
    double predicted_center = spec.scan_center;
    if (spec.axis == ScanAxis::W)
        predicted_center =
            res.lasers_used.delta_B - res.lasers_used.delta_R - dm.light_shift;

    const double fwhm_dev = 100.0 * (res.fit.fwhm - est.gamma_eff) / est.gamma_eff;
    const double center_dev_of_shift =
        dm.light_shift != 0.0
            ? 100.0 * (res.fit.center - predicted_center) / std::abs(dm.light_shift)
            : 0.0;

    if (format == "json") {
        json out = {
            {"species", spec.species.name},
            {"csv", out_cfg.out_csv},
            {"sidecar", sidecar_path(out_cfg)},
            {"fit",
             {{"center_Hz", angular_to_hz(res.fit.center)},
              {"fwhm_Hz", angular_to_hz(res.fit.fwhm)},
              {"contrast", res.fit.contrast},
              {"background_rate", res.fit.background}}},
            {"analytic",
             {{"fwhm_Hz", angular_to_hz(est.gamma_eff)},
              {"center_Hz", angular_to_hz(predicted_center)},
              {"signal_rate", est.signal_rate},
              {"fwhm_deviation_percent", fwhm_dev},
              {"center_deviation_percent_of_shift", center_dev_of_shift}}},
            {"validity",
             {{"alpha_sq_small", res.validity.alpha_sq_small},
              {"weak_vs_repump", res.validity.weak_vs_repump},
              {"pump_dominates", res.validity.pump_dominates}}},
        };
        std::cout << out.dump(2) << "\n";
        return kExitOk;
    }

    std::cout << "scan of " << spec.species.name << " (" << spec.n_points << " points)\n";
    std::cout << std::left << std::setw(22) << "" << std::setw(16) << "fitted"
              << std::setw(16) << "analytic" << "deviation\n";
    auto row = [](const std::string& name, double a, double b, double dev,
                  const std::string& unit) {
        std::cout << std::left << std::setw(22) << name << std::setw(16) << a << std::setw(16)
                  << b << std::setprecision(3) << dev << "% " << unit << "\n"
                  << std::setprecision(6);
    };
    std::cout << std::setprecision(6);
    row("FWHM [Hz]", angular_to_hz(res.fit.fwhm), angular_to_hz(est.gamma_eff), fwhm_dev, "");
    row("center [Hz]", angular_to_hz(res.fit.center), angular_to_hz(predicted_center),
        center_dev_of_shift, "(of the light shift)");
    std::cout << "contrast " << res.fit.contrast << ", background " << res.fit.background
              << " photons/s per ion\n";
    std::cout << "validity flags: alpha^2 " << (res.validity.alpha_sq_small ? "ok" : "WARN")
              << ", weak-vs-repump " << (res.validity.weak_vs_repump ? "ok" : "WARN")
              << ", pump-dominates " << (res.validity.pump_dominates ? "ok" : "WARN") << "\n";
    std::cout << "wrote " << out_cfg.out_csv << " and " << sidecar_path(out_cfg) << "\n";
    return kExitOk;
}

// Omega_R that power-broadens the dark line to the requested FWHM.
double omega_r_for_linewidth(const IonSpecies& species, double gamma_eff_target) {
    LaserParams l;  // only omega_R and delta_R enter the closed form
    const DressedModel dm = make_dressed(l, species);
    double lo = 1e-3, hi = species.gamma_P;
    for (int i = 0; i < 200; ++i) {
        const double mid = std::sqrt(lo * hi);
        l.omega_R = mid;
        if (analytic_linewidth(l, species, dm).gamma_eff < gamma_eff_target)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(lo * hi);
}

struct ReproCheck {
    std::string name;
    double got, expected, tolerance;  // relative tolerance
    bool pass() const { return std::abs(got - expected) <= tolerance * std::abs(expected); }
};

// The published stability scenario: dark line at 10 Hz FWHM, eta = 1e-4,
// N_i = 1e5, T_c = tau = 1 s.
double scenario_sigma_y(const IonSpecies& species) {
    const double gamma_eff = hz_to_angular(10.0);
    LaserParams l;
    l.omega_R = omega_r_for_linewidth(species, gamma_eff);
    const DressedModel dm = make_dressed(LaserParams{}, species);
    const LineEstimate est = analytic_linewidth(l, species, dm);
    const double sn = signal_to_noise(est.signal_rate, 1e-4, 1e5);
    return allan_deviation(est.gamma_eff, species.f_QD, sn, 1.0, 1.0);
}

std::vector<ReproCheck> repro_checks(const std::string& species_name) {
    const IonSpecies& s = find_species(species_name);
    std::vector<ReproCheck> checks;
    if (s.name == "Ca+") {
        checks.push_back({"Ca+ sigma_y(1 s)", scenario_sigma_y(s), 8e-14, 0.25});
        TrapParams trap;
        trap.n_ions = 1e5;
        trap.secular_freq_MHz = 0.1;
        checks.push_back(
            {"Ca+ second-order Doppler (fractional)", doppler2_shift(trap, s), -1.2e-12, 0.05});
    } else if (s.name == "Sr+") {
        checks.push_back({"Sr+ sigma_y(1 s)", scenario_sigma_y(s), 2e-14, 0.25});
    } else if (s.name == "Ba+") {
        checks.push_back({"Ba+ sigma_y(1 s)", scenario_sigma_y(s), 1e-14, 0.25});
    }
    return checks;  // no published anchors for Hg+
}

int cmd_budget(const std::optional<RunConfig>& cfg, const std::string& format,
               bool do_repro, const std::string& repro_species) {
    if (do_repro) {
        std::vector<std::string> names;
        if (repro_species.empty())
            for (const auto& s : builtin_species()) names.push_back(s.name);
        else
            names.push_back(repro_species);

        int misses = 0;
        std::string first_miss;
        for (const auto& n : names) {
            const auto checks = repro_checks(n);
            if (checks.empty()) {
                std::cout << find_species(n).name << ": no published anchors, skipped\n";
                continue;
            }
            for (const auto& c : checks) {
                const bool ok = c.pass();
                std::cout << (ok ? "PASS " : "MISS ") << c.name << ": got " << c.got
                          << ", expected " << c.expected << " within "
                          << c.tolerance * 100 << "%\n";
                if (!ok) {
                    ++misses;
                    if (first_miss.empty()) first_miss = c.name;
                }
            }
        }
        if (misses > 0) {
            std::cerr << "paper-repro: " << misses << " anchor(s) missed, first: " << first_miss
                      << "\n";
            return kExitReproMiss;
        }
        return kExitOk;
    }

    if (!cfg) throw ConfigError("budget: --config is required (or use --paper-repro)");
    const IonSpecies& species = find_species(cfg->species_name);
    const DressedModel dm = make_dressed(cfg->lasers, species);
    ClockBudget budget = full_budget(species, cfg->trap, cfg->lasers, dm);
    if (cfg->trap_defaulted)
        budget.header_note += "; trap block empty, documented defaults applied";

    if (format == "json")
        std::cout << budget_to_json(budget) << "\n";
    else
        std::cout << budget_to_text(budget);
    return kExitOk;
}

int cmd_phase_match(const std::string& species_name, double misalignment_mrad,
                    double temperature_K, const std::string& format) {
    const IonSpecies& species = find_species(species_name);
    const PhaseMatchResult res = phase_matching(species);
    if (!res.feasible) {
        if (format == "json") {
            std::cout << json{{"species", species.name},
                              {"feasible", false},
                              {"violated_inequality", res.violated_inequality}}
                             .dump(2)
                      << "\n";
        } else {
            std::cout << species.name << ": infeasible (" << res.violated_inequality << ")\n";
        }
        return kExitInfeasible;
    }

    const BeamGeometry& g = res.geometry;
    auto angle_deg = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
        return std::acos(std::clamp(a.dot(b), -1.0, 1.0)) * 180.0 / M_PI;
    };
    const double a_br = angle_deg(g.u_B, g.u_R);
    const double a_bw = angle_deg(g.u_B, g.u_W);
    const double a_rw = angle_deg(g.u_R, g.u_W);
    const double width =
        residual_doppler_width(g, misalignment_mrad * 1e-3, temperature_K, species);

    if (format == "json") {
        std::cout << json{{"species", species.name},
                          {"feasible", true},
                          {"angle_B_R_deg", a_br},
                          {"angle_B_W_deg", a_bw},
                          {"angle_R_W_deg", a_rw},
                          {"residual_dk_per_m", g.residual_dk},
                          {"residual_dk_relative", g.residual_dk / g.k_B},
                          {"misalignment_mrad", misalignment_mrad},
                          {"temperature_K", temperature_K},
                          {"residual_doppler_width_Hz", width}}
                         .dump(2)
                  << "\n";
        return kExitOk;
    }

    std::cout << species.name << ": phase matching feasible\n";
    std::cout << "  angle B-R " << a_br << " deg, B-W " << a_bw << " deg, R-W " << a_rw
              << " deg\n";
    std::cout << "  residual |dk| " << g.residual_dk << " /m (" << g.residual_dk / g.k_B
              << " relative)\n";
    std::cout << "  residual Doppler width at " << misalignment_mrad << " mrad, "
              << temperature_K << " K: " << width << " Hz\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"three-photon CPT clock simulator and systematics calculator"};
    app.require_subcommand(1);

    std::string format = "text";
    std::string config_path;
    std::string out_path;
    int points = 0;

    auto* sp = app.add_subcommand("species", "list built-in ion data with source notes");
    std::string species_filter;
    sp->add_option("name", species_filter, "show one species only");
    sp->add_option("--format", format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));

    auto* sc = app.add_subcommand("scan", "steady-state fluorescence scan across the dark line");
    sc->add_option("--config", config_path, "JSON run configuration")->required();
    sc->add_option("--points", points, "override scan point count");
    sc->add_option("--out", out_path, "override CSV output path");
    sc->add_option("--format", format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));

    auto* bu = app.add_subcommand("budget", "systematic shift budget and stability");
    bu->add_option("--config", config_path, "JSON run configuration");
    std::string repro_species;
    bool do_repro = false;
    bu->add_flag("--paper-repro", do_repro,
                 "check the published anchor values for the shipped species");
    bu->add_option("--paper-repro-species", repro_species,
                   "restrict --paper-repro to one species");
    bu->add_option("species", repro_species, "species for --paper-repro");
    bu->add_option("--format", format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));

    auto* pm = app.add_subcommand("phase-match", "wave-vector triangle geometry");
    std::string pm_species = "Ca+";
    double misalignment_mrad = 1.0;
    double temperature_K = 1e-3;
    pm->add_option("species", pm_species, "ion species")->required();
    pm->add_option("--misalignment-mrad", misalignment_mrad, "W-beam tilt for the width report");
    pm->add_option("--temperature-K", temperature_K, "ion temperature for the width report");
    pm->add_option("--format", format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (sp->parsed()) return cmd_species(species_filter, format);
        if (sc->parsed()) {
            const RunConfig cfg = parse_config(config_path);
            return cmd_scan(cfg, format, points, out_path);
        }
        if (bu->parsed()) {
            std::optional<RunConfig> cfg;
            if (!config_path.empty()) cfg = parse_config(config_path);
            return cmd_budget(cfg, format, do_repro, repro_species);
        }
        if (pm->parsed())
            return cmd_phase_match(pm_species, misalignment_mrad, temperature_K, format);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitSolver;
    }
    return kExitOk;
}
