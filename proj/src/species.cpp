#include "cptclock/species.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cptclock {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("IonSpecies: " + what);
}

}  // namespace

void IonSpecies::validate() const {
    require(!name.empty(), "name is empty");
    require(std::isfinite(mass_u) && mass_u > 0, name + ": mass_u must be > 0");
    require(lambda_B > 0 && lambda_R > 0 && lambda_W > 0, name + ": wavelengths must be > 0");
    require(f_QD > 0, name + ": f_QD must be > 0");
    require(gamma_P > 0, name + ": gamma_P must be > 0");
    require(beta_PS >= 0 && beta_PD >= 0, name + ": branching ratios must be >= 0");
    require(std::abs(beta_PS + beta_PD - 1.0) <= 1e-12, name + ": beta_PS + beta_PD must equal 1");
    require(std::isfinite(theta_Q52), name + ": theta_Q52 must be finite");
    require(std::isfinite(g_D32) && std::isfinite(g_D52), name + ": g factors must be finite");
}

double theta_Q32(const IonSpecies& species) { return 0.7 * species.theta_Q52; }

std::vector<IonSpecies> load_species_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open species file: " + path);
    nlohmann::json j;
    in >> j;

    std::vector<IonSpecies> table;
    for (const auto& rec : j.at("species")) {
        IonSpecies s;
        s.name = rec.at("name").get<std::string>();
        s.mass_u = rec.at("mass_u").get<double>();
        s.lambda_B = rec.at("lambda_B").get<double>();
        s.lambda_R = rec.at("lambda_R").get<double>();
        s.lambda_W = rec.at("lambda_W").get<double>();
        s.f_QD = rec.at("f_QD").get<double>();
        s.gamma_P = rec.at("gamma_P").get<double>();
        s.beta_PS = rec.at("beta_PS").get<double>();
        s.beta_PD = rec.at("beta_PD").get<double>();
        s.theta_Q52 = rec.at("theta_Q52").get<double>();
        s.g_D32 = rec.at("g_D32").get<double>();
        s.g_D52 = rec.at("g_D52").get<double>();
        s.source_note = rec.at("source_note").get<std::string>();
        s.caveat = rec.value("caveat", "");
        s.validate();
        // Pin the sum-to-one invariant exactly after the tolerance check.
        s.beta_PS = 1.0 - s.beta_PD;
        table.push_back(std::move(s));
    }
    return table;
}

void save_species_file(const std::vector<IonSpecies>& table, const std::string& path) {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& s : table) {
        recs.push_back({
            {"name", s.name},
            {"mass_u", s.mass_u},
            {"lambda_B", s.lambda_B},
            {"lambda_R", s.lambda_R},
            {"lambda_W", s.lambda_W},
            {"f_QD", s.f_QD},
            {"gamma_P", s.gamma_P},
            {"beta_PS", s.beta_PS},
            {"beta_PD", s.beta_PD},
            {"theta_Q52", s.theta_Q52},
            {"g_D32", s.g_D32},
            {"g_D52", s.g_D52},
            {"source_note", s.source_note},
            {"caveat", s.caveat},
        });
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write species file: " + path);
    out << nlohmann::json{{"species", recs}}.dump(2) << "\n";
}

const std::vector<IonSpecies>& builtin_species() {
    static const std::vector<IonSpecies> table = [] {
        const char* env = std::getenv("CPTCLOCK_SPECIES_FILE");
        std::string path = env ? env : CPTCLOCK_SPECIES_JSON;
        auto t = load_species_file(path);
        if (t.size() != 4) throw std::runtime_error("species file must hold the four shipped ions");
        return t;
    }();
    return table;
}

const IonSpecies& find_species(const std::vector<IonSpecies>& table, const std::string& name) {
    std::string key = lower(name);
    if (!key.empty() && key.back() != '+') key += '+';
    for (const auto& s : table)
        if (lower(s.name) == key) return s;
    std::ostringstream msg;
    msg << "unknown species '" << name << "'; valid names:";
    for (const auto& s : table) msg << ' ' << s.name;
    throw std::invalid_argument(msg.str());
}

const IonSpecies& find_species(const std::string& name) {
    return find_species(builtin_species(), name);
}

}  // namespace cptclock
