#pragma once

#include <string>
#include <vector>

namespace cptclock {

// Atomic constants for one ion of the N-scheme family
// (|S> = S_1/2, |P> = P_1/2, |D> = D_3/2, |Q> = D_5/2).
struct IonSpecies {
    std::string name;    // "Ca+", "Sr+", "Ba+", "Hg+"
    double mass_u;       // atomic mass, unified amu
    double lambda_B;     // S-P wavelength, m
    double lambda_R;     // D-P wavelength, m
    double lambda_W;     // S-Q wavelength, m
    double f_QD;         // D_3/2 - D_5/2 clock transition, Hz
    double gamma_P;      // |P> decay rate, s^-1 (angular convention)
    double beta_PS;      // branching |P> -> |S>
    double beta_PD;      // branching |P> -> |D>
    double theta_Q52;    // electric quadrupole moment of D_5/2, e*a0^2
    double g_D32;        // Lande g factor of D_3/2
    double g_D52;        // Lande g factor of D_5/2
    std::string source_note;  // citations for non-wavelength constants
    std::string caveat;       // e.g. level ordering remark for Hg+

    // Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

// D_3/2 quadrupole moment from the pure-d-orbital ratio,
// Theta(n,3/2) = (7/10) Theta(n,5/2).
double theta_Q32(const IonSpecies& species);

// Loads a species table from a JSON file; every record is validated.
std::vector<IonSpecies> load_species_file(const std::string& path);
void save_species_file(const std::vector<IonSpecies>& table, const std::string& path);

// The four shipped species. Reads the data file installed with the
// project (override with the CPTCLOCK_SPECIES_FILE environment variable).
const std::vector<IonSpecies>& builtin_species();

// Case-insensitive lookup, accepts "Ca+", "ca+", "ca". Throws
// std::invalid_argument listing valid names when not found.
const IonSpecies& find_species(const std::vector<IonSpecies>& table, const std::string& name);
const IonSpecies& find_species(const std::string& name);

}  // namespace cptclock
