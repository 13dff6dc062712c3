#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cptclock/budget.hpp"
#include "cptclock/constants.hpp"

using namespace cptclock;

namespace {

TrapParams reference_trap() {
    TrapParams t;
    t.n_ions = 1e5;
    t.secular_freq_MHz = 0.1;
    t.temperature_K = 300.0;
    t.b_field_G = 2e-3;
    t.b_instability_G = 3.6e-6;
    t.grad_times_pi = 150.0;
    t.eta = 1e-4;
    t.cycle_time_s = 1.0;
    return t;
}

LaserParams working_lasers() {
    LaserParams l;
    l.omega_B = 2.0e6;
    l.omega_R = 3.5e4;
    l.omega_W = 2.5e4;
    l.delta_B = hz_to_angular(2.0e6);
    l.delta_W = hz_to_angular(2.0e6);
    return l;
}

}  // namespace

TEST_CASE("second-order Doppler anchor for a 1e5-ion Ca+ cloud") {
    const IonSpecies ca = find_species("Ca+");
    const double frac = doppler2_shift(reference_trap(), ca);
    CHECK(frac == doctest::Approx(-1.2e-12).epsilon(0.05));
    CHECK(frac * ca.f_QD == doctest::Approx(-2.2).epsilon(0.05));
}

TEST_CASE("second-order Doppler follows the 2/3 power of the ion number") {
    const IonSpecies ca = find_species("Ca+");
    TrapParams t = reference_trap();
    const double base = doppler2_shift(t, ca);
    t.n_ions *= 8.0;
    CHECK(doppler2_shift(t, ca) == doctest::Approx(4.0 * base).epsilon(1e-12));
    t.n_ions = 1.0;
    t.secular_freq_MHz = 0.0;
    CHECK(doppler2_shift(t, ca) == 0.0);
}

TEST_CASE("clock quadrupole anchor: Theta = 4 e a0^2, A*Pi = 150 V/cm^2 gives ~1.1 Hz") {
    CHECK(clock_quadrupole_shift(4.0, 150.0) == doctest::Approx(1.117).epsilon(0.01));
    CHECK(clock_quadrupole_shift(4.0, 0.0) == 0.0);
    CHECK(clock_quadrupole_shift(0.0, 150.0) == 0.0);
}

TEST_CASE("per-state quadrupole shifts obey the m-sum rule exactly") {
    for (double j : {1.5, 2.5}) {
        double sum = 0.0;
        double scale = 0.0;
        for (double m = -j; m <= j + 0.1; m += 1.0) {
            const double s = quadrupole_shift(j, m, 4.0, 150.0);
            sum += s;
            scale = std::max(scale, std::abs(s));
        }
        CHECK(std::abs(sum) <= 1e-12 * scale);
    }
}

TEST_CASE("per-state quadrupole rejects invalid quantum numbers") {
    CHECK_THROWS_AS(quadrupole_shift(2.0, 0.5, 4.0, 150.0), std::invalid_argument);
    CHECK_THROWS_AS(quadrupole_shift(2.5, 1.0, 4.0, 150.0), std::invalid_argument);
    CHECK_THROWS_AS(quadrupole_shift(1.5, 2.5, 4.0, 150.0), std::invalid_argument);
}

TEST_CASE("Zeeman coefficient and the 2 mG / 3.6 uG anchors") {
    const IonSpecies ca = find_species("Ca+");
    const ZeemanShift z = zeeman_shift(2e-3, ca, 3.6e-6);
    CHECK(z.coeff_Hz_per_G == doctest::Approx(0.28e6).epsilon(0.02));
    CHECK(z.splitting_Hz == doctest::Approx(1120.0).epsilon(0.02));
    CHECK(z.cancellation_residual_Hz == doctest::Approx(1.0).epsilon(0.02));

    const ZeemanShift off = zeeman_shift(0.0, ca);
    CHECK(off.shift_per_transition_Hz == 0.0);
    CHECK(off.splitting_Hz == 0.0);

    // Same D-state g factors are shipped for every species.
    for (const auto& s : builtin_species())
        CHECK(zeeman_shift(1.0, s).coeff_Hz_per_G == doctest::Approx(0.28e6).epsilon(0.02));
}

TEST_CASE("blackbody Stark: 6.9e-4 Hz at 300 K and the T^4 law") {
    CHECK(bbr_stark_shift(300.0, 0.0) == doctest::Approx(6.92e-4).epsilon(0.01));
    CHECK(bbr_stark_shift(0.0, 0.0) == 0.0);
    CHECK(bbr_stark_shift(600.0, 0.0) ==
          doctest::Approx(16.0 * bbr_stark_shift(300.0, 0.0)).epsilon(1e-12));
    // A DC field adds in quadrature on the mean-squared field.
    CHECK(bbr_stark_shift(0.0, 10.0) == doctest::Approx(1e-5 * 100.0));
}

TEST_CASE("probe light shift of the alpha_W = 1e-4, 10 kHz working point is 0.5 Hz") {
    const IonSpecies ca = find_species("Ca+");
    LaserParams l = working_lasers();
    l.omega_W = hz_to_angular(1.0e4);
    l.delta_W = l.omega_W / 2e-4;
    CHECK(probe_light_shift(make_dressed(l, ca)) == doctest::Approx(0.5).epsilon(1e-6));

    l.omega_W = 0.0;
    CHECK(probe_light_shift(make_dressed(l, ca)) == 0.0);
}

TEST_CASE("off-resonant light shift bound is quadratic in Omega_R") {
    const IonSpecies ca = find_species("Ca+");
    LaserParams l;
    l.omega_R = hz_to_angular(1.0e6);
    CHECK(offres_light_shift_bound(l, ca) == doctest::Approx(0.1));
    l.omega_R = hz_to_angular(2.0e6);
    CHECK(offres_light_shift_bound(l, ca) == doctest::Approx(0.4));
    l.omega_R = 0.0;
    CHECK(offres_light_shift_bound(l, ca) == 0.0);
}

TEST_CASE("Ca+ wave-vector triangle closes with the R and W beams ~8.9 degrees apart") {
    const PhaseMatchResult res = phase_matching(find_species("Ca+"));
    REQUIRE(res.feasible);
    const BeamGeometry& g = res.geometry;
    CHECK(g.residual_dk <= 1e-12 * g.k_B);
    const double angle_rw =
        std::acos(std::clamp(g.u_R.dot(g.u_W), -1.0, 1.0)) * 180.0 / M_PI;
    CHECK(angle_rw == doctest::Approx(8.92).epsilon(0.01));
    CHECK(g.u_B.norm() == doctest::Approx(1.0));
    CHECK(g.u_R.norm() == doctest::Approx(1.0));
    CHECK(g.u_W.norm() == doctest::Approx(1.0));
}

TEST_CASE("Hg+ geometry is infeasible and says which inequality failed") {
    const PhaseMatchResult res = phase_matching(find_species("Hg+"));
    CHECK(!res.feasible);
    CHECK(res.violated_inequality == "k_B > k_R + k_W");
}

TEST_CASE("feasibility is exactly the triangle inequality on 1000 random triples") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> lam(100e-9, 20e-6);
    IonSpecies s = find_species("Ca+");
    for (int k = 0; k < 1000; ++k) {
        s.lambda_B = lam(rng);
        s.lambda_R = lam(rng);
        s.lambda_W = lam(rng);
        const double kb = 1.0 / s.lambda_B, kr = 1.0 / s.lambda_R, kw = 1.0 / s.lambda_W;
        const bool triangle = kb <= kr + kw && kr <= kb + kw && kw <= kb + kr;
        const PhaseMatchResult res = phase_matching(s);
        CHECK(res.feasible == triangle);
        if (res.feasible) CHECK(res.geometry.residual_dk <= 1e-9 * res.geometry.k_B);
    }
}

TEST_CASE("residual first-order Doppler width") {
    const IonSpecies ca = find_species("Ca+");
    const PhaseMatchResult res = phase_matching(ca);
    REQUIRE(res.feasible);

    // Perfect alignment leaves only the numerical closure residual.
    CHECK(residual_doppler_width(res.geometry, 0.0, 1e-3, ca) < 1e-6);

    // Small-angle linearity.
    const double w1 = residual_doppler_width(res.geometry, 1e-4, 1e-3, ca);
    const double w2 = residual_doppler_width(res.geometry, 2e-4, 1e-3, ca);
    CHECK(w2 == doctest::Approx(2.0 * w1).epsilon(0.01));

    // 1 mrad misalignment at 1 mK broadens the line by ~0.6 kHz.
    CHECK(residual_doppler_width(res.geometry, 1e-3, 1e-3, ca) ==
          doctest::Approx(626.0).epsilon(0.02));
}

TEST_CASE("Allan deviation scales as 1/sqrt(tau)") {
    const double one = allan_deviation(2.0 * M_PI * 10.0, 1.82e12, 67.8, 1.0, 1.0);
    CHECK(allan_deviation(2.0 * M_PI * 10.0, 1.82e12, 67.8, 1.0, 4.0) ==
          doctest::Approx(one / 2.0).epsilon(1e-12));
    CHECK(allan_deviation(2.0 * M_PI * 10.0, 1.82e12, 2.0 * 67.8, 1.0, 1.0) ==
          doctest::Approx(one / 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(allan_deviation(0.0, 1.82e12, 67.8, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("full budget for the reference Ca+ scenario") {
    const IonSpecies ca = find_species("Ca+");
    const LaserParams l = working_lasers();
    const DressedModel dm = make_dressed(l, ca);
    const ClockBudget budget = full_budget(ca, reference_trap(), l, dm);

    REQUIRE(budget.entries.size() >= 7);
    CHECK(budget.entries.front().name == "second-order Doppler");
    CHECK(budget.entries.front().absolute_shift_Hz == doctest::Approx(-2.2).epsilon(0.05));

    double total = 0.0;
    for (size_t i = 0; i < budget.entries.size(); ++i) {
        const auto& e = budget.entries[i];
        CHECK(e.fractional_shift == e.absolute_shift_Hz / ca.f_QD);  // exact identity
        if (i > 0)
            CHECK(std::abs(e.absolute_shift_Hz) <=
                  std::abs(budget.entries[i - 1].absolute_shift_Hz));
        total += std::abs(e.absolute_shift_Hz);
    }
    CHECK(budget.worst_case_total_Hz == doctest::Approx(total).epsilon(1e-12));
    CHECK(budget.allan_coefficient > 0.0);
    CHECK(budget.allan_coefficient < 1e-11);
}

TEST_CASE("zeroed trap and dark lasers give a zero budget") {
    const IonSpecies ca = find_species("Ca+");
    TrapParams t;
    t.n_ions = 1.0;
    t.secular_freq_MHz = 0.0;
    t.temperature_K = 0.0;
    const LaserParams l;  // everything off
    const ClockBudget budget = full_budget(ca, t, l, DressedModel{});
    for (const auto& e : budget.entries) CHECK(e.absolute_shift_Hz == 0.0);
    CHECK(budget.worst_case_total_Hz == 0.0);
    CHECK(budget.allan_coefficient == 0.0);
}

TEST_CASE("budget serialization is deterministic and carries all entries") {
    const IonSpecies ca = find_species("Ca+");
    const LaserParams l = working_lasers();
    const ClockBudget budget = full_budget(ca, reference_trap(), l, make_dressed(l, ca));

    CHECK(budget_to_json(budget) == budget_to_json(budget));
    CHECK(budget_to_text(budget) == budget_to_text(budget));

    const std::string text = budget_to_text(budget);
    const std::string json = budget_to_json(budget);
    for (const auto& e : budget.entries) {
        CHECK(text.find(e.name) != std::string::npos);
        CHECK(json.find(e.name) != std::string::npos);
    }
    CHECK(text.find("sigma_y(1 s)") != std::string::npos);
}

TEST_CASE("trap parameter validation") {
    TrapParams t;
    t.eta = 0.0;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t = TrapParams{};
    t.n_ions = 0.0;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t = TrapParams{};
    t.cycle_time_s = 0.0;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}
