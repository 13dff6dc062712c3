#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cptclock/constants.hpp"
#include "cptclock/dressed.hpp"
#include "cptclock/species.hpp"

using namespace cptclock;

namespace {

LaserParams base_lasers(double alpha = 1e-4) {
    LaserParams l;
    l.omega_B = 1.0e6;
    l.omega_R = 1.0e5;
    l.delta_W = hz_to_angular(5.0e7);
    l.omega_W = 2.0 * alpha * l.delta_W;
    l.delta_B = l.delta_W;
    return l;
}

}  // namespace

TEST_CASE("no W coupling leaves the bare states") {
    LaserParams l = base_lasers();
    l.omega_W = 0.0;
    const DressedModel dm = make_dressed(l, find_species("Ca+"));
    CHECK(dm.alpha_W == 0.0);
    CHECK(dm.light_shift == 0.0);
    CHECK(dm.s_Q_coeffs[0] == 1.0);
    CHECK(dm.s_Q_coeffs[1] == 0.0);
}

TEST_CASE("light shift of the 10 kHz / alpha=1e-4 working point is 0.5 Hz") {
    LaserParams l;
    l.omega_W = hz_to_angular(1.0e4);
    l.delta_W = l.omega_W / (2.0 * 1e-4);  // alpha_W = 1e-4
    l.omega_B = 1e6;
    l.omega_R = 1e5;
    const DressedModel dm = make_dressed(l, find_species("Ca+"));
    CHECK(dm.alpha_W == doctest::Approx(1e-4));
    CHECK(dm.light_shift == doctest::Approx(3.14159265).epsilon(1e-6));  // pi s^-1
    CHECK(angular_to_hz(dm.light_shift) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(angular_to_hz(dm.light_shift) < 1.0);  // below the 1 Hz working bound
}

TEST_CASE("dressed coefficients are normalized and epsilon follows alpha Omega_B / Omega_R") {
    LaserParams l = base_lasers(2e-2);
    l.omega_B = 50.0 * l.omega_R;  // epsilon = alpha * Omega_B / Omega_R = 1
    const DressedModel dm = make_dressed(l, find_species("Ca+"));
    CHECK(std::hypot(dm.s_Q_coeffs[0], dm.s_Q_coeffs[1]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::hypot(dm.q_S_coeffs[0], dm.q_S_coeffs[1]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dm.epsilon == doctest::Approx(1.0));
    const Eigen::Vector2d dark = dark_state(dm);
    CHECK(dark(0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(dark(1) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(dm.perturbation_warning);  // alpha_W = 2e-2 is above the warn threshold
}

TEST_CASE("make_dressed rejects the undefined and out-of-regime cases") {
    LaserParams l = base_lasers();
    l.delta_W = 0.0;
    CHECK_THROWS_AS(make_dressed(l, find_species("Ca+")), std::invalid_argument);
    l = base_lasers();
    l.omega_W = 0.4 * l.delta_W;  // alpha_W = 0.2
    CHECK_THROWS_AS(make_dressed(l, find_species("Ca+")), std::invalid_argument);
}

TEST_CASE("three-photon detuning including the light shift") {
    const IonSpecies ca = find_species("Ca+");
    LaserParams l = base_lasers();
    DressedModel dm = make_dressed(l, ca);
    l.delta_R = l.delta_B;
    l.delta_W = -dm.alpha_W * l.omega_W / 2.0;
    // Cancellation of the ~1e8 detunings leaves rounding at the ulp level.
    CHECK(std::abs(three_photon_detuning(l, dm)) <= 1e-12 * std::abs(l.delta_B));

    LaserParams quiet;
    const DressedModel none = make_dressed(quiet, ca);
    CHECK(three_photon_detuning(quiet, none) == 0.0);

    LaserParams bare;
    bare.delta_R = hz_to_angular(1e6);
    bare.delta_B = hz_to_angular(3e6);
    bare.delta_W = hz_to_angular(2e6);
    DressedModel zero_alpha;  // alpha_W = 0
    CHECK(three_photon_detuning(bare, zero_alpha) == doctest::Approx(0.0));
}

TEST_CASE("dark state normalization arithmetic") {
    DressedModel dm;
    dm.epsilon = 0.0;
    CHECK(dark_state(dm)(0) == 0.0);
    CHECK(dark_state(dm)(1) == 1.0);
    dm.epsilon = 3.0;
    CHECK(dark_state(dm)(0) == doctest::Approx(0.9487).epsilon(1e-4));
    CHECK(dark_state(dm)(1) == doctest::Approx(0.3162).epsilon(1e-4));
}

TEST_CASE("dark state cancels the effective Lambda coupling exactly") {
    const IonSpecies ca = find_species("Ca+");
    for (double alpha : {1e-4, 1e-3, 5e-3}) {
        LaserParams l = base_lasers(alpha);
        const DressedModel dm = make_dressed(l, ca);
        const Eigen::Vector2d dark = dark_state(dm);
        // <P| H_Lambda |Psi_Dark> = (Omega_R/2) E + (-alpha Omega_B/2) over (|D>,|Q_S>)
        const double coupling =
            (l.omega_R / 2.0) * dark(0) + (dm.effective_rabi_QP / 2.0) * dark(1);
        const double norm = std::hypot(l.omega_R / 2.0, dm.effective_rabi_QP / 2.0);
        CHECK(std::abs(coupling) <= 1e-12 * norm);
    }
}

TEST_CASE("gamma_Lambda stays within [gamma_P beta_PD, gamma_P]") {
    const IonSpecies ca = find_species("Ca+");
    for (double alpha : {0.0, 1e-4, 1e-3, 5e-2}) {
        LaserParams l = base_lasers(std::max(alpha, 1e-6));
        if (alpha > 0) l.omega_W = 2.0 * alpha * l.delta_W;
        const DressedModel dm = make_dressed(l, ca);
        CHECK(dm.gamma_Lambda >= ca.gamma_P * ca.beta_PD);
        CHECK(dm.gamma_Lambda <= ca.gamma_P);
    }
}

TEST_CASE("linewidth limits: small Omega_R gives Omega_R^2/gamma_P, signal follows the width") {
    const IonSpecies ca = find_species("Ca+");
    LaserParams l = base_lasers(1e-4);
    l.omega_R = 1e-4 * ca.gamma_P * std::sqrt(ca.beta_PD);
    l.omega_B = 50.0 * l.omega_R;
    l.delta_R = 0.0;
    const DressedModel dm = make_dressed(l, ca);
    const LineEstimate est = analytic_linewidth(l, ca, dm);
    const double simple = l.omega_R * l.omega_R / ca.gamma_P;
    CHECK(est.gamma_eff == doctest::Approx(simple).epsilon(1e-4));
    CHECK(est.signal_rate ==
          doctest::Approx(est.gamma_eff * ca.beta_PS / ca.beta_PD).epsilon(1e-4));
}

TEST_CASE("analytic_linewidth rejects Omega_R = 0") {
    const IonSpecies ca = find_species("Ca+");
    LaserParams l = base_lasers();
    l.omega_R = 0.0;
    const DressedModel dm = make_dressed(l, ca);
    CHECK_THROWS_AS(analytic_linewidth(l, ca, dm), std::invalid_argument);
}

TEST_CASE("gamma_eff is increasing in Omega_R and non-increasing in |Delta_R|") {
    const IonSpecies ca = find_species("Ca+");
    double prev = 0.0;
    for (double scale : {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}) {
        LaserParams l = base_lasers(1e-4);
        l.omega_R = scale * ca.gamma_P * std::sqrt(ca.beta_PD);
        l.omega_B = 50.0 * l.omega_R;
        const LineEstimate est = analytic_linewidth(l, ca, make_dressed(l, ca));
        CHECK(est.gamma_eff > prev);
        prev = est.gamma_eff;
    }
    LaserParams l = base_lasers(1e-4);
    double prev_w = std::numeric_limits<double>::infinity();
    for (double dr : {0.0, 1e7, 5e7, 2e8}) {
        l.delta_R = dr;
        const LineEstimate est = analytic_linewidth(l, ca, make_dressed(l, ca));
        CHECK(est.gamma_eff <= prev_w);
        prev_w = est.gamma_eff;
    }
}

TEST_CASE("validity flags trip outside the declared regime") {
    const IonSpecies ca = find_species("Ca+");
    LaserParams l = base_lasers(1e-4);
    l.omega_B = 50.0 * l.omega_R;
    ValidityFlags f = check_validity(l, ca, make_dressed(l, ca));
    CHECK(f.all_green());

    l.omega_B = l.omega_R;  // pump no longer dominates
    f = check_validity(l, ca, make_dressed(l, ca));
    CHECK(!f.pump_dominates);
    CHECK(!f.all_green());
}
