#include <doctest.h>

#include <cmath>
#include <vector>

#include "finres/analysis.hpp"
#include "finres/errors.hpp"

using namespace finres;

TEST_CASE("metastable current") {
    CHECK(metastable_current(0.0, 0.5, 1.0) == 0.0);
    CHECK(metastable_current(0.10351, 0.5, 1.0) ==
          doctest::Approx(0.024356).epsilon(5e-5));
    // suppressed for strong coupling, maximal at gamma = 2J
    const double at_2j = metastable_current(0.1, 2.0, 1.0);
    CHECK(metastable_current(0.1, 500.0, 1.0) < 0.01 * at_2j);
    CHECK(metastable_current(0.1, 1.9, 1.0) < at_2j);
    CHECK(metastable_current(0.1, 2.1, 1.0) < at_2j);
}

TEST_CASE("metastable profile") {
    const auto p = metastable_profile(0.3546, 0.2511, 0.5, 1.0, 7);
    CHECK(p.boundary_offset == doctest::Approx(0.0030444).epsilon(1e-4));
    CHECK(p.profile(0) == doctest::Approx(0.30589).epsilon(1e-4));
    CHECK(p.profile(6) == doctest::Approx(0.29980).epsilon(1e-4));
    for (int i = 1; i < 6; ++i) CHECK(p.profile(i) == doctest::Approx(p.mean_density));
    CHECK(p.profile.sum() == doctest::Approx(7.0 * p.mean_density).epsilon(1e-14));

    const auto flat = metastable_profile(0.3, 0.3, 0.5, 1.0, 5);
    CHECK(flat.boundary_offset == 0.0);
    CHECK(flat.current == 0.0);
}

TEST_CASE("equilibration time estimate") {
    CHECK(tau_eq_estimate(500.0, 0.103513, 0.5, 1.0) ==
          doctest::Approx(1.0265e4).epsilon(0.005));
    CHECK(tau_eq_estimate(1000.0, 0.103513, 0.5, 1.0) ==
          doctest::Approx(2.0 * tau_eq_estimate(500.0, 0.103513, 0.5, 1.0)));
    // at gamma = 2J the prefactor collapses to 1
    CHECK(tau_eq_estimate(300.0, 0.1, 2.0, 1.0) == doctest::Approx(3000.0));
    // scale invariance in (dN, dn)
    CHECK(tau_eq_estimate(50.0, 0.01, 0.7, 1.0) ==
          doctest::Approx(tau_eq_estimate(500.0, 0.1, 0.7, 1.0)).epsilon(1e-14));
    CHECK_THROWS_AS((void)tau_eq_estimate(500.0, 0.0, 0.5, 1.0), domain_error);
}

TEST_CASE("conductance") {
    const auto g_half = conductance(0.5, 1.0, 0.5, 1.0, Statistics::fermi);
    CHECK(g_half.value == doctest::Approx(0.058824).epsilon(1e-4));
    CHECK(g_half.value == doctest::Approx(g_half.fermi_bound).epsilon(1e-14));
    CHECK(conductance(0.305, 1.0, 0.5, 1.0, Statistics::fermi).value ==
          doctest::Approx(0.049878).epsilon(1e-4));
    CHECK(conductance(1.0, 1.0, 0.5, 1.0, Statistics::bose).value ==
          doctest::Approx(0.470588).epsilon(1e-5));
    CHECK_THROWS_AS((void)conductance(1.2, 1.0, 0.5, 1.0, Statistics::fermi),
                    domain_error);

    // fermionic curve peaks at n = 1/2 under the bound; bosonic curve grows
    double prev_bose = 0.0;
    for (int i = 1; i <= 60; ++i) {
        const double n = i / 40.0; // up to 1.5
        const auto gb = conductance(n, 1.0, 0.5, 1.0, Statistics::bose);
        CHECK(gb.value > prev_bose);
        prev_bose = gb.value;
        if (n <= 1.0) {
            const auto gf = conductance(n, 1.0, 0.5, 1.0, Statistics::fermi);
            CHECK(gf.value <= gf.fermi_bound + 1e-15);
        }
    }
}

TEST_CASE("windows") {
    const Window meta = metastable_window(27.8, 1e4, 5e4);
    CHECK(meta.lo == doctest::Approx(139.0));
    CHECK(meta.hi == doctest::Approx(5000.0));
    const Window asym = asymptotic_window(1e4, 5e4);
    CHECK(asym.lo == doctest::Approx(1e4));
    CHECK(asym.hi == doctest::Approx(4e4));
    // short runs truncate
    CHECK(asymptotic_window(1e4, 2e4).hi == doctest::Approx(2e4));
    CHECK(!asymptotic_window(1e4, 5e3).valid());
}

TEST_CASE("exponential fit") {
    std::vector<double> t, x;
    for (int i = 0; i < 200; ++i) {
        t.push_back(10.0 * i);
        x.push_back(3.0 * std::exp(-t.back() / 100.0) + 0.7);
    }
    const FitResult fit = fit_exponential(t, x, 0.7, Window{100.0, 1500.0});
    CHECK(fit.rate == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(fit.amplitude == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(fit.rms_residual < 1e-10);

    // a sign change inside the window is a misplaced window
    std::vector<double> osc;
    for (double ti : t) osc.push_back(std::sin(ti / 200.0));
    CHECK_THROWS_AS((void)fit_exponential(t, osc, 0.0, Window{100.0, 1500.0}),
                    numeric_error);
    // too few samples
    CHECK_THROWS_AS((void)fit_exponential(t, x, 0.7, Window{0.0, 50.0}), numeric_error);
}

TEST_CASE("power-law fit") {
    std::vector<double> t, x;
    for (int i = 1; i <= 100; ++i) {
        t.push_back(0.001 * std::pow(1.07, i));
        x.push_back(t.back() * t.back() * t.back());
    }
    CHECK(fit_power_law(t, x, Window{0.001, 1.0}) == doctest::Approx(3.0).epsilon(1e-12));
    std::vector<double> bad = x;
    bad[50] = 0.0;
    CHECK_THROWS_AS((void)fit_power_law(t, bad, Window{0.001, 1.0}), numeric_error);
}

TEST_CASE("short-time exponents") {
    CHECK(short_time_exponent(7, 1, 1) == 1);
    CHECK(short_time_exponent(7, 1, 7) == 7);
    CHECK(short_time_exponent(7, 1, 2) == 2);
    CHECK(short_time_exponent(7, 4, 4) == 7);
    CHECK(short_time_exponent(5, 3, 3) == 5);
    CHECK(short_time_exponent(5, 1, 1) == 1);
    CHECK_THROWS_AS((void)short_time_exponent(5, 0, 1), domain_error);
    CHECK_THROWS_AS((void)short_time_exponent(5, 1, 6), domain_error);
}

namespace {

// synthetic trajectory sitting exactly on the metastable relations
Trajectory synthetic_metastable(const TransportModel& model, double tau_eq,
                                double t_end, int samples, double scale_current) {
    Trajectory traj;
    const int m = model.channel.sites;
    const double gamma = model.gamma_left;
    for (int i = 0; i <= samples; ++i) {
        const double t = t_end * double(i) / samples;
        const double nl = 0.30 + 0.05 * std::exp(-t / tau_eq);
        const double nr = 0.30 - 0.05 * std::exp(-t / tau_eq);
        const auto pred = metastable_profile(nl, nr, gamma, model.channel.hopping, m);
        ObservableRecord r;
        r.time = t;
        r.site_density = pred.profile;
        r.bond_current = Eigen::VectorXd::Constant(m - 1, pred.current);
        r.mu_left = 2.0 - std::log(1.0 / nl - 1.0);
        r.mu_right = 2.0 - std::log(1.0 / nr - 1.0);
        r.res_occupation_left = nl;
        r.res_occupation_right = nr;
        // populations consistent with I = dN/2: N = N_inf +/- I tau_eq
        const double current = scale_current * pred.current;
        r.population_left = 1000.0 + current * tau_eq;
        r.population_right = 1000.0 - current * tau_eq;
        r.macro_current = current;
        r.max_distant_coherence = 0.0;
        traj.records.push_back(r);
        traj.times.push_back(t);
        traj.sigmas.push_back(pred.profile.cast<std::complex<double>>().asDiagonal());
    }
    return traj;
}

} // namespace

TEST_CASE("consistency report on a synthetic metastable trajectory") {
    TransportModel model;
    model.channel = ChannelSpec{7, 2.0, 1.0};
    model.trap = TrapSpec{1.0, 0.2, 0.2, 0.05};
    model.gamma_left = model.gamma_right = 0.5;
    const double tau_eq = 1e4, tau_rel = 27.8, t_end = 5e4;

    const Trajectory good = synthetic_metastable(model, tau_eq, t_end, 400, 1.0);
    const double g_formula =
        conductance(0.30, 1.0, 0.5, 1.0, Statistics::fermi).value;
    const Window meta = metastable_window(tau_rel, tau_eq, t_end);
    const double g_meas = median_conductance(good, meta);
    const auto report = consistency_report(good, model, tau_rel, tau_eq, g_formula,
                                           g_meas, t_end);
    CHECK(report.all_passed());
    CHECK(report.find("current_homogeneity")->evaluated);
    CHECK(report.find("macroscopic_current")->measured < 1e-12);
    CHECK(report.find("ohmic_current")->measured < 1e-12);

    // doubling the macroscopic current must trip the identity check by ~1
    const Trajectory bad = synthetic_metastable(model, tau_eq, t_end, 400, 2.0);
    const auto report2 = consistency_report(bad, model, tau_rel, tau_eq, g_formula,
                                            median_conductance(bad, meta), t_end);
    CHECK(!report2.all_passed());
    CHECK(report2.find("macroscopic_current")->measured == doctest::Approx(1.0));
}

TEST_CASE("consistency report passes trivially at equilibrium") {
    TransportModel model;
    model.channel = ChannelSpec{5, 2.0, 1.0};
    model.trap = TrapSpec{1.0, 0.2, 0.2, 0.05};
    model.gamma_left = model.gamma_right = 0.5;

    Trajectory traj;
    for (int i = 0; i <= 100; ++i) {
        ObservableRecord r;
        r.time = 10.0 * i;
        r.site_density = Eigen::VectorXd::Constant(5, 0.3);
        r.bond_current = Eigen::VectorXd::Zero(4);
        r.mu_left = r.mu_right = 1.17;
        r.res_occupation_left = r.res_occupation_right = 0.3;
        r.population_left = r.population_right = 1000.0;
        r.macro_current = 0.0;
        r.max_distant_coherence = 0.0;
        traj.records.push_back(r);
        traj.times.push_back(r.time);
        traj.sigmas.push_back(Eigen::MatrixXcd::Identity(5, 5) * 0.3);
    }
    const Window meta = metastable_window(5.0, 100.0, 1000.0);
    const double g_meas = median_conductance(traj, meta); // nan: no bias anywhere
    const auto report =
        consistency_report(traj, model, 5.0, 100.0, 0.05, g_meas, 1000.0);
    CHECK(report.all_passed());
}
