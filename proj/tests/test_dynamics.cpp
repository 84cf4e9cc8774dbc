#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "finres/analysis.hpp"
#include "finres/dynamics.hpp"
#include "finres/errors.hpp"

using namespace finres;

namespace {

TransportModel reference_model(int sites = 7) {
    TransportModel m;
    m.channel = ChannelSpec{sites, 2.0, 1.0};
    m.trap = TrapSpec{1.0, 0.2, 0.2, 0.05};
    m.gamma_left = 0.5;
    m.gamma_right = 0.5;
    m.stats = Statistics::fermi;
    return m;
}

Eigen::MatrixXcd random_valid_sigma(int m, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXcd a(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) a(r, c) = std::complex<double>(u(rng), u(rng));
    // hermitian with spectrum safely inside [0, 1]
    Eigen::MatrixXcd h = 0.5 * (a + a.adjoint());
    const double bound = h.cwiseAbs().rowwise().sum().maxCoeff();
    return 0.5 * Eigen::MatrixXcd::Identity(m, m) + 0.4 / bound * h;
}

} // namespace

TEST_CASE("rhs vanishes at the equilibrium fixed point") {
    const TransportModel model = reference_model();
    const auto eq = solve_equilibrium(2077.7097732006187, 7, 2.0, model.trap,
                                      Statistics::fermi);
    SystemState s;
    s.sigma = eq.n_inf * Eigen::MatrixXcd::Identity(7, 7);
    s.mu_left = eq.mu_inf;
    s.mu_right = eq.mu_inf;
    const StateDerivative d = transport_rhs(s, model);
    CHECK(d.dsigma.cwiseAbs().maxCoeff() < 1e-13);
    CHECK(std::abs(d.dmu_left) < 1e-16);
    CHECK(std::abs(d.dmu_right) < 1e-16);
}

TEST_CASE("rhs at the empty initial state") {
    const TransportModel model = reference_model();
    SystemState s;
    s.sigma = Eigen::MatrixXcd::Zero(7, 7);
    s.mu_left = 1.401;
    s.mu_right = 0.907;
    const StateDerivative d = transport_rhs(s, model);
    CHECK(d.dsigma(0, 0).real() == doctest::Approx(0.17728625566215611).epsilon(1e-12));
    CHECK(d.dsigma(6, 6).real() == doctest::Approx(0.12552688994426309).epsilon(1e-12));
    double off = 0.0;
    for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 7; ++c)
            if (!(r == c && (r == 0 || r == 6))) off = std::max(off, std::abs(d.dsigma(r, c)));
    CHECK(off == 0.0);
    CHECK(d.dmu_left == doctest::Approx(-0.00017305356170384812).epsilon(1e-10));
    CHECK(d.dmu_right > -2e-4);
}

TEST_CASE("rhs of a hermitian state is hermitian") {
    const TransportModel model = reference_model(5);
    std::mt19937 rng(99);
    for (int i = 0; i < 20; ++i) {
        SystemState s;
        s.sigma = random_valid_sigma(5, rng);
        s.mu_left = 1.2;
        s.mu_right = 0.9;
        const StateDerivative d = transport_rhs(s, model);
        CHECK((d.dsigma - d.dsigma.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("continuity and boundary balance at the rhs level") {
    const TransportModel model = reference_model(6);
    std::mt19937 rng(123);
    for (int i = 0; i < 20; ++i) {
        SystemState s;
        s.sigma = random_valid_sigma(6, rng);
        s.mu_left = 1.3;
        s.mu_right = 0.8;
        const StateDerivative d = transport_rhs(s, model);
        const ObservableRecord rec = observables(s, model);
        // interior sites: dn_m/dt = j_{m-1,m} - j_{m,m+1}
        for (int m = 1; m < 5; ++m)
            CHECK(d.dsigma(m, m).real() ==
                  doctest::Approx(rec.bond_current(m - 1) - rec.bond_current(m))
                      .epsilon(1e-12));
        // boundary: dn_1/dt + j_{12} equals the dissipative flux, which
        // balances the reservoir loss
        const double diss = d.dsigma(0, 0).real() + rec.bond_current(0);
        const double reservoir_gain =
            model.gamma_left * (rec.res_occupation_left - rec.site_density(0));
        CHECK(diss == doctest::Approx(reservoir_gain).epsilon(1e-12));
    }
}

TEST_CASE("observable definitions") {
    const TransportModel model = reference_model(3);
    SystemState s;
    s.sigma = Eigen::MatrixXcd::Zero(3, 3);
    s.sigma(0, 1) = std::complex<double>(0.0, 0.25);
    s.sigma(1, 0) = std::complex<double>(0.0, -0.25);
    s.mu_left = 1.0;
    s.mu_right = 1.0;
    const ObservableRecord rec = observables(s, model);
    CHECK(rec.bond_current(0) == doctest::Approx(0.5)); // 2 J Im sigma_01
    CHECK(rec.max_distant_coherence == 0.0);
}

TEST_CASE("decoupled channel evolves unitarily") {
    TransportModel model = reference_model(4);
    model.gamma_left = 0.0;
    model.gamma_right = 0.0;
    std::mt19937 rng(5);
    SystemState s0;
    s0.sigma = random_valid_sigma(4, rng);
    s0.mu_left = 1.0;
    s0.mu_right = 0.8;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es0(s0.sigma);
    IntegratorOptions opt;
    opt.reltol = 1e-10;
    opt.abstol = 1e-12;
    SamplingPolicy uniform{SamplingPolicy::Kind::uniform, 20};
    const Trajectory traj = integrate(s0, 50.0, model, opt, uniform);

    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(traj.sigmas[i].trace().real() ==
              doctest::Approx(s0.sigma.trace().real()).epsilon(1e-9));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(traj.sigmas[i]);
        for (int k = 0; k < 4; ++k)
            CHECK(es.eigenvalues()(k) ==
                  doctest::Approx(es0.eigenvalues()(k)).epsilon(1e-8));
        CHECK(traj.records[i].mu_left == s0.mu_left);
    }
}

TEST_CASE("frozen reservoirs match the matrix-exponential solution") {
    TransportModel model = reference_model(2);
    std::mt19937 rng(17);
    SystemState s0;
    s0.sigma = random_valid_sigma(2, rng);
    s0.mu_left = 1.401;
    s0.mu_right = 0.907;

    IntegratorOptions opt;
    opt.reltol = 1e-11;
    opt.abstol = 1e-13;
    opt.freeze_reservoirs = true;
    SamplingPolicy uniform{SamplingPolicy::Kind::uniform, 10};
    const double t_end = 5.0;
    const Trajectory traj = integrate(s0, t_end, model, opt, uniform);

    // with frozen potentials the equation is linear with constant
    // coefficients: dvec(sigma)/dt = (I (x) B + conj(B) (x) I) vec(sigma) + vec(G+)
    const double n_l = occupation(2.0, s0.mu_left, 1.0, Statistics::fermi);
    const double n_r = occupation(2.0, s0.mu_right, 1.0, Statistics::fermi);
    const RateSet rs = rates(n_l, n_r, 0.5, 0.5, Statistics::fermi);
    Eigen::MatrixXcd b = std::complex<double>(0, 1) * hamiltonian(model.channel)
                             .cast<std::complex<double>>();
    b(0, 0) -= 0.5 * model.gamma_left;
    b(1, 1) -= 0.5 * model.gamma_right;
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(2, 2);
    Eigen::MatrixXcd big(5, 5);
    big.setZero();
    big.topLeftCorner(4, 4) = Eigen::kroneckerProduct(eye, b).eval() +
                              Eigen::kroneckerProduct(b.conjugate(), eye).eval();
    big(0, 4) = rs.gain_left;
    big(3, 4) = rs.gain_right;
    Eigen::VectorXcd v0(5);
    v0 << s0.sigma(0, 0), s0.sigma(1, 0), s0.sigma(0, 1), s0.sigma(1, 1), 1.0;

    for (std::size_t i = 0; i < traj.size(); ++i) {
        const Eigen::MatrixXcd prop = (traj.times[i] * big).exp();
        const Eigen::VectorXcd v = prop * v0;
        Eigen::MatrixXcd expect(2, 2);
        expect << v(0), v(2), v(1), v(3);
        CHECK((traj.sigmas[i] - expect).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(traj.records[i].mu_left == s0.mu_left); // frozen
    }
}

TEST_CASE("conservation, contraction and monotone equilibration") {
    const TransportModel model = reference_model();
    const SystemState s0 = initial_state(model, 1.401, 0.907);
    const double total0 = conserved_total(s0, model);

    IntegratorOptions opt; // default tolerances
    SamplingPolicy uniform{SamplingPolicy::Kind::uniform, 300};
    const double t_end = 2000.0;
    const Trajectory traj = integrate(s0, t_end, model, opt, uniform);

    const double tau_rel = relaxation_time(model.channel, 0.5);
    double last_bias = 1e300;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& r = traj.records[i];
        const double total =
            r.population_left + r.population_right + traj.sigmas[i].trace().real();
        CHECK(std::abs(total - total0) / total0 < 1e-8);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(traj.sigmas[i],
                                                           Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > -1e-8);
        CHECK(es.eigenvalues().maxCoeff() < 1.0 + 1e-8);

        if (r.time > 10.0 * tau_rel) {
            const double bias = std::abs(r.mu_left - r.mu_right);
            CHECK(bias <= last_bias + 1e-12);
            last_bias = bias;
        }
    }
}

TEST_CASE("persistent equilibrium start stays quiet") {
    const TransportModel model = reference_model(5);
    const double mu0 = 1.1;
    const double fill = occupation(2.0, mu0, 1.0, Statistics::fermi);
    const SystemState s0 = initial_state(model, mu0, mu0, fill);
    SamplingPolicy uniform{SamplingPolicy::Kind::uniform, 50};
    const Trajectory traj = integrate(s0, 300.0, model, {}, uniform);
    for (const auto& r : traj.records) {
        for (int b = 0; b < r.bond_current.size(); ++b)
            CHECK(std::abs(r.bond_current(b)) < 1e-12);
        CHECK(std::abs(r.macro_current) < 1e-12);
    }
}

TEST_CASE("identical configuration gives bit-identical trajectories") {
    const TransportModel model = reference_model(3);
    const SystemState s0 = initial_state(model, 1.2, 0.9);
    SamplingPolicy log{SamplingPolicy::Kind::logarithmic, 60};
    const Trajectory a = integrate(s0, 100.0, model, {}, log);
    const Trajectory b = integrate(s0, 100.0, model, {}, log);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.times[i] == b.times[i]);
        CHECK((a.sigmas[i] - b.sigmas[i]).cwiseAbs().maxCoeff() == 0.0);
        CHECK(a.records[i].mu_left == b.records[i].mu_left);
        CHECK(a.records[i].macro_current == b.records[i].macro_current);
    }
}

TEST_CASE("sampling grids") {
    const TransportModel model = reference_model();
    SamplingPolicy log{SamplingPolicy::Kind::logarithmic, 100};
    const auto g = sample_grid(log, 10.0, model);
    CHECK(g.front() == 0.0);
    CHECK(g[1] == doctest::Approx(1e-4));
    CHECK(g.back() == 10.0);

    SamplingPolicy autop;
    const auto ga = sample_grid(autop, 50000.0, model);
    CHECK(ga.front() == 0.0);
    CHECK(ga.back() == 50000.0);
    CHECK(int(ga.size()) >= autop.count / 2);
    for (std::size_t i = 1; i < ga.size(); ++i) CHECK(ga[i] > ga[i - 1]);
}

TEST_CASE("integrate validates its inputs") {
    const TransportModel model = reference_model(2);
    SystemState s0 = initial_state(model, 1.0, 0.9);
    CHECK_THROWS_AS((void)integrate(s0, -1.0, model), domain_error);
    IntegratorOptions bad;
    bad.reltol = 2.0;
    CHECK_THROWS_AS((void)integrate(s0, 1.0, model, bad), domain_error);
    s0.sigma(0, 1) = 0.5; // not hermitian
    CHECK_THROWS_AS((void)integrate(s0, 1.0, model), domain_error);
}
