#include "finres/reservoir.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "finres/errors.hpp"
#include "finres/polylog.hpp"

namespace finres {

namespace {

// safeguarded secant/bisection on a strictly increasing function; bracket
// [lo, hi] must straddle the root
double solve_increasing(const std::function<double(double)>& f, double lo,
                        double hi, double xtol) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo > 0.0 || fhi < 0.0) throw numeric_error("root bracket lost");
    for (int it = 0; it < 400 && hi - lo > xtol; ++it) {
        double mid;
        if (fhi > flo) {
            mid = lo + (hi - lo) * (-flo) / (fhi - flo); // secant
            const double pad = 0.01 * (hi - lo);
            if (!(mid > lo + pad) || !(mid < hi - pad)) mid = 0.5 * (lo + hi);
        } else {
            mid = 0.5 * (lo + hi);
        }
        const double fm = f(mid);
        if (fm < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

void TrapSpec::validate() const {
    if (!(beta > 0.0)) throw domain_error("trap requires beta > 0");
    if (!(omega_x > 0.0 && omega_y > 0.0 && omega_z > 0.0))
        throw domain_error("trap requires all omegas > 0");
}

double occupation(double eps, double mu, double beta, Statistics stats) {
    const double x = beta * (eps - mu);
    if (stats == Statistics::bose) {
        if (!(x > 0.0))
            throw domain_error("bose occupation requires eps > mu (divergent otherwise)");
        if (x > 700.0) return std::exp(-x);
        return 1.0 / std::expm1(x);
    }
    if (x > 700.0) return std::exp(-x);
    return 1.0 / (std::exp(x) + 1.0);
}

double occupation_variance(double n, Statistics stats) {
    if (!(n >= 0.0)) throw domain_error("occupation must be non-negative");
    if (stats == Statistics::fermi && n > 1.0)
        throw domain_error("fermionic occupation cannot exceed 1");
    return n * (1.0 + statistics_sign(stats) * n);
}

double density_of_states(double eps, const TrapSpec& trap) {
    trap.validate();
    const double e0 = trap.ground_energy();
    if (eps < e0) throw domain_error("density of states defined for eps >= E0");
    const double x = eps - e0;
    return x * x / (2.0 * trap.omega_product());
}

namespace {

// s * Li3(s e^eta) and s * Li2(s e^eta), the statistics-resolved integrals
double stat_li3(double eta, Statistics stats) {
    if (stats == Statistics::bose) return polylog3(std::exp(eta));
    return -polylog3_neg_exp(eta);
}

double stat_li2(double eta, Statistics stats) {
    if (stats == Statistics::bose) return polylog2(std::exp(eta));
    return -polylog2_neg_exp(eta);
}

void check_bose_mu(double mu, const TrapSpec& trap, Statistics stats) {
    if (stats == Statistics::bose &&
        !(mu <= trap.ground_energy() - kBoseMuMargin)) {
        std::ostringstream msg;
        msg << "bose chemical potential must stay below the trap ground state "
               "energy E0 = "
            << trap.ground_energy() << " by at least " << kBoseMuMargin;
        throw domain_error(msg.str());
    }
}

} // namespace

double population(double mu, const TrapSpec& trap, Statistics stats) {
    trap.validate();
    check_bose_mu(mu, trap, stats);
    const double eta = trap.beta * (mu - trap.ground_energy());
    const double b3 = trap.beta * trap.beta * trap.beta;
    return stat_li3(eta, stats) / (b3 * trap.omega_product());
}

double population_slope(double mu, const TrapSpec& trap, Statistics stats) {
    trap.validate();
    check_bose_mu(mu, trap, stats);
    const double eta = trap.beta * (mu - trap.ground_energy());
    const double b2 = trap.beta * trap.beta;
    return stat_li2(eta, stats) / (b2 * trap.omega_product());
}

namespace {

double quadrature(const std::function<double(double)>& f, double a) {
    double err = 0.0;
    const double val = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, std::numeric_limits<double>::infinity(), 15, 1e-13, &err);
    if (!(err <= 1e-8 * std::max(1.0, std::abs(val))))
        throw numeric_error("population quadrature did not converge");
    return val;
}

} // namespace

double population_by_quadrature(double mu, const TrapSpec& trap, Statistics stats) {
    trap.validate();
    check_bose_mu(mu, trap, stats);
    return quadrature(
        [&](double eps) {
            return density_of_states(eps, trap) * occupation(eps, mu, trap.beta, stats);
        },
        trap.ground_energy());
}

double population_slope_by_quadrature(double mu, const TrapSpec& trap,
                                      Statistics stats) {
    trap.validate();
    check_bose_mu(mu, trap, stats);
    return quadrature(
        [&](double eps) {
            const double n = occupation(eps, mu, trap.beta, stats);
            return density_of_states(eps, trap) * trap.beta *
                   occupation_variance(n, stats);
        },
        trap.ground_energy());
}

double mu_from_population(double number, const TrapSpec& trap, Statistics stats) {
    trap.validate();
    if (!(number > 0.0)) throw domain_error("target particle number must be > 0");

    const double e0 = trap.ground_energy();
    double hi;
    if (stats == Statistics::bose) {
        hi = e0 - kBoseMuMargin;
        const double cap = population(hi, trap, stats);
        if (number >= cap) {
            std::ostringstream msg;
            msg << "bose reservoir capacity exceeded: N = " << number
                << " but N(mu = E0 - " << kBoseMuMargin << ") = " << cap;
            throw domain_error(msg.str());
        }
    } else {
        // Boltzmann seed, then expand upward until bracketed
        hi = e0 + std::log(std::max(number * trap.beta * trap.beta * trap.beta *
                                        trap.omega_product(),
                                    1e-200)) /
                      trap.beta +
             2.0 / trap.beta;
        for (int it = 0; population(hi, trap, stats) < number; ++it) {
            if (it > 200) throw numeric_error("mu bracket expansion failed");
            hi = e0 + 2.0 * std::max(1.0, hi - e0);
        }
    }
    double lo = std::min(hi, e0) - 1.0 / trap.beta;
    for (int it = 0; population(lo, trap, stats) > number; ++it) {
        if (it > 200) throw numeric_error("mu bracket expansion failed");
        lo -= 2.0 * std::max(1.0, std::abs(lo - e0));
    }
    return solve_increasing(
        [&](double mu) { return population(mu, trap, stats) - number; }, lo, hi,
        1e-12);
}

EquilibriumResult solve_equilibrium(double total_number, int sites,
                                    double site_energy, const TrapSpec& trap,
                                    Statistics stats) {
    trap.validate();
    if (!(total_number > 0.0)) throw domain_error("total particle number must be > 0");
    if (sites < 0) throw domain_error("site count must be non-negative");

    const auto balance = [&](double mu) {
        double n = 0.0;
        if (sites > 0) n = occupation(site_energy, mu, trap.beta, stats);
        return 2.0 * population(mu, trap, stats) + sites * n - total_number;
    };

    const double e0 = trap.ground_energy();
    double hi;
    if (stats == Statistics::bose) {
        if (sites > 0 && !(site_energy > e0))
            throw domain_error("bose equilibrium requires site energy above E0");
        hi = e0 - kBoseMuMargin;
        if (balance(hi) < 0.0) {
            std::ostringstream msg;
            msg << "bose capacity exceeded: N0 = " << total_number
                << " but the system holds at most " << balance(hi) + total_number
                << " at mu = E0 - " << kBoseMuMargin;
            throw domain_error(msg.str());
        }
    } else {
        hi = mu_from_population(0.5 * total_number, trap, stats) + 1.0 / trap.beta;
        for (int it = 0; balance(hi) < 0.0; ++it) {
            if (it > 200) throw numeric_error("equilibrium bracket expansion failed");
            hi = e0 + 2.0 * std::max(1.0, hi - e0);
        }
    }
    double lo = std::min(hi, e0) - 1.0 / trap.beta;
    for (int it = 0; balance(lo) > 0.0; ++it) {
        if (it > 200) throw numeric_error("equilibrium bracket expansion failed");
        lo -= 2.0 * std::max(1.0, std::abs(lo - e0));
    }
    const double mu = solve_increasing(balance, lo, hi, 1e-12);

    EquilibriumResult res;
    res.mu_inf = mu;
    res.n_inf = sites > 0 ? occupation(site_energy, mu, trap.beta, stats) : 0.0;
    res.N_inf = population(mu, trap, stats);
    if (!(std::abs(balance(mu)) <= 1e-10 * total_number))
        throw numeric_error("equilibrium solve residual above tolerance");
    return res;
}

double occupation_limit(double site_energy, const TrapSpec& trap, Statistics stats) {
    trap.validate();
    const double e0 = trap.ground_energy();
    if (!(site_energy > e0))
        throw domain_error("occupation limit requires site energy above E0");
    return occupation(site_energy, e0, trap.beta, stats);
}

} // namespace finres
