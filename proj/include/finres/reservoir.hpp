#pragma once

#include "finres/statistics.hpp"

namespace finres {

// Reservoir modelled as a 3D anisotropic harmonic trap in a grand-canonical
// state at fixed inverse temperature beta. Energies are measured in units of
// the channel tunnelling strength, times in its inverse (hbar = 1).
struct TrapSpec {
    double beta = 1.0;
    double omega_x = 0.2;
    double omega_y = 0.2;
    double omega_z = 0.05;

    double ground_energy() const { return 0.5 * (omega_x + omega_y + omega_z); }
    double omega_product() const { return omega_x * omega_y * omega_z; }
    void validate() const;
};

// bosonic chemical potentials are kept below E0 by this much; no condensate
inline constexpr double kBoseMuMargin = 1e-6;

// thermal occupation 1/(e^{beta(eps-mu)} - s)
double occupation(double eps, double mu, double beta, Statistics stats);

// equilibrium number variance n(1 + s n)
double occupation_variance(double n, Statistics stats);

// semiclassical density of states (eps - E0)^2 / (2 wx wy wz)
double density_of_states(double eps, const TrapSpec& trap);

// N(mu) = integral D(eps) n(eps, mu) deps, closed form via Li3
double population(double mu, const TrapSpec& trap, Statistics stats);

// independent route for N(mu): adaptive Gauss-Kronrod quadrature
double population_by_quadrature(double mu, const TrapSpec& trap, Statistics stats);

// dN/dmu > 0, closed form via Li2
double population_slope(double mu, const TrapSpec& trap, Statistics stats);

// quadrature route for dN/dmu: integral D(eps) beta n(1+sn) deps
double population_slope_by_quadrature(double mu, const TrapSpec& trap, Statistics stats);

// inverse of population(); bracketed root find, |N(mu)-N|/N < 1e-10
double mu_from_population(double number, const TrapSpec& trap, Statistics stats);

struct EquilibriumResult {
    double mu_inf;  // common chemical potential of the equilibrated system
    double n_inf;   // resonant occupation at the channel energy
    double N_inf;   // per-reservoir population
};

// solves 2 N(mu) + sites * n(site_energy, mu) = total_number
EquilibriumResult solve_equilibrium(double total_number, int sites,
                                    double site_energy, const TrapSpec& trap,
                                    Statistics stats);

// limiting resonant occupation as mu -> E0: (e^{beta(eps_s - E0)} - s)^-1
double occupation_limit(double site_energy, const TrapSpec& trap, Statistics stats);

} // namespace finres
