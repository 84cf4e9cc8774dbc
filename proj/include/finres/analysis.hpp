#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "finres/dynamics.hpp"
#include "finres/statistics.hpp"

namespace finres {

// quasi-stationary transport state: homogeneous bond current riding on a
// flat population profile with antisymmetric boundary offsets
struct MetastablePrediction {
    double mean_density;     // (n_L + n_R)/2
    double density_bias;     // n_L - n_R
    double boundary_offset;  // gamma^2 bias / (2 (4J^2 + gamma^2))
    double current;
    Eigen::VectorXd profile; // n_1 .. n_M
};

// j = 2 gamma J^2 / (4J^2 + gamma^2) * density_bias
double metastable_current(double density_bias, double gamma, double hopping);

MetastablePrediction metastable_profile(double n_left, double n_right,
                                        double gamma, double hopping, int sites);

// reservoir rebalancing time (population_bias/density_bias) (4J^2+gamma^2)/(4 gamma J^2)
double tau_eq_estimate(double population_bias, double density_bias, double gamma,
                       double hopping);

struct ConductancePrediction {
    double value;       // beta n (1 + s n) 2 gamma J^2/(4J^2+gamma^2)
    double fermi_bound; // beta gamma J^2 / (2 (4J^2+gamma^2))
};

ConductancePrediction conductance(double n_inf, double beta, double gamma,
                                  double hopping, Statistics stats);

struct Window {
    double lo = 0.0;
    double hi = 0.0;
    bool valid() const { return hi > lo; }
    bool contains(double t) const { return t >= lo && t <= hi; }
};

// clears the coherent transient while the bias is still decaying exponentially
Window metastable_window(double tau_rel, double tau_eq, double t_end);
// late-time regime where the linearised reservoir equations apply
Window asymptotic_window(double tau_eq, double t_end);

struct FitResult {
    double rate;
    double amplitude;
    Window window;
    double rms_residual; // in log space
};

// linear least squares of log|x - asymptote| against t
FitResult fit_exponential(std::span<const double> t, std::span<const double> x,
                          double asymptote, Window window);

// least-squares slope of log x against log t
double fit_power_law(std::span<const double> t, std::span<const double> x,
                     Window window);

// early-time growth exponent of |sigma_jk|: M - |j + k - (M+1)|, 1-based indices
int short_time_exponent(int sites, int j, int k);

// median of I/(mu_L - mu_R) over the window
double median_conductance(const Trajectory& traj, Window window);

struct ConsistencyCheck {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool evaluated = false;
    bool passed = true;
};

struct ConsistencyReport {
    std::vector<ConsistencyCheck> checks;
    bool all_passed() const;
    const ConsistencyCheck* find(const std::string& name) const;
};

// certifies the quasi-stationary relations on a simulated trajectory:
// bond-current homogeneity, the metastable current and population-ladder
// forms, internal/macroscopic current identity, the ohmic decay law and the
// conductance value; windowed medians, thresholds pinned by the acceptance
// suite. Denominators below 1e-12 are treated as exact zeros (an equilibrium
// run passes trivially).
ConsistencyReport consistency_report(const Trajectory& traj,
                                     const TransportModel& model, double tau_rel,
                                     double tau_eq, double G_formula,
                                     double G_measured, double t_end);

struct Summary {
    double tau_rel = 0.0;
    double tau_eq_formula = 0.0;
    double tau_eq_fitted = 0.0;     // from the bias decay rate
    double nbar_decay_rate = 0.0;   // fitted; 2/tau_eq in the asymptotic regime
    double mu_inf = 0.0;
    double n_inf = 0.0;
    double N_inf = 0.0;
    double G_formula = 0.0;
    double G_measured = 0.0;
    double G_fermi_bound = 0.0;
    ConsistencyReport consistency;
    bool checks_passed = true;
};

} // namespace finres
