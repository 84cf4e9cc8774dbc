#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "finres/lattice.hpp"
#include "finres/reservoir.hpp"
#include "finres/statistics.hpp"

namespace finres {

// channel + two identical traps + boundary couplings; the complete model
struct TransportModel {
    ChannelSpec channel;
    TrapSpec trap;
    double gamma_left = 0.5;
    double gamma_right = 0.5;
    Statistics stats = Statistics::fermi;
    void validate() const;
};

// dynamical variables: single-particle density matrix sigma_jk = <a_j^dag a_k>
// plus the two reservoir chemical potentials
struct SystemState {
    double time = 0.0;
    Eigen::MatrixXcd sigma;
    double mu_left = 0.0;
    double mu_right = 0.0;
};

struct StateDerivative {
    Eigen::MatrixXcd dsigma;
    double dmu_left;
    double dmu_right;
};

struct ObservableRecord {
    double time;
    Eigen::VectorXd site_density;          // n_i = Re sigma_ii
    Eigen::VectorXd bond_current;          // j_{i,i+1} = 2 J Im sigma_{i,i+1}
    double mu_left, mu_right;
    double res_occupation_left, res_occupation_right;  // n_{L,R}(eps_s)
    double population_left, population_right;          // N_{L,R}
    double macro_current;                  // I = -(dN_L/dt - dN_R/dt)/2
    double max_distant_coherence;          // max |sigma_jk| over |j-k| > 1
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::MatrixXcd> sigmas;
    std::vector<ObservableRecord> records;
    std::size_t size() const { return times.size(); }
};

struct SamplingPolicy {
    enum class Kind { automatic, uniform, logarithmic, every_step };
    Kind kind = Kind::automatic;
    int count = 2000;

    bool operator==(const SamplingPolicy&) const = default;
    static SamplingPolicy parse(const std::string& text);
    std::string render() const;
};

struct IntegratorOptions {
    double reltol = 1e-8;
    double abstol = 1e-10;
    bool freeze_reservoirs = false; // hold mu_L, mu_R fixed (linear dynamics)
};

// coupled equations of motion:
//   dsigma/dt = i[h, sigma] - 1/2 {W, sigma} + G+
//   dmu_X/dt  = gamma_X (n_boundary - n_X(eps_s)) / (dN/dmu)(mu_X)
// with W = G- - s G+ diagonal (equal to gamma_X on the boundary sites)
StateDerivative transport_rhs(const SystemState& state, const TransportModel& model);

ObservableRecord observables(const SystemState& state, const TransportModel& model);

// sigma(0) = fill * Identity with the given chemical potentials
SystemState initial_state(const TransportModel& model, double mu_left0,
                          double mu_right0, double fill = 0.0);

// N_L + N_R + tr sigma, the conserved total particle number
double conserved_total(const SystemState& state, const TransportModel& model);

Trajectory integrate(const SystemState& start, double t_end,
                     const TransportModel& model,
                     const IntegratorOptions& options = {},
                     const SamplingPolicy& sampling = {});

// sample grid used by integrate() for the given policy (exposed for tests)
std::vector<double> sample_grid(const SamplingPolicy& sampling, double t_end,
                                const TransportModel& model);

} // namespace finres
