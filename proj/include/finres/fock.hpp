#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "finres/dynamics.hpp"
#include "finres/lattice.hpp"
#include "finres/statistics.hpp"

namespace finres {

// Matrix representation of the site ladder operators on the truncated Fock
// space: Jordan-Wigner strings for fermions (dim 2^M), plain tensor products
// with occupation cutoff n_max for bosons (dim (n_max+1)^M). Desk scale only;
// dimensions are capped at 10^4.
struct LadderAlgebra {
    int sites = 0;
    Statistics stats = Statistics::fermi;
    int n_max = 1;
    long dim = 0;
    std::vector<Eigen::SparseMatrix<double>> lower; // a_i
    std::vector<Eigen::VectorXd> number_diag;       // diagonal of n_i

    Eigen::SparseMatrix<double> hamiltonian(const ChannelSpec& channel) const;
    Eigen::MatrixXcd spdm(const Eigen::MatrixXcd& rho) const;
};

LadderAlgebra build_algebra(int sites, Statistics stats, int n_max = 1);

// drho/dt = -i[H, rho] + gain_L D[a_1^dag] + loss_L D[a_1]
//                      + gain_R D[a_M^dag] + loss_R D[a_M]
Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho,
                              const LadderAlgebra& algebra,
                              const ChannelSpec& channel, const RateSet& rate_set);

struct OracleSample {
    double time;
    Eigen::MatrixXcd spdm;
    double mu_left, mu_right;
    double trace;
    double min_eigenvalue;
};

struct OracleTrajectory {
    std::vector<OracleSample> samples;
};

struct OracleOptions {
    double reltol = 1e-10;
    double abstol = 1e-13;
    int n_samples = 200;
};

// full many-body evolution with the same reservoir feedback as the
// single-particle engine; rates are rebuilt from mu each evaluation and the
// reservoirs are driven by <n_1>, <n_M>
OracleTrajectory evolve_coupled(const TransportModel& model, double mu_left0,
                                double mu_right0, double t_end, int n_max,
                                const OracleOptions& options = {});

struct ClosureReport {
    double max_sigma_deviation = 0.0;
    double max_mu_deviation = 0.0;
};

// runs the many-body oracle and the single-particle engine on the same
// problem and returns the largest discrepancies over the sampled times; this
// certifies the closed single-particle equation against the full master
// equation
ClosureReport certify_closure(const TransportModel& model, double mu_left0,
                              double mu_right0, double t_end, int n_max,
                              const OracleOptions& options = {});

} // namespace finres
