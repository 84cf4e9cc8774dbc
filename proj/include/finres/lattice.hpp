#pragma once

#include <Eigen/Core>

#include "finres/statistics.hpp"

namespace finres {

// Uniform tight-binding channel of `sites` sites with on-site energy
// `site_energy` and nearest-neighbour tunnelling `hopping` (the energy unit).
struct ChannelSpec {
    int sites = 2;
    double site_energy = 0.0;
    double hopping = 1.0;
    void validate() const;
};

// instantaneous injection/extraction rates at the two boundary sites
struct RateSet {
    double gain_left;
    double loss_left;
    double gain_right;
    double loss_right;
};

// tridiagonal single-particle Hamiltonian: site_energy on the diagonal,
// -hopping on the sub/super diagonals
Eigen::MatrixXd hamiltonian(const ChannelSpec& channel);

// gain = gamma * n, loss = gamma * (1 + s n); for either statistics
// loss - s * gain = gamma exactly
RateSet rates(double n_left, double n_right, double gamma_left,
              double gamma_right, Statistics stats);

// h - (i/2)(gamma_L P_1 + gamma_R P_M); time independent because the damping
// loss - s*gain on the boundary sites equals gamma regardless of occupation
Eigen::MatrixXcd effective_hamiltonian(const ChannelSpec& channel,
                                       double gamma_left, double gamma_right);

// slowest coherence decay time 1/(2 min_k |Im lambda_k|) of the effective
// non-hermitian Hamiltonian with equal couplings
double relaxation_time(const ChannelSpec& channel, double gamma);

} // namespace finres
