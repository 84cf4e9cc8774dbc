#include "finres/lattice.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Eigenvalues>

#include "finres/errors.hpp"

namespace finres {

void ChannelSpec::validate() const {
    if (sites < 2)
        throw domain_error("channel needs at least 2 sites (one per reservoir)");
    if (!(hopping > 0.0)) throw domain_error("tunnelling strength must be > 0");
    if (!std::isfinite(site_energy)) throw domain_error("site energy must be finite");
}

Eigen::MatrixXd hamiltonian(const ChannelSpec& channel) {
    channel.validate();
    const int m = channel.sites;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        h(i, i) = channel.site_energy;
        if (i + 1 < m) {
            h(i, i + 1) = -channel.hopping;
            h(i + 1, i) = -channel.hopping;
        }
    }
    return h;
}

RateSet rates(double n_left, double n_right, double gamma_left,
              double gamma_right, Statistics stats) {
    if (!(n_left >= 0.0 && n_right >= 0.0))
        throw domain_error("occupations must be non-negative");
    if (stats == Statistics::fermi && (n_left > 1.0 || n_right > 1.0))
        throw domain_error("fermionic occupation cannot exceed 1");
    if (!(gamma_left >= 0.0 && gamma_right >= 0.0))
        throw domain_error("couplings must be non-negative");
    const double s = statistics_sign(stats);
    return RateSet{gamma_left * n_left, gamma_left * (1.0 + s * n_left),
                   gamma_right * n_right, gamma_right * (1.0 + s * n_right)};
}

Eigen::MatrixXcd effective_hamiltonian(const ChannelSpec& channel,
                                       double gamma_left, double gamma_right) {
    const int m = channel.sites;
    Eigen::MatrixXcd heff = hamiltonian(channel).cast<std::complex<double>>();
    heff(0, 0) -= std::complex<double>(0.0, 0.5 * gamma_left);
    heff(m - 1, m - 1) -= std::complex<double>(0.0, 0.5 * gamma_right);
    return heff;
}

double relaxation_time(const ChannelSpec& channel, double gamma) {
    if (!(gamma > 0.0)) throw domain_error("relaxation time requires gamma > 0");
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(
        effective_hamiltonian(channel, gamma, gamma), false);
    if (solver.info() != Eigen::Success)
        throw numeric_error("effective Hamiltonian eigensolve failed");
    double gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < channel.sites; ++k)
        gap = std::min(gap, std::abs(solver.eigenvalues()(k).imag()));
    return 1.0 / (2.0 * gap);
}

} // namespace finres
