#include "finres/fock.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "finres/errors.hpp"
#include "finres/ode.hpp"
#include "finres/reservoir.hpp"

namespace finres {

namespace {

constexpr long kDimCap = 10000;

long int_pow(long base, int exp) {
    long r = 1;
    for (int i = 0; i < exp; ++i) {
        r *= base;
        if (r > 4 * kDimCap) return r; // avoid overflow, caller rejects anyway
    }
    return r;
}

} // namespace

LadderAlgebra build_algebra(int sites, Statistics stats, int n_max) {
    if (sites < 1) throw domain_error("algebra needs at least one site");
    long dim;
    if (stats == Statistics::fermi) {
        if (sites > 10) throw domain_error("fermionic oracle capped at 10 sites");
        n_max = 1;
        dim = int_pow(2, sites);
    } else {
        if (n_max < 1) throw domain_error("boson cutoff must be at least 1");
        dim = int_pow(long(n_max) + 1, sites);
        if (dim > kDimCap) {
            std::ostringstream msg;
            msg << "oracle dimension " << dim << " exceeds the cap " << kDimCap;
            throw domain_error(msg.str());
        }
    }

    LadderAlgebra alg;
    alg.sites = sites;
    alg.stats = stats;
    alg.n_max = n_max;
    alg.dim = dim;

    const long local = stats == Statistics::fermi ? 2 : long(n_max) + 1;
    // strides: site 1 is the most significant digit of the basis index
    std::vector<long> stride(sites);
    stride[sites - 1] = 1;
    for (int i = sites - 2; i >= 0; --i) stride[i] = stride[i + 1] * local;

    auto digit = [&](long state, int site) { return (state / stride[site]) % local; };

    for (int i = 0; i < sites; ++i) {
        std::vector<Eigen::Triplet<double>> trip;
        Eigen::VectorXd ndiag(dim);
        for (long s = 0; s < dim; ++s) {
            const long n = digit(s, i);
            ndiag(s) = double(n);
            if (n == 0) continue;
            const long target = s - stride[i];
            double amp;
            if (stats == Statistics::fermi) {
                // Jordan-Wigner string: parity of the occupied sites in front
                long parity = 0;
                for (int p = 0; p < i; ++p) parity += digit(s, p);
                amp = parity % 2 ? -1.0 : 1.0;
            } else {
                amp = std::sqrt(double(n));
            }
            trip.emplace_back(int(target), int(s), amp);
        }
        Eigen::SparseMatrix<double> a(dim, dim);
        a.setFromTriplets(trip.begin(), trip.end());
        alg.lower.push_back(std::move(a));
        alg.number_diag.push_back(std::move(ndiag));
    }
    return alg;
}

Eigen::SparseMatrix<double> LadderAlgebra::hamiltonian(const ChannelSpec& channel) const {
    if (channel.sites != sites) throw domain_error("channel size does not match algebra");
    Eigen::SparseMatrix<double> h(dim, dim);
    for (int i = 0; i < sites; ++i) {
        Eigen::SparseMatrix<double> diag(dim, dim);
        std::vector<Eigen::Triplet<double>> trip;
        for (long s = 0; s < dim; ++s)
            if (number_diag[i](s) != 0.0)
                trip.emplace_back(int(s), int(s), channel.site_energy * number_diag[i](s));
        diag.setFromTriplets(trip.begin(), trip.end());
        h += diag;
        if (i + 1 < sites) {
            const Eigen::SparseMatrix<double> hopping =
                Eigen::SparseMatrix<double>(lower[i].transpose()) * lower[i + 1];
            h -= channel.hopping * hopping;
            h -= channel.hopping * Eigen::SparseMatrix<double>(hopping.transpose());
        }
    }
    h.makeCompressed();
    return h;
}

Eigen::MatrixXcd LadderAlgebra::spdm(const Eigen::MatrixXcd& rho) const {
    Eigen::MatrixXcd sigma(sites, sites);
    for (int k = 0; k < sites; ++k) {
        // column k: sigma_jk = tr(a_j^dag (a_k rho)); a nonzero (a_j)_{t,s}
        // contributes amp * (a_k rho)_{t,s}
        const Eigen::MatrixXcd ak_rho = lower[k].cast<std::complex<double>>() * rho;
        for (int j = 0; j < sites; ++j) {
            std::complex<double> acc(0.0, 0.0);
            const auto& aj = lower[j];
            for (int outer = 0; outer < aj.outerSize(); ++outer)
                for (Eigen::SparseMatrix<double>::InnerIterator it(aj, outer); it; ++it)
                    acc += it.value() * ak_rho(it.row(), it.col());
            sigma(j, k) = acc;
        }
    }
    return sigma;
}

namespace {

// cached superoperator pieces for one dissipation channel
struct JumpChannel {
    Eigen::SparseMatrix<std::complex<double>> op;      // A
    Eigen::SparseMatrix<std::complex<double>> op_dag;  // A^dag
    Eigen::VectorXd weight;                            // diagonal of A^dag A
};

JumpChannel make_jump_channel(const LadderAlgebra& algebra, int site, bool raising) {
    JumpChannel ch;
    const Eigen::SparseMatrix<double>& a = algebra.lower[site];
    const Eigen::SparseMatrix<double> op =
        raising ? Eigen::SparseMatrix<double>(a.transpose()) : a;
    ch.op = op.cast<std::complex<double>>();
    ch.op_dag = Eigen::SparseMatrix<double>(op.transpose()).cast<std::complex<double>>();
    // A^dag A is diagonal for site ladder operators: n_i, 1 - n_i or 1 + n_i
    const Eigen::VectorXd& n = algebra.number_diag[site];
    if (!raising) {
        ch.weight = n;
    } else if (algebra.stats == Statistics::fermi) {
        ch.weight = Eigen::VectorXd::Ones(algebra.dim) - n;
    } else {
        ch.weight = Eigen::VectorXd::Ones(algebra.dim) + n;
    }
    return ch;
}

// out += rate * (A rho A^dag - 1/2 {A^dag A, rho})
void apply_dissipator(const JumpChannel& ch, double rate, const Eigen::MatrixXcd& rho,
                      Eigen::MatrixXcd& out, Eigen::MatrixXcd& work) {
    if (rate == 0.0) return;
    work.noalias() = ch.op * rho;
    out.noalias() += rate * (work * ch.op_dag);
    const long d = rho.rows();
    for (long c = 0; c < d; ++c)
        for (long r = 0; r < d; ++r)
            out(r, c) -= 0.5 * rate * (ch.weight(r) + ch.weight(c)) * rho(r, c);
}

class FockSystem {
public:
    FockSystem(const TransportModel& model, int n_max)
        : model_(model),
          algebra_(build_algebra(model.channel.sites, model.stats, n_max)) {
        h_ = algebra_.hamiltonian(model.channel).cast<std::complex<double>>();
        const int m = model.channel.sites;
        gain_left_ = make_jump_channel(algebra_, 0, true);
        loss_left_ = make_jump_channel(algebra_, 0, false);
        gain_right_ = make_jump_channel(algebra_, m - 1, true);
        loss_right_ = make_jump_channel(algebra_, m - 1, false);
        rho_.resize(algebra_.dim, algebra_.dim);
        drho_.resize(algebra_.dim, algebra_.dim);
        work_.resize(algebra_.dim, algebra_.dim);
    }

    const LadderAlgebra& algebra() const { return algebra_; }
    long dim() const { return algebra_.dim; }
    Eigen::Index packed_size() const { return 2 * dim() * dim() + 2; }

    void pack(const Eigen::MatrixXcd& rho, double mu_l, double mu_r,
              Eigen::VectorXd& y) const {
        const long d = dim();
        y.resize(packed_size());
        for (long c = 0; c < d; ++c)
            for (long r = 0; r < d; ++r) {
                y(c * d + r) = rho(r, c).real();
                y(d * d + c * d + r) = rho(r, c).imag();
            }
        y(2 * d * d) = mu_l;
        y(2 * d * d + 1) = mu_r;
    }

    void unpack(const Eigen::VectorXd& y, Eigen::MatrixXcd& rho, double& mu_l,
                double& mu_r) const {
        const long d = dim();
        rho.resize(d, d);
        for (long c = 0; c < d; ++c)
            for (long r = 0; r < d; ++r)
                rho(r, c) = std::complex<double>(y(c * d + r), y(d * d + c * d + r));
        mu_l = y(2 * d * d);
        mu_r = y(2 * d * d + 1);
    }

    void hermitize(Eigen::VectorXd& y) const {
        const long d = dim();
        for (long c = 0; c < d; ++c) {
            y(d * d + c * d + c) = 0.0;
            for (long r = c + 1; r < d; ++r) {
                const long rc = c * d + r, cr = r * d + c;
                const double re = 0.5 * (y(rc) + y(cr));
                y(rc) = re;
                y(cr) = re;
                const double im = 0.5 * (y(d * d + rc) - y(d * d + cr));
                y(d * d + rc) = im;
                y(d * d + cr) = -im;
            }
        }
    }

    void operator()(double /*t*/, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
        double mu_l, mu_r;
        unpack(y, rho_, mu_l, mu_r);
        const double eps = model_.channel.site_energy;
        const double beta = model_.trap.beta;
        const double n_l = occupation(eps, mu_l, beta, model_.stats);
        const double n_r = occupation(eps, mu_r, beta, model_.stats);
        const RateSet rs =
            rates(n_l, n_r, model_.gamma_left, model_.gamma_right, model_.stats);

        rhs_into(rho_, rs, drho_);

        const long d = dim();
        dydt.resize(packed_size());
        for (long c = 0; c < d; ++c)
            for (long r = 0; r < d; ++r) {
                dydt(c * d + r) = drho_(r, c).real();
                dydt(d * d + c * d + r) = drho_(r, c).imag();
            }

        const int m = model_.channel.sites;
        const double nb_l = expectation(algebra_.number_diag[0], rho_);
        const double nb_r = expectation(algebra_.number_diag[m - 1], rho_);
        dydt(2 * d * d) = mu_rate(mu_l, n_l, nb_l, model_.gamma_left);
        dydt(2 * d * d + 1) = mu_rate(mu_r, n_r, nb_r, model_.gamma_right);
    }

    void rhs_into(const Eigen::MatrixXcd& rho, const RateSet& rs,
                  Eigen::MatrixXcd& out) {
        const std::complex<double> mi(0.0, -1.0);
        out.noalias() = mi * (h_ * rho);
        out.noalias() -= mi * (rho * h_);
        apply_dissipator(gain_left_, rs.gain_left, rho, out, work_);
        apply_dissipator(loss_left_, rs.loss_left, rho, out, work_);
        apply_dissipator(gain_right_, rs.gain_right, rho, out, work_);
        apply_dissipator(loss_right_, rs.loss_right, rho, out, work_);
    }

private:
    double expectation(const Eigen::VectorXd& diag, const Eigen::MatrixXcd& rho) const {
        double acc = 0.0;
        for (long s = 0; s < dim(); ++s) acc += diag(s) * rho(s, s).real();
        return acc;
    }

    double mu_rate(double mu, double n_res, double n_boundary, double gamma) const {
        if (gamma == 0.0) return 0.0;
        const double slope = population_slope(mu, model_.trap, model_.stats);
        if (!(slope > 1e-300)) throw numeric_error("reservoir exhausted in oracle run");
        return gamma * (n_boundary - n_res) / slope;
    }

    TransportModel model_;
    LadderAlgebra algebra_;
    Eigen::SparseMatrix<std::complex<double>> h_;
    JumpChannel gain_left_, loss_left_, gain_right_, loss_right_;
    Eigen::MatrixXcd rho_, drho_, work_;
};

} // namespace

Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho,
                              const LadderAlgebra& algebra,
                              const ChannelSpec& channel, const RateSet& rate_set) {
    if (rho.rows() != algebra.dim || rho.cols() != algebra.dim)
        throw domain_error("density matrix does not match the algebra dimension");
    const Eigen::SparseMatrix<std::complex<double>> h =
        algebra.hamiltonian(channel).cast<std::complex<double>>();
    const std::complex<double> mi(0.0, -1.0);
    Eigen::MatrixXcd out = mi * (h * rho);
    out.noalias() -= mi * (rho * h);
    Eigen::MatrixXcd work(algebra.dim, algebra.dim);
    const int m = algebra.sites;
    apply_dissipator(make_jump_channel(algebra, 0, true), rate_set.gain_left, rho, out, work);
    apply_dissipator(make_jump_channel(algebra, 0, false), rate_set.loss_left, rho, out, work);
    apply_dissipator(make_jump_channel(algebra, m - 1, true), rate_set.gain_right, rho, out, work);
    apply_dissipator(make_jump_channel(algebra, m - 1, false), rate_set.loss_right, rho, out, work);
    return out;
}

OracleTrajectory evolve_coupled(const TransportModel& model, double mu_left0,
                                double mu_right0, double t_end, int n_max,
                                const OracleOptions& options) {
    model.validate();
    if (!(t_end > 0.0)) throw domain_error("t_end must be positive");

    auto sys = std::make_shared<FockSystem>(model, n_max);
    ode::Options oopt;
    oopt.reltol = options.reltol;
    oopt.abstol = options.abstol;
    // many-body level spacings reach sites * (|eps_s| + 2J); stay inside the
    // explicit-stability region of those Liouvillian frequencies
    oopt.max_step =
        2.5 / (model.channel.sites *
                   (std::abs(model.channel.site_energy) + 2.0 * model.channel.hopping) +
               model.gamma_left + model.gamma_right);
    ode::DormandPrince5 stepper(
        [sys](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
            (*sys)(t, y, dydt);
        },
        oopt);
    stepper.set_post_step([sys](double, Eigen::VectorXd& y) { sys->hermitize(y); });

    // vacuum start: the lattice is initially empty
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(sys->dim(), sys->dim());
    rho(0, 0) = 1.0;
    Eigen::VectorXd y0;
    sys->pack(rho, mu_left0, mu_right0, y0);
    stepper.start(0.0, std::move(y0));

    OracleTrajectory traj;
    Eigen::MatrixXcd rho_t;
    for (int i = 0; i <= options.n_samples; ++i) {
        const double t = t_end * double(i) / options.n_samples;
        stepper.advance_to(t);
        OracleSample s;
        s.time = t;
        sys->unpack(stepper.state(), rho_t, s.mu_left, s.mu_right);
        s.spdm = sys->algebra().spdm(rho_t);
        s.trace = rho_t.trace().real();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_t,
                                                           Eigen::EigenvaluesOnly);
        s.min_eigenvalue = es.eigenvalues().minCoeff();
        traj.samples.push_back(std::move(s));
    }
    return traj;
}

ClosureReport certify_closure(const TransportModel& model, double mu_left0,
                              double mu_right0, double t_end, int n_max,
                              const OracleOptions& options) {
    const OracleTrajectory oracle =
        evolve_coupled(model, mu_left0, mu_right0, t_end, n_max, options);

    IntegratorOptions iopt;
    iopt.reltol = options.reltol;
    iopt.abstol = options.abstol;
    SamplingPolicy sampling;
    sampling.kind = SamplingPolicy::Kind::uniform;
    sampling.count = options.n_samples;
    const Trajectory spdm = integrate(initial_state(model, mu_left0, mu_right0),
                                      t_end, model, iopt, sampling);

    if (spdm.size() != oracle.samples.size())
        throw numeric_error("oracle and single-particle sample grids differ");

    ClosureReport rep;
    for (std::size_t i = 0; i < spdm.size(); ++i) {
        const auto& os = oracle.samples[i];
        rep.max_sigma_deviation =
            std::max(rep.max_sigma_deviation,
                     (os.spdm - spdm.sigmas[i]).cwiseAbs().maxCoeff());
        rep.max_mu_deviation = std::max(
            {rep.max_mu_deviation, std::abs(os.mu_left - spdm.records[i].mu_left),
             std::abs(os.mu_right - spdm.records[i].mu_right)});
    }
    return rep;
}

} // namespace finres
