#include "finres/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <sstream>

#include "finres/errors.hpp"
#include "finres/ode.hpp"

namespace finres {

void TransportModel::validate() const {
    channel.validate();
    trap.validate();
    if (!(gamma_left >= 0.0 && gamma_right >= 0.0))
        throw domain_error("reservoir couplings must be non-negative");
    if (stats == Statistics::bose &&
        !(channel.site_energy > trap.ground_energy()))
        throw domain_error("bose transport requires site energy above the trap ground state");
}

namespace {

// packed layout: [Re sigma (M^2, col major) | Im sigma (M^2) | mu_L | mu_R]
struct Packing {
    int m;
    Eigen::Index size() const { return 2 * Eigen::Index(m) * m + 2; }

    void pack(const Eigen::MatrixXcd& sigma, double mu_l, double mu_r,
              Eigen::VectorXd& y) const {
        const Eigen::Index mm = Eigen::Index(m) * m;
        y.resize(size());
        for (Eigen::Index i = 0; i < mm; ++i) {
            y(i) = sigma(i / m, i % m).real();
            y(mm + i) = sigma(i / m, i % m).imag();
        }
        y(2 * mm) = mu_l;
        y(2 * mm + 1) = mu_r;
    }

    void unpack(const Eigen::VectorXd& y, Eigen::MatrixXcd& sigma, double& mu_l,
                double& mu_r) const {
        const Eigen::Index mm = Eigen::Index(m) * m;
        sigma.resize(m, m);
        for (Eigen::Index i = 0; i < mm; ++i)
            sigma(i / m, i % m) = std::complex<double>(y(i), y(mm + i));
        mu_l = y(2 * mm);
        mu_r = y(2 * mm + 1);
    }

    // sigma <- (sigma + sigma^dag)/2 on the packed vector
    void hermitize(Eigen::VectorXd& y) const {
        const Eigen::Index mm = Eigen::Index(m) * m;
        for (int j = 0; j < m; ++j) {
            y(mm + Eigen::Index(j) * m + j) = 0.0;
            for (int k = j + 1; k < m; ++k) {
                const Eigen::Index jk = Eigen::Index(k) * m + j; // (j,k) col major
                const Eigen::Index kj = Eigen::Index(j) * m + k;
                const double re = 0.5 * (y(jk) + y(kj));
                y(jk) = re;
                y(kj) = re;
                const double im = 0.5 * (y(mm + jk) - y(mm + kj));
                y(mm + jk) = im;
                y(mm + kj) = -im;
            }
        }
    }
};

// right-hand side with preallocated buffers; O(M^2) per evaluation
class TransportSystem {
public:
    TransportSystem(const TransportModel& model, bool freeze)
        : model_(model), pack_{model.channel.sites}, freeze_(freeze),
          sigma_(model.channel.sites, model.channel.sites),
          dsigma_(model.channel.sites, model.channel.sites) {}

    const Packing& packing() const { return pack_; }

    void operator()(double /*t*/, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
        const int m = model_.channel.sites;
        const Eigen::Index mm = Eigen::Index(m) * m;
        double mu_l, mu_r;
        pack_.unpack(y, sigma_, mu_l, mu_r);

        const double eps = model_.channel.site_energy;
        const double hop = model_.channel.hopping;
        const double beta = model_.trap.beta;
        const double n_l = occupation(eps, mu_l, beta, model_.stats);
        const double n_r = occupation(eps, mu_r, beta, model_.stats);
        const RateSet rs =
            rates(n_l, n_r, model_.gamma_left, model_.gamma_right, model_.stats);

        // i[h, sigma] exploiting the tridiagonal structure: the on-site energy
        // cancels in the commutator, only hopping terms survive
        const std::complex<double> ih(0.0, 1.0);
        for (int c = 0; c < m; ++c) {
            for (int r = 0; r < m; ++r) {
                std::complex<double> acc(0.0, 0.0);
                if (r > 0) acc -= sigma_(r - 1, c);      // (h sigma): row neighbours
                if (r + 1 < m) acc -= sigma_(r + 1, c);
                if (c > 0) acc += sigma_(r, c - 1);      // -(sigma h): col neighbours
                if (c + 1 < m) acc += sigma_(r, c + 1);
                dsigma_(r, c) = ih * hop * acc;
            }
        }

        // -1/2 {W, sigma} + G+ with W = diag(gamma_L, 0, .., 0, gamma_R)
        const double wl = 0.5 * model_.gamma_left;
        const double wr = 0.5 * model_.gamma_right;
        for (int c = 0; c < m; ++c) {
            dsigma_(0, c) -= wl * sigma_(0, c);
            dsigma_(m - 1, c) -= wr * sigma_(m - 1, c);
        }
        for (int r = 0; r < m; ++r) {
            dsigma_(r, 0) -= wl * sigma_(r, 0);
            dsigma_(r, m - 1) -= wr * sigma_(r, m - 1);
        }
        dsigma_(0, 0) += rs.gain_left;
        dsigma_(m - 1, m - 1) += rs.gain_right;

        dydt.resize(pack_.size());
        for (Eigen::Index i = 0; i < mm; ++i) {
            dydt(i) = dsigma_(i / m, i % m).real();
            dydt(mm + i) = dsigma_(i / m, i % m).imag();
        }

        if (freeze_) {
            dydt(2 * mm) = 0.0;
            dydt(2 * mm + 1) = 0.0;
            return;
        }
        dydt(2 * mm) = mu_rate(mu_l, n_l, sigma_(0, 0).real(), model_.gamma_left);
        dydt(2 * mm + 1) =
            mu_rate(mu_r, n_r, sigma_(m - 1, m - 1).real(), model_.gamma_right);
    }

private:
    double mu_rate(double mu, double n_res, double n_boundary, double gamma) const {
        if (gamma == 0.0) return 0.0;
        const double slope = population_slope(mu, model_.trap, model_.stats);
        if (!(slope > 1e-300)) {
            std::ostringstream msg;
            msg << "reservoir exhausted: dN/dmu = " << slope << " at mu = " << mu;
            throw numeric_error(msg.str());
        }
        return gamma * (n_boundary - n_res) / slope;
    }

    TransportModel model_;
    Packing pack_;
    bool freeze_;
    Eigen::MatrixXcd sigma_, dsigma_;
};

} // namespace

StateDerivative transport_rhs(const SystemState& state, const TransportModel& model) {
    model.validate();
    TransportSystem sys(model, false);
    Eigen::VectorXd y, dydt;
    sys.packing().pack(state.sigma, state.mu_left, state.mu_right, y);
    sys(state.time, y, dydt);
    StateDerivative d;
    sys.packing().unpack(dydt, d.dsigma, d.dmu_left, d.dmu_right);
    return d;
}

ObservableRecord observables(const SystemState& state, const TransportModel& model) {
    const int m = model.channel.sites;
    const double hop = model.channel.hopping;
    ObservableRecord rec;
    rec.time = state.time;
    rec.site_density.resize(m);
    for (int i = 0; i < m; ++i) rec.site_density(i) = state.sigma(i, i).real();
    rec.bond_current.resize(m - 1);
    for (int i = 0; i + 1 < m; ++i)
        rec.bond_current(i) = 2.0 * hop * state.sigma(i, i + 1).imag();
    rec.mu_left = state.mu_left;
    rec.mu_right = state.mu_right;
    rec.res_occupation_left =
        occupation(model.channel.site_energy, state.mu_left, model.trap.beta, model.stats);
    rec.res_occupation_right =
        occupation(model.channel.site_energy, state.mu_right, model.trap.beta, model.stats);
    rec.population_left = population(state.mu_left, model.trap, model.stats);
    rec.population_right = population(state.mu_right, model.trap, model.stats);
    rec.macro_current =
        -0.5 * model.gamma_left * (rec.site_density(0) - rec.res_occupation_left) +
        0.5 * model.gamma_right * (rec.site_density(m - 1) - rec.res_occupation_right);
    double coh = 0.0;
    for (int j = 0; j < m; ++j)
        for (int k = j + 2; k < m; ++k)
            coh = std::max(coh, std::abs(state.sigma(j, k)));
    rec.max_distant_coherence = coh;
    return rec;
}

SystemState initial_state(const TransportModel& model, double mu_left0,
                          double mu_right0, double fill) {
    model.validate();
    if (!(fill >= 0.0)) throw domain_error("initial lattice filling must be >= 0");
    if (model.stats == Statistics::fermi && fill > 1.0)
        throw domain_error("fermionic filling cannot exceed 1");
    // reject invalid chemical potentials up front
    (void)population(mu_left0, model.trap, model.stats);
    (void)population(mu_right0, model.trap, model.stats);

    SystemState s;
    s.time = 0.0;
    s.sigma = fill * Eigen::MatrixXcd::Identity(model.channel.sites, model.channel.sites);
    s.mu_left = mu_left0;
    s.mu_right = mu_right0;
    return s;
}

double conserved_total(const SystemState& state, const TransportModel& model) {
    return population(state.mu_left, model.trap, model.stats) +
           population(state.mu_right, model.trap, model.stats) +
           state.sigma.trace().real();
}

std::vector<double> sample_grid(const SamplingPolicy& sampling, double t_end,
                                const TransportModel& model) {
    if (!(t_end > 0.0)) throw domain_error("t_end must be positive");
    std::vector<double> grid;
    grid.push_back(0.0);
    const int n = std::max(sampling.count, 8);

    auto push_log = [&](double lo, double hi, int pts) {
        const double ratio = std::log(hi / lo) / (pts - 1);
        for (int i = 0; i + 1 < pts; ++i) grid.push_back(lo * std::exp(i * ratio));
        grid.push_back(hi);
    };

    switch (sampling.kind) {
    case SamplingPolicy::Kind::uniform:
        for (int i = 1; i <= n; ++i) grid.push_back(t_end * double(i) / n);
        break;
    case SamplingPolicy::Kind::logarithmic:
        push_log(1e-5 * t_end, t_end, n);
        break;
    case SamplingPolicy::Kind::automatic: {
        // dense logarithmic coverage of the coherent transient, then a
        // uniform grid through the metastable decay
        const double gamma = 0.5 * (model.gamma_left + model.gamma_right);
        double t_split = gamma > 0.0
                             ? 10.0 * relaxation_time(model.channel, gamma)
                             : 0.01 * t_end;
        t_split = std::min(t_split, t_end);
        const int n_log = n / 5;
        const int n_lin = n - n_log;
        push_log(1e-4 * t_split, t_split, n_log);
        if (t_split < t_end) {
            for (int i = 1; i <= n_lin; ++i)
                grid.push_back(t_split + (t_end - t_split) * double(i) / n_lin);
        }
        break;
    }
    case SamplingPolicy::Kind::every_step:
        grid.push_back(t_end); // intermediate points are taken from the stepper
        break;
    }
    for (double& v : grid) v = std::min(v, t_end);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.back() < t_end) grid.push_back(t_end);
    return grid;
}

Trajectory integrate(const SystemState& start, double t_end,
                     const TransportModel& model, const IntegratorOptions& options,
                     const SamplingPolicy& sampling) {
    model.validate();
    if (!(t_end > start.time)) throw domain_error("t_end must exceed the initial time");
    if (!(options.reltol > 0.0 && options.reltol < 1.0 &&
          options.abstol > 0.0 && options.abstol < 1.0))
        throw domain_error("tolerances must lie in (0, 1)");
    if ((start.sigma - start.sigma.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw domain_error("initial density matrix is not hermitian");

    auto sys = std::make_shared<TransportSystem>(model, options.freeze_reservoirs);
    const Packing pack = sys->packing();

    ode::Options oopt;
    oopt.reltol = options.reltol;
    oopt.abstol = options.abstol;
    // keep steps clear of the explicit-stability boundary of the fast
    // coherence modes (energy differences up to the 4J bandwidth plus
    // damping); error control alone would ride that boundary and leak
    // tolerance-level noise into the conserved total
    oopt.max_step = 2.5 / (4.0 * model.channel.hopping +
                           0.5 * (model.gamma_left + model.gamma_right));
    ode::DormandPrince5 stepper([sys](double t, const Eigen::VectorXd& y,
                                      Eigen::VectorXd& dydt) { (*sys)(t, y, dydt); },
                                oopt);
    stepper.set_post_step([pack](double, Eigen::VectorXd& y) { pack.hermitize(y); });

    Trajectory traj;
    auto emit = [&](double t, const Eigen::VectorXd& y) {
        SystemState s;
        s.time = t;
        pack.unpack(y, s.sigma, s.mu_left, s.mu_right);
        traj.times.push_back(t);
        traj.sigmas.push_back(s.sigma);
        traj.records.push_back(observables(s, model));
    };

    Eigen::VectorXd y0;
    pack.pack(start.sigma, start.mu_left, start.mu_right, y0);
    stepper.start(start.time, std::move(y0));

    if (sampling.kind == SamplingPolicy::Kind::every_step) {
        emit(stepper.time(), stepper.state());
        stepper.set_observer([&](double t, const Eigen::VectorXd& y) { emit(t, y); });
        stepper.advance_to(t_end);
        if (traj.times.back() < t_end) emit(stepper.time(), stepper.state());
    } else {
        for (double t : sample_grid(sampling, t_end - start.time, model)) {
            stepper.advance_to(start.time + t);
            emit(stepper.time(), stepper.state());
        }
    }
    return traj;
}

SamplingPolicy SamplingPolicy::parse(const std::string& text) {
    SamplingPolicy p;
    std::string kind = text;
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        kind = text.substr(0, colon);
        const std::string num = text.substr(colon + 1);
        try {
            std::size_t used = 0;
            p.count = std::stoi(num, &used);
            if (used != num.size()) throw std::invalid_argument(num);
        } catch (const std::exception&) {
            throw config_error("invalid sample count in sampling policy: " + text);
        }
        if (p.count < 8) throw config_error("sampling policy needs at least 8 samples");
    }
    if (kind == "auto") p.kind = Kind::automatic;
    else if (kind == "uniform") p.kind = Kind::uniform;
    else if (kind == "log") p.kind = Kind::logarithmic;
    else if (kind == "steps") p.kind = Kind::every_step;
    else throw config_error("unknown sampling policy: " + text +
                            " (expected auto, uniform, log or steps)");
    return p;
}

std::string SamplingPolicy::render() const {
    std::string kind;
    switch (this->kind) {
    case Kind::automatic: kind = "auto"; break;
    case Kind::uniform: kind = "uniform"; break;
    case Kind::logarithmic: kind = "log"; break;
    case Kind::every_step: kind = "steps"; break;
    }
    if (count != SamplingPolicy{}.count && this->kind != Kind::every_step)
        kind += ":" + std::to_string(count);
    return kind;
}

} // namespace finres
