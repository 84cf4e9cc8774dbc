#include "finres/scenario.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include "finres/errors.hpp"
#include "finres/output.hpp"

namespace finres {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

SystemState build_initial_state(const Config& config) {
    const TransportModel model = config.model();
    double mu_l, mu_r;
    if (config.mu_left0) {
        mu_l = *config.mu_left0;
        mu_r = *config.mu_right0;
    } else {
        try {
            mu_l = mu_from_population(*config.number_left0, model.trap, model.stats);
            mu_r = mu_from_population(*config.number_right0, model.trap, model.stats);
        } catch (const domain_error& e) {
            throw config_error(std::string("initial particle numbers invalid: ") +
                               e.what());
        }
    }
    const double fill =
        config.lattice_init == Config::LatticeInit::uniform ? config.fill : 0.0;
    try {
        return initial_state(model, mu_l, mu_r, fill);
    } catch (const domain_error& e) {
        throw config_error(std::string("initial condition invalid: ") + e.what());
    }
}

} // namespace

EquilibriumResult solve_config_equilibrium(const Config& config) {
    validate_config(config);
    const TransportModel model = config.model();
    const SystemState s0 = build_initial_state(config);
    const double n0 = conserved_total(s0, model);
    return solve_equilibrium(n0, model.channel.sites, model.channel.site_energy,
                             model.trap, model.stats);
}

RunResult run_scenario(const Config& config) {
    validate_config(config);
    const TransportModel model = config.model();

    RunResult result;
    result.initial = build_initial_state(config);
    result.total_number0 = conserved_total(result.initial, model);

    const double gamma_mean = 0.5 * (model.gamma_left + model.gamma_right);
    Summary& summary = result.summary;
    summary.tau_rel =
        gamma_mean > 0.0 ? relaxation_time(model.channel, gamma_mean) : kNan;

    const ObservableRecord rec0 = observables(result.initial, model);
    const double bias0 = rec0.res_occupation_left - rec0.res_occupation_right;
    const double pop_bias0 = rec0.population_left - rec0.population_right;
    summary.tau_eq_formula =
        (std::abs(bias0) > 1e-12 && gamma_mean > 0.0)
            ? tau_eq_estimate(pop_bias0, bias0, gamma_mean, model.channel.hopping)
            : kNan;

    double t_end;
    if (config.t_end) {
        t_end = *config.t_end;
    } else if (std::isfinite(summary.tau_eq_formula)) {
        t_end = 5.0 * std::abs(summary.tau_eq_formula);
    } else if (std::isfinite(summary.tau_rel)) {
        t_end = 100.0 * summary.tau_rel; // unbiased start: cover the transient
    } else {
        throw config_error("t_end=auto needs a coupled, biased scenario; set t_end");
    }
    result.t_end = t_end;

    IntegratorOptions iopt;
    iopt.reltol = config.reltol;
    iopt.abstol = config.abstol;
    result.trajectory = integrate(result.initial, t_end, model, iopt, config.sampling);
    const auto& traj = result.trajectory;

    result.final_state.time = traj.times.back();
    result.final_state.sigma = traj.sigmas.back();
    result.final_state.mu_left = traj.records.back().mu_left;
    result.final_state.mu_right = traj.records.back().mu_right;

    const EquilibriumResult eq =
        solve_equilibrium(result.total_number0, model.channel.sites,
                          model.channel.site_energy, model.trap, model.stats);
    summary.mu_inf = eq.mu_inf;
    summary.n_inf = eq.n_inf;
    summary.N_inf = eq.N_inf;

    if (gamma_mean > 0.0) {
        const ConductancePrediction g =
            conductance(eq.n_inf, model.trap.beta, gamma_mean,
                        model.channel.hopping, model.stats);
        summary.G_formula = g.value;
        summary.G_fermi_bound = g.fermi_bound;
    } else {
        summary.G_formula = summary.G_fermi_bound = kNan;
    }

    // decay-rate fits against the solver asymptotes (not the endpoint, so fit
    // quality is independent of the run length)
    summary.tau_eq_fitted = kNan;
    summary.nbar_decay_rate = kNan;
    if (std::isfinite(summary.tau_eq_formula)) {
        const Window asym = asymptotic_window(summary.tau_eq_formula, t_end);
        std::vector<double> bias, nbar;
        bias.reserve(traj.size());
        nbar.reserve(traj.size());
        for (const auto& r : traj.records) {
            bias.push_back(r.res_occupation_left - r.res_occupation_right);
            nbar.push_back(0.5 * (r.res_occupation_left + r.res_occupation_right));
        }
        try {
            summary.tau_eq_fitted =
                1.0 / fit_exponential(traj.times, bias, 0.0, asym).rate;
        } catch (const numeric_error&) {
        }
        try {
            summary.nbar_decay_rate =
                fit_exponential(traj.times, nbar, eq.n_inf, asym).rate;
        } catch (const numeric_error&) {
        }
    }

    const Window meta = metastable_window(summary.tau_rel, summary.tau_eq_formula, t_end);
    summary.G_measured = median_conductance(traj, meta);
    summary.consistency =
        consistency_report(traj, model, summary.tau_rel, summary.tau_eq_formula,
                           summary.G_formula, summary.G_measured, t_end);
    summary.checks_passed = summary.consistency.all_passed();
    return result;
}

SweepResult run_sweep(const Config& base, const std::string& key, double lo,
                      double hi, int count) {
    validate_config(base);
    if (!sweepable_key(key)) throw config_error("key not sweepable: " + key);
    if (count < 2) throw config_error("sweep needs at least 2 grid points");
    if (!(hi > lo)) throw config_error("sweep needs max > min");

    SweepResult sweep;
    sweep.key = key;
    sweep.points.resize(count);
    std::vector<std::exception_ptr> errors(count);

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            const double value = lo + (hi - lo) * double(i) / (count - 1);
            sweep.points[i].value = value;
            try {
                const Config c = with_value(base, key, value);
                sweep.points[i].summary = run_scenario(c).summary;
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const int n_threads =
        std::max(1u, std::min(std::thread::hardware_concurrency(), unsigned(count)));
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    for (int i = 0; i < count; ++i)
        if (errors[i]) std::rethrow_exception(errors[i]); // first in grid order
    return sweep;
}

std::string render_sweep_csv(const SweepResult& sweep) {
    std::ostringstream out;
    out << sweep.key
        << ",mu_inf,n_inf,N_inf,tau_rel,tau_eq_formula,G_formula,G_measured,"
           "G_fermi_bound,checks_passed\n";
    for (const auto& p : sweep.points) {
        const Summary& s = p.summary;
        out << format_double(p.value) << "," << format_double(s.mu_inf) << ","
            << format_double(s.n_inf) << "," << format_double(s.N_inf) << ","
            << format_double(s.tau_rel) << "," << format_double(s.tau_eq_formula)
            << "," << format_double(s.G_formula) << ","
            << format_double(s.G_measured) << "," << format_double(s.G_fermi_bound)
            << "," << (s.checks_passed ? "true" : "false") << "\n";
    }
    return out.str();
}

} // namespace finres
