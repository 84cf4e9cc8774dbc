#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "finres/config.hpp"
#include "finres/errors.hpp"
#include "finres/fock.hpp"
#include "finres/lattice.hpp"
#include "finres/output.hpp"
#include "finres/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCheckFailed = 4;

std::string fmt(double x) { return finres::format_double(x); }

int cmd_run(const finres::Config& config) {
    if (config.out_csv.empty())
        throw finres::config_error("missing key: out_csv (required by run)");
    if (config.out_summary.empty())
        throw finres::config_error("missing key: out_summary (required by run)");

    const finres::RunResult result = finres::run_scenario(config);
    finres::write_trajectory_csv(result.trajectory, config.out_csv);
    finres::write_summary(result.summary, config.out_summary);
    if (!config.out_svg.empty()) finres::write_svg(result.trajectory, config.out_svg);

    std::cout << "t_end=" << fmt(result.t_end) << "\n"
              << "samples=" << result.trajectory.size() << "\n"
              << "N0=" << fmt(result.total_number0) << "\n"
              << finres::render_summary(result.summary);
    return result.summary.checks_passed ? kExitOk : kExitCheckFailed;
}

int cmd_relax(const finres::Config& config) {
    const auto heff = finres::effective_hamiltonian(config.channel(),
                                                    config.gamma_left,
                                                    config.gamma_right);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(heff, false);
    if (solver.info() != Eigen::Success)
        throw finres::numeric_error("effective Hamiltonian eigensolve failed");
    double gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < config.sites; ++k)
        gap = std::min(gap, std::abs(solver.eigenvalues()(k).imag()));
    std::cout << "tau_rel=" << fmt(1.0 / (2.0 * gap)) << "\n";
    // spectrum sorted by real part
    std::vector<std::complex<double>> ev(solver.eigenvalues().data(),
                                         solver.eigenvalues().data() + config.sites);
    std::sort(ev.begin(), ev.end(),
              [](auto a, auto b) { return a.real() < b.real(); });
    for (int k = 0; k < config.sites; ++k)
        std::cout << "lambda_" << k + 1 << "=" << fmt(ev[k].real()) << ","
                  << fmt(ev[k].imag()) << "\n";
    return kExitOk;
}

int cmd_equilibrium(const finres::Config& config) {
    const finres::EquilibriumResult eq = finres::solve_config_equilibrium(config);
    std::cout << "mu_inf=" << fmt(eq.mu_inf) << "\n"
              << "n_inf=" << fmt(eq.n_inf) << "\n"
              << "N_inf=" << fmt(eq.N_inf) << "\n";
    return kExitOk;
}

int cmd_sweep(const finres::Config& config, const std::string& key, double lo,
              double hi, int count) {
    if (config.out_csv.empty())
        throw finres::config_error("missing key: out_csv (required by sweep)");
    const finres::SweepResult sweep = finres::run_sweep(config, key, lo, hi, count);
    const std::string csv = finres::render_sweep_csv(sweep);
    {
        std::ofstream out(config.out_csv, std::ios::binary);
        if (!out) throw finres::numeric_error("cannot open output file: " + config.out_csv);
        out << csv;
    }
    std::cout << "points=" << sweep.points.size() << "\n"
              << "out_csv=" << config.out_csv << "\n";
    return kExitOk;
}

int cmd_validate(const finres::Config& config, int n_max, double t_end,
                 int samples, double tol, bool refine) {
    if (!config.mu_left0)
        throw finres::config_error("validate needs the (mu_L0, mu_R0) initial pair");
    if (std::isnan(tol))
        tol = config.stats == finres::Statistics::fermi ? 1e-6 : 1e-5;

    const finres::TransportModel model = config.model();
    finres::OracleOptions opt;
    opt.n_samples = samples;
    const finres::ClosureReport rep = finres::certify_closure(
        model, *config.mu_left0, *config.mu_right0, t_end, n_max, opt);
    const bool pass = rep.max_sigma_deviation < tol && rep.max_mu_deviation < tol;
    std::cout << "sigma_dev=" << fmt(rep.max_sigma_deviation) << "\n"
              << "mu_dev=" << fmt(rep.max_mu_deviation) << "\n"
              << "tolerance=" << fmt(tol) << "\n";
    if (refine && config.stats == finres::Statistics::bose) {
        const auto a = finres::evolve_coupled(model, *config.mu_left0,
                                              *config.mu_right0, t_end, n_max, opt);
        const auto b = finres::evolve_coupled(model, *config.mu_left0,
                                              *config.mu_right0, t_end, n_max + 2, opt);
        double change = 0.0;
        for (std::size_t i = 0; i < a.samples.size(); ++i)
            change = std::max(change, (a.samples[i].spdm - b.samples[i].spdm)
                                          .cwiseAbs()
                                          .maxCoeff());
        std::cout << "cutoff_change=" << fmt(change) << "\n";
    }
    std::cout << "closure=" << (pass ? "pass" : "fail") << "\n";
    return pass ? kExitOk : kExitCheckFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"transport simulator for a tight-binding channel between two "
                 "finite, equilibrating reservoirs"};
    app.require_subcommand(1);

    std::string config_path;
    std::string sweep_key;
    double sweep_min = 0.0, sweep_max = 0.0;
    int sweep_count = 9;
    int n_max = 8, samples = 200;
    double oracle_t_end = 50.0;
    double tol = std::numeric_limits<double>::quiet_NaN();
    bool refine = false;

    auto* run = app.add_subcommand("run", "integrate a scenario and write csv/summary");
    run->add_option("config", config_path, "config file")->required();

    auto* relax = app.add_subcommand(
        "relax", "print the relaxation time and the effective spectrum");
    relax->add_option("config", config_path, "config file")->required();

    auto* equilibrium = app.add_subcommand(
        "equilibrium", "solve the global particle-number balance");
    equilibrium->add_option("config", config_path, "config file")->required();

    auto* sweep = app.add_subcommand("sweep", "scan one key over a linear grid");
    sweep->add_option("config", config_path, "config file")->required();
    sweep->add_option("--key", sweep_key, "config key to scan")->required();
    sweep->add_option("--min", sweep_min, "grid start")->required();
    sweep->add_option("--max", sweep_max, "grid end")->required();
    sweep->add_option("--count", sweep_count, "grid points");

    auto* validate = app.add_subcommand(
        "validate", "certify the single-particle closure against the many-body oracle");
    validate->add_option("config", config_path, "config file")->required();
    validate->add_option("--n-max", n_max, "boson occupation cutoff");
    validate->add_option("--t-end", oracle_t_end, "oracle horizon");
    validate->add_option("--samples", samples, "comparison samples");
    validate->add_option("--tol", tol, "pass threshold (default 1e-6 fermi, 1e-5 bose)");
    validate->add_flag("--refine", refine, "also report the cutoff-doubling change");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitConfig;
    }

    try {
        const finres::Config config = finres::parse_config_file(config_path);
        if (run->parsed()) return cmd_run(config);
        if (relax->parsed()) return cmd_relax(config);
        if (equilibrium->parsed()) return cmd_equilibrium(config);
        if (sweep->parsed())
            return cmd_sweep(config, sweep_key, sweep_min, sweep_max, sweep_count);
        if (validate->parsed())
            return cmd_validate(config, n_max, oracle_t_end, samples, tol, refine);
    } catch (const finres::config_error& e) {
        std::cerr << "error[config]: " << e.what() << "\n";
        return kExitConfig;
    } catch (const finres::domain_error& e) {
        std::cerr << "error[domain]: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const finres::numeric_error& e) {
        std::cerr << "error[numeric]: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
