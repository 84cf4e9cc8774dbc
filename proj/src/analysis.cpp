#include "finres/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "finres/errors.hpp"

namespace finres {

namespace {

constexpr double kZeroFloor = 1e-12;

double median(std::vector<double> v) {
    if (v.empty()) throw numeric_error("median of empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void check_rates(double gamma, double hopping) {
    if (!(gamma > 0.0)) throw domain_error("gamma must be > 0");
    if (!(hopping > 0.0)) throw domain_error("hopping must be > 0");
}

} // namespace

double metastable_current(double density_bias, double gamma, double hopping) {
    check_rates(gamma, hopping);
    const double j2 = hopping * hopping;
    return 2.0 * gamma * j2 / (4.0 * j2 + gamma * gamma) * density_bias;
}

MetastablePrediction metastable_profile(double n_left, double n_right,
                                        double gamma, double hopping, int sites) {
    check_rates(gamma, hopping);
    if (sites < 2) throw domain_error("profile needs at least 2 sites");
    MetastablePrediction p;
    p.mean_density = 0.5 * (n_left + n_right);
    p.density_bias = n_left - n_right;
    const double j2 = hopping * hopping;
    p.boundary_offset =
        gamma * gamma / (2.0 * (4.0 * j2 + gamma * gamma)) * p.density_bias;
    p.current = metastable_current(p.density_bias, gamma, hopping);
    p.profile = Eigen::VectorXd::Constant(sites, p.mean_density);
    p.profile(0) += p.boundary_offset;
    p.profile(sites - 1) -= p.boundary_offset;
    return p;
}

double tau_eq_estimate(double population_bias, double density_bias, double gamma,
                       double hopping) {
    check_rates(gamma, hopping);
    if (density_bias == 0.0)
        throw domain_error("equilibration time undefined without a density bias");
    const double j2 = hopping * hopping;
    return population_bias / density_bias * (4.0 * j2 + gamma * gamma) /
           (4.0 * gamma * j2);
}

ConductancePrediction conductance(double n_inf, double beta, double gamma,
                                  double hopping, Statistics stats) {
    check_rates(gamma, hopping);
    if (!(beta > 0.0)) throw domain_error("beta must be > 0");
    const double j2 = hopping * hopping;
    const double kappa = 2.0 * gamma * j2 / (4.0 * j2 + gamma * gamma);
    ConductancePrediction g;
    g.value = beta * occupation_variance(n_inf, stats) * kappa;
    g.fermi_bound = beta * gamma * j2 / (2.0 * (4.0 * j2 + gamma * gamma));
    return g;
}

Window metastable_window(double tau_rel, double tau_eq, double t_end) {
    return Window{5.0 * tau_rel, std::min(0.5 * tau_eq, 0.5 * t_end)};
}

Window asymptotic_window(double tau_eq, double t_end) {
    return Window{tau_eq, std::min(4.0 * tau_eq, t_end)};
}

FitResult fit_exponential(std::span<const double> t, std::span<const double> x,
                          double asymptote, Window window) {
    if (t.size() != x.size()) throw domain_error("fit series lengths differ");
    std::vector<double> ts, logs;
    int sign = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!window.contains(t[i])) continue;
        const double d = x[i] - asymptote;
        if (d == 0.0) continue;
        const int s = d > 0.0 ? 1 : -1;
        if (sign == 0) sign = s;
        if (s != sign)
            throw numeric_error("sign change inside the fit window (window misplaced)");
        ts.push_back(t[i]);
        logs.push_back(std::log(std::abs(d)));
    }
    if (ts.size() < 10) throw numeric_error("fewer than 10 samples in the fit window");

    const double n = double(ts.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sy += logs[i];
        stt += ts[i] * ts[i];
        sty += ts[i] * logs[i];
    }
    const double denom = n * stt - st * st;
    if (denom == 0.0) throw numeric_error("degenerate fit window");
    const double slope = (n * sty - st * sy) / denom;
    const double intercept = (sy - slope * st) / n;

    double ss = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double r = logs[i] - (intercept + slope * ts[i]);
        ss += r * r;
    }
    FitResult fr;
    fr.rate = -slope;
    fr.amplitude = std::exp(intercept);
    fr.window = window;
    fr.rms_residual = std::sqrt(ss / n);
    return fr;
}

double fit_power_law(std::span<const double> t, std::span<const double> x,
                     Window window) {
    if (t.size() != x.size()) throw domain_error("fit series lengths differ");
    std::vector<double> lt, lx;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!window.contains(t[i])) continue;
        if (!(t[i] > 0.0)) continue;
        if (!(x[i] > 0.0))
            throw numeric_error("power-law fit requires positive samples");
        lt.push_back(std::log(t[i]));
        lx.push_back(std::log(x[i]));
    }
    if (lt.size() < 10) throw numeric_error("fewer than 10 samples in the fit window");
    const double n = double(lt.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < lt.size(); ++i) {
        st += lt[i];
        sy += lx[i];
        stt += lt[i] * lt[i];
        sty += lt[i] * lx[i];
    }
    const double denom = n * stt - st * st;
    if (denom == 0.0) throw numeric_error("degenerate fit window");
    return (n * sty - st * sy) / denom;
}

int short_time_exponent(int sites, int j, int k) {
    if (sites < 1) throw domain_error("site count must be positive");
    if (j < 1 || j > sites || k < 1 || k > sites)
        throw domain_error("matrix indices out of range");
    return sites - std::abs(j + k - (sites + 1));
}

double median_conductance(const Trajectory& traj, Window window) {
    std::vector<double> g;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& r = traj.records[i];
        if (!window.contains(r.time)) continue;
        const double dmu = r.mu_left - r.mu_right;
        if (std::abs(dmu) < kZeroFloor) continue;
        g.push_back(r.macro_current / dmu);
    }
    if (g.empty()) // unbiased run: no conductance to measure
        return std::numeric_limits<double>::quiet_NaN();
    return median(std::move(g));
}

bool ConsistencyReport::all_passed() const {
    for (const auto& c : checks)
        if (c.evaluated && !c.passed) return false;
    return true;
}

const ConsistencyCheck* ConsistencyReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

ConsistencyReport consistency_report(const Trajectory& traj,
                                     const TransportModel& model, double tau_rel,
                                     double tau_eq, double G_formula,
                                     double G_measured, double t_end) {
    const double gamma = 0.5 * (model.gamma_left + model.gamma_right);
    const double hop = model.channel.hopping;
    const Window meta = metastable_window(tau_rel, tau_eq, t_end);
    const Window asym = asymptotic_window(tau_eq, t_end);

    // relative deviation with the 0 = 0 convention for unbiased runs
    auto reldev = [](double value, double reference) {
        if (std::abs(reference) < kZeroFloor)
            return std::abs(value) < kZeroFloor ? 0.0 : 1.0;
        return std::abs(value / reference - 1.0);
    };

    std::vector<double> homog, current_form, ladder, macro, ohmic;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& r = traj.records[i];
        if (meta.contains(r.time)) {
            const double jbar = r.bond_current.mean();
            double spread = 0.0;
            for (int b = 0; b < r.bond_current.size(); ++b)
                spread = std::max(spread, std::abs(r.bond_current(b) - jbar));
            homog.push_back(std::abs(jbar) < kZeroFloor
                                ? (spread < kZeroFloor ? 0.0 : 1.0)
                                : spread / std::abs(jbar));

            const double bias = r.res_occupation_left - r.res_occupation_right;
            current_form.push_back(reldev(jbar, metastable_current(bias, gamma, hop)));

            const auto pred = metastable_profile(r.res_occupation_left,
                                                 r.res_occupation_right, gamma, hop,
                                                 model.channel.sites);
            const double off_l = r.site_density(0) - pred.mean_density;
            const double off_r =
                r.site_density(model.channel.sites - 1) - pred.mean_density;
            ladder.push_back(std::max(reldev(off_l, pred.boundary_offset),
                                      reldev(off_r, -pred.boundary_offset)));

            macro.push_back(reldev(r.macro_current, jbar));
        }
        if (asym.contains(r.time)) {
            const double dN = r.population_left - r.population_right;
            ohmic.push_back(std::abs(dN) < kZeroFloor
                                ? (std::abs(r.macro_current) < kZeroFloor ? 0.0 : 1.0)
                                : std::abs(2.0 * tau_eq * r.macro_current / dN - 1.0));
        }
    }

    ConsistencyReport report;
    auto add = [&](const std::string& name, const std::vector<double>& samples,
                   double threshold) {
        ConsistencyCheck c;
        c.name = name;
        c.threshold = threshold;
        if (samples.size() >= 3) {
            c.evaluated = true;
            c.measured = median(samples);
            c.passed = c.measured < threshold;
        }
        report.checks.push_back(c);
    };
    add("current_homogeneity", homog, 0.01);
    add("metastable_current", current_form, 0.01);
    add("population_ladder", ladder, 0.01);
    add("macroscopic_current", macro, 0.01);
    add("ohmic_current", ohmic, 0.02);

    ConsistencyCheck gc;
    gc.name = "conductance";
    gc.threshold = 0.02;
    if (meta.valid() && std::isfinite(G_formula) && !macro.empty()) {
        gc.evaluated = true;
        if (std::isfinite(G_measured)) {
            gc.measured = reldev(G_measured, G_formula);
            gc.passed = gc.measured < gc.threshold;
        } else {
            // no measurable bias: pass iff the current also vanished
            double imax = 0.0;
            for (const auto& r : traj.records)
                if (meta.contains(r.time)) imax = std::max(imax, std::abs(r.macro_current));
            gc.measured = 0.0;
            gc.passed = imax < kZeroFloor;
        }
    }
    report.checks.push_back(gc);
    return report;
}

} // namespace finres
