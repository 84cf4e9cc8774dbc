#include "finres/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "finres/errors.hpp"

namespace finres {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string trajectory_csv_header(int sites) {
    std::ostringstream out;
    out << "t";
    for (int i = 1; i <= sites; ++i) out << ",n_" << i;
    for (int i = 1; i < sites; ++i) out << ",j_" << i;
    out << ",mu_L,mu_R,N_L,N_R,I,coh_max";
    return out.str();
}

std::string render_trajectory_csv(const Trajectory& traj) {
    if (traj.records.empty()) throw numeric_error("empty trajectory");
    const int m = int(traj.records.front().site_density.size());
    std::ostringstream out;
    out << trajectory_csv_header(m) << "\n";
    for (const auto& r : traj.records) {
        out << format_double(r.time);
        for (int i = 0; i < m; ++i) out << "," << format_double(r.site_density(i));
        for (int i = 0; i < m - 1; ++i) out << "," << format_double(r.bond_current(i));
        out << "," << format_double(r.mu_left) << "," << format_double(r.mu_right)
            << "," << format_double(r.population_left) << ","
            << format_double(r.population_right) << ","
            << format_double(r.macro_current) << ","
            << format_double(r.max_distant_coherence) << "\n";
    }
    return out.str();
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw numeric_error("cannot open output file: " + path);
    out << content;
    if (!out) throw numeric_error("write failed: " + path);
}

} // namespace

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    write_file(path, render_trajectory_csv(traj));
}

std::string render_summary(const Summary& s) {
    std::ostringstream out;
    out << "tau_rel=" << format_double(s.tau_rel) << "\n";
    out << "tau_eq_formula=" << format_double(s.tau_eq_formula) << "\n";
    out << "tau_eq_fitted=" << format_double(s.tau_eq_fitted) << "\n";
    out << "nbar_decay_rate=" << format_double(s.nbar_decay_rate) << "\n";
    out << "mu_inf=" << format_double(s.mu_inf) << "\n";
    out << "n_inf=" << format_double(s.n_inf) << "\n";
    out << "N_inf=" << format_double(s.N_inf) << "\n";
    out << "G_formula=" << format_double(s.G_formula) << "\n";
    out << "G_measured=" << format_double(s.G_measured) << "\n";
    out << "G_fermi_bound=" << format_double(s.G_fermi_bound) << "\n";
    for (const auto& c : s.consistency.checks) {
        out << "consistency_" << c.name << "="
            << (c.evaluated ? (c.passed ? "true" : "false") : "skipped") << "\n";
        out << "consistency_" << c.name << "_measured=" << format_double(c.measured)
            << "\n";
    }
    out << "checks_passed=" << (s.checks_passed ? "true" : "false") << "\n";
    return out.str();
}

void write_summary(const Summary& summary, const std::string& path) {
    write_file(path, render_summary(summary));
}

namespace {

struct Series {
    std::string label;
    std::string color;
    std::vector<double> y;
};

// minimal hand-rolled line plot; x is log-scaled when it spans decades
std::string svg_panel(const std::vector<double>& t, const std::vector<Series>& series,
                      const std::string& title, int y_offset) {
    const int width = 860, height = 300, ml = 70, mr = 170, mt = 34, mb = 40;
    const double x0 = ml, x1 = width - mr, y0 = y_offset + height - mb,
                 y1 = y_offset + mt;

    double tlo = 1e308, thi = -1e308;
    for (double v : t)
        if (v > 0.0) {
            tlo = std::min(tlo, v);
            thi = std::max(thi, v);
        }
    if (!(thi > tlo)) { tlo = 1e-3; thi = 1.0; }
    const bool logx = thi / tlo > 50.0;
    auto xmap = [&](double v) {
        if (logx)
            return x0 + (std::log(std::max(v, tlo)) - std::log(tlo)) /
                            (std::log(thi) - std::log(tlo)) * (x1 - x0);
        return x0 + (v - tlo) / (thi - tlo) * (x1 - x0);
    };

    double ylo = 1e308, yhi = -1e308;
    for (const auto& s : series)
        for (double v : s.y) {
            ylo = std::min(ylo, v);
            yhi = std::max(yhi, v);
        }
    if (!(yhi > ylo)) { yhi = ylo + 1.0; }
    const double pad = 0.05 * (yhi - ylo);
    ylo -= pad;
    yhi += pad;
    auto ymap = [&](double v) { return y0 - (v - ylo) / (yhi - ylo) * (y0 - y1); };

    std::ostringstream out;
    out << "<g>\n";
    out << "<rect x='" << x0 << "' y='" << y1 << "' width='" << x1 - x0
        << "' height='" << y0 - y1 << "' fill='none' stroke='#888'/>\n";
    out << "<text x='" << x0 << "' y='" << y1 - 10 << "' font-size='14'>" << title
        << (logx ? " (log time axis)" : "") << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = ylo + (yhi - ylo) * k / 4;
        out << "<text x='" << x0 - 64 << "' y='" << ymap(v) + 4
            << "' font-size='10'>" << format_double(v).substr(0, 9) << "</text>\n";
    }
    int legend_row = 0;
    for (const auto& s : series) {
        out << "<polyline fill='none' stroke='" << s.color
            << "' stroke-width='1.2' points='";
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (logx && !(t[i] > 0.0)) continue;
            out << xmap(t[i]) << "," << ymap(s.y[i]) << " ";
        }
        out << "'/>\n";
        out << "<text x='" << x1 + 8 << "' y='" << y1 + 14 + 14 * legend_row++
            << "' font-size='11' fill='" << s.color << "'>" << s.label
            << "</text>\n";
    }
    out << "</g>\n";
    return out.str();
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

} // namespace

void write_svg(const Trajectory& traj, const std::string& path) {
    if (traj.records.empty()) throw numeric_error("empty trajectory");
    const int m = int(traj.records.front().site_density.size());
    const auto& t = traj.times;

    std::vector<Series> densities;
    for (int i = 0; i < m; ++i) {
        Series s{"n_" + std::to_string(i + 1), kPalette[i % 10], {}};
        for (const auto& r : traj.records) s.y.push_back(r.site_density(i));
        densities.push_back(std::move(s));
    }
    Series nl{"n_L(eps_s)", "#000000", {}}, nr{"n_R(eps_s)", "#666666", {}};
    for (const auto& r : traj.records) {
        nl.y.push_back(r.res_occupation_left);
        nr.y.push_back(r.res_occupation_right);
    }
    densities.push_back(std::move(nl));
    densities.push_back(std::move(nr));

    std::vector<Series> currents;
    for (int i = 0; i + 1 < m; ++i) {
        Series s{"j_" + std::to_string(i + 1), kPalette[i % 10], {}};
        for (const auto& r : traj.records) s.y.push_back(r.bond_current(i));
        currents.push_back(std::move(s));
    }
    Series macro{"I", "#000000", {}};
    for (const auto& r : traj.records) macro.y.push_back(r.macro_current);
    currents.push_back(std::move(macro));

    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='860' height='620' "
           "font-family='sans-serif'>\n";
    out << svg_panel(t, densities, "site and reservoir occupations", 0);
    out << svg_panel(t, currents, "bond and macroscopic currents", 310);
    out << "</svg>\n";
    write_file(path, out.str());
}

} // namespace finres
