#pragma once

#include <string>

#include "finres/analysis.hpp"
#include "finres/dynamics.hpp"

namespace finres {

// 17 significant digits; round-trip exact for doubles
std::string format_double(double x);

// columns: t, n_1..n_M, j_1..j_{M-1}, mu_L, mu_R, N_L, N_R, I, coh_max
std::string trajectory_csv_header(int sites);
std::string render_trajectory_csv(const Trajectory& traj);
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

std::string render_summary(const Summary& summary);
void write_summary(const Summary& summary, const std::string& path);

// two stacked panels (site/reservoir densities and currents) on a log time axis
void write_svg(const Trajectory& traj, const std::string& path);

} // namespace finres
