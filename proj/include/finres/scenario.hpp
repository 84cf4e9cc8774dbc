#pragma once

#include <string>
#include <vector>

#include "finres/analysis.hpp"
#include "finres/config.hpp"
#include "finres/dynamics.hpp"

namespace finres {

struct RunResult {
    Trajectory trajectory;
    Summary summary;
    SystemState initial;
    SystemState final_state;
    double total_number0 = 0.0;
    double t_end = 0.0;
};

// end-to-end pipeline: initial state from the config, integration to t_end
// (5x the estimated equilibration time when auto), equilibrium solve, decay
// fits, conductance and the consistency report
RunResult run_scenario(const Config& config);

// equilibrium characterisation of the config without integrating
EquilibriumResult solve_config_equilibrium(const Config& config);

struct SweepPoint {
    double value;
    Summary summary;
};

struct SweepResult {
    std::string key;
    std::vector<SweepPoint> points;
};

// linear grid over one numeric key; points run concurrently, results are
// reported in grid order
SweepResult run_sweep(const Config& base, const std::string& key, double lo,
                      double hi, int count);

std::string render_sweep_csv(const SweepResult& sweep);

} // namespace finres
