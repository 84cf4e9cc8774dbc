#pragma once

#include <optional>
#include <string>

#include "finres/dynamics.hpp"
#include "finres/statistics.hpp"

namespace finres {

// Flat key=value scenario description. One assignment per line, '#' starts a
// comment, unknown keys are rejected. Exactly one of the chemical-potential
// pair (mu_L0, mu_R0) and the particle-number pair (N_L0, N_R0) must be given.
struct Config {
    Statistics stats = Statistics::fermi;
    int sites = 0;               // M
    double site_energy = 0.0;    // eps_s
    double hopping = 1.0;        // J
    double gamma_left = 0.0;     // gamma_L
    double gamma_right = 0.0;    // gamma_R (defaults to gamma_L)
    double beta = 1.0;
    double omega_x = 0.0, omega_y = 0.0, omega_z = 0.0;

    std::optional<double> mu_left0, mu_right0;
    std::optional<double> number_left0, number_right0;

    enum class LatticeInit { empty, uniform };
    LatticeInit lattice_init = LatticeInit::empty;
    double fill = 0.0;           // n0, only with lattice_init = uniform

    std::optional<double> t_end; // absent = auto (5x the estimated equilibration time)
    double reltol = 1e-8;
    double abstol = 1e-10;
    SamplingPolicy sampling;

    std::string out_csv;
    std::string out_summary;
    std::string out_svg;

    bool operator==(const Config&) const = default;

    TrapSpec trap() const;
    ChannelSpec channel() const;
    TransportModel model() const;
};

Config parse_config_text(const std::string& text);
Config parse_config_file(const std::string& path);
std::string render_config(const Config& config);

// re-runs the cross-field validation (used after programmatic edits)
void validate_config(const Config& config);

// numeric keys a sweep may scan over
bool sweepable_key(const std::string& key);
// returns a copy with `key` set to `value` and the result re-validated
Config with_value(const Config& config, const std::string& key, double value);

} // namespace finres
