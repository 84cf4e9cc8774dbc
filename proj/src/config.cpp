#include "finres/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "finres/errors.hpp"

namespace finres {

namespace {

const std::set<std::string> kKnownKeys = {
    "stats",   "M",       "eps_s",   "J",       "gamma_L", "gamma_R",
    "beta",    "omega_x", "omega_y", "omega_z", "mu_L0",   "mu_R0",
    "N_L0",    "N_R0",    "lattice_init",       "n0",      "t_end",
    "reltol",  "abstol",  "sampling",           "out_csv", "out_summary",
    "out_svg"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& value) {
    double x = 0.0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto res = std::from_chars(begin, end, x);
    if (res.ec != std::errc{} || res.ptr != end)
        throw config_error("invalid number for key " + key + ": '" + value + "'");
    return x;
}

int parse_int(const std::string& key, const std::string& value) {
    int x = 0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto res = std::from_chars(begin, end, x);
    if (res.ec != std::errc{} || res.ptr != end)
        throw config_error("invalid integer for key " + key + ": '" + value + "'");
    return x;
}

} // namespace

TrapSpec Config::trap() const {
    TrapSpec t;
    t.beta = beta;
    t.omega_x = omega_x;
    t.omega_y = omega_y;
    t.omega_z = omega_z;
    return t;
}

ChannelSpec Config::channel() const {
    ChannelSpec c;
    c.sites = sites;
    c.site_energy = site_energy;
    c.hopping = hopping;
    return c;
}

TransportModel Config::model() const {
    TransportModel m;
    m.channel = channel();
    m.trap = trap();
    m.gamma_left = gamma_left;
    m.gamma_right = gamma_right;
    m.stats = stats;
    return m;
}

void validate_config(const Config& c) {
    c.channel().validate();
    c.trap().validate();
    if (!(c.gamma_left >= 0.0)) throw config_error("gamma_L must be non-negative");
    if (!(c.gamma_right >= 0.0)) throw config_error("gamma_R must be non-negative");

    const bool has_mu = c.mu_left0.has_value() || c.mu_right0.has_value();
    const bool has_n = c.number_left0.has_value() || c.number_right0.has_value();
    if (has_mu && has_n)
        throw config_error("give either the (mu_L0, mu_R0) pair or the (N_L0, N_R0) "
                           "pair, not both");
    if (has_mu && (!c.mu_left0 || !c.mu_right0))
        throw config_error(std::string("missing key: ") +
                           (c.mu_left0 ? "mu_R0" : "mu_L0"));
    if (has_n && (!c.number_left0 || !c.number_right0))
        throw config_error(std::string("missing key: ") +
                           (c.number_left0 ? "N_R0" : "N_L0"));
    if (!has_mu && !has_n)
        throw config_error("missing initial condition: give mu_L0/mu_R0 or N_L0/N_R0");

    if (c.stats == Statistics::bose) {
        const double cap = c.trap().ground_energy() - kBoseMuMargin;
        if (has_mu && (!(*c.mu_left0 <= cap) || !(*c.mu_right0 <= cap))) {
            std::ostringstream msg;
            msg << "bose chemical potentials must stay below the trap ground "
                   "state energy E0 = "
                << c.trap().ground_energy() << " by at least " << kBoseMuMargin;
            throw config_error(msg.str());
        }
        if (!(c.site_energy > c.trap().ground_energy()))
            throw config_error("bose transport requires eps_s above the trap "
                               "ground state energy E0");
    }
    if (has_n && (!(*c.number_left0 > 0.0) || !(*c.number_right0 > 0.0)))
        throw config_error("initial particle numbers must be positive");

    if (c.lattice_init == Config::LatticeInit::uniform) {
        if (!(c.fill >= 0.0)) throw config_error("n0 must be non-negative");
        if (c.stats == Statistics::fermi && c.fill > 1.0)
            throw config_error("fermionic n0 cannot exceed 1");
    }
    if (c.t_end && !(*c.t_end > 0.0)) throw config_error("t_end must be positive");
    if (!(c.reltol > 0.0 && c.reltol < 1.0))
        throw config_error("reltol must lie in (0, 1)");
    if (!(c.abstol > 0.0 && c.abstol < 1.0))
        throw config_error("abstol must lie in (0, 1)");
}

Config parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << "line " << lineno << " is not a key=value assignment: '" << line << "'";
            throw config_error(msg.str());
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!kKnownKeys.count(key)) throw config_error("unknown key: " + key);
        if (kv.count(key)) throw config_error("duplicate key: " + key);
        if (value.empty()) throw config_error("empty value for key: " + key);
        kv[key] = value;
    }

    auto require = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw config_error(std::string("missing key: ") + key);
        return it->second;
    };
    auto take = [&](const char* key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };

    Config c;
    const std::string stats = require("stats");
    if (stats == "fermi") c.stats = Statistics::fermi;
    else if (stats == "bose") c.stats = Statistics::bose;
    else throw config_error("stats must be 'fermi' or 'bose', got '" + stats + "'");

    c.sites = parse_int("M", require("M"));
    c.site_energy = parse_number("eps_s", require("eps_s"));
    c.hopping = parse_number("J", require("J"));
    c.gamma_left = parse_number("gamma_L", require("gamma_L"));
    c.gamma_right = take("gamma_R") ? parse_number("gamma_R", *take("gamma_R"))
                                    : c.gamma_left;
    c.beta = parse_number("beta", require("beta"));
    c.omega_x = parse_number("omega_x", require("omega_x"));
    c.omega_y = parse_number("omega_y", require("omega_y"));
    c.omega_z = parse_number("omega_z", require("omega_z"));

    if (auto v = take("mu_L0")) c.mu_left0 = parse_number("mu_L0", *v);
    if (auto v = take("mu_R0")) c.mu_right0 = parse_number("mu_R0", *v);
    if (auto v = take("N_L0")) c.number_left0 = parse_number("N_L0", *v);
    if (auto v = take("N_R0")) c.number_right0 = parse_number("N_R0", *v);

    if (auto v = take("lattice_init")) {
        if (*v == "empty") c.lattice_init = Config::LatticeInit::empty;
        else if (*v == "uniform") c.lattice_init = Config::LatticeInit::uniform;
        else throw config_error("lattice_init must be 'empty' or 'uniform', got '" +
                                *v + "'");
    }
    if (auto v = take("n0")) {
        if (c.lattice_init != Config::LatticeInit::uniform)
            throw config_error("n0 is only meaningful with lattice_init=uniform");
        c.fill = parse_number("n0", *v);
    } else if (c.lattice_init == Config::LatticeInit::uniform) {
        throw config_error("missing key: n0 (required by lattice_init=uniform)");
    }

    if (auto v = take("t_end")) {
        if (*v != "auto") c.t_end = parse_number("t_end", *v);
    }
    if (auto v = take("reltol")) c.reltol = parse_number("reltol", *v);
    if (auto v = take("abstol")) c.abstol = parse_number("abstol", *v);
    if (auto v = take("sampling")) c.sampling = SamplingPolicy::parse(*v);
    if (auto v = take("out_csv")) c.out_csv = *v;
    if (auto v = take("out_summary")) c.out_summary = *v;
    if (auto v = take("out_svg")) c.out_svg = *v;

    validate_config(c);
    return c;
}

Config parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

namespace {

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

std::string render_config(const Config& c) {
    std::ostringstream out;
    out << "stats = " << statistics_name(c.stats) << "\n";
    out << "M = " << c.sites << "\n";
    out << "eps_s = " << num(c.site_energy) << "\n";
    out << "J = " << num(c.hopping) << "\n";
    out << "gamma_L = " << num(c.gamma_left) << "\n";
    out << "gamma_R = " << num(c.gamma_right) << "\n";
    out << "beta = " << num(c.beta) << "\n";
    out << "omega_x = " << num(c.omega_x) << "\n";
    out << "omega_y = " << num(c.omega_y) << "\n";
    out << "omega_z = " << num(c.omega_z) << "\n";
    if (c.mu_left0) out << "mu_L0 = " << num(*c.mu_left0) << "\n";
    if (c.mu_right0) out << "mu_R0 = " << num(*c.mu_right0) << "\n";
    if (c.number_left0) out << "N_L0 = " << num(*c.number_left0) << "\n";
    if (c.number_right0) out << "N_R0 = " << num(*c.number_right0) << "\n";
    out << "lattice_init = "
        << (c.lattice_init == Config::LatticeInit::uniform ? "uniform" : "empty")
        << "\n";
    if (c.lattice_init == Config::LatticeInit::uniform)
        out << "n0 = " << num(c.fill) << "\n";
    out << "t_end = " << (c.t_end ? num(*c.t_end) : std::string("auto")) << "\n";
    out << "reltol = " << num(c.reltol) << "\n";
    out << "abstol = " << num(c.abstol) << "\n";
    out << "sampling = " << c.sampling.render() << "\n";
    if (!c.out_csv.empty()) out << "out_csv = " << c.out_csv << "\n";
    if (!c.out_summary.empty()) out << "out_summary = " << c.out_summary << "\n";
    if (!c.out_svg.empty()) out << "out_svg = " << c.out_svg << "\n";
    return out.str();
}

bool sweepable_key(const std::string& key) {
    static const std::set<std::string> keys = {
        "eps_s", "J",      "gamma_L", "gamma_R", "beta",  "omega_x", "omega_y",
        "omega_z", "mu_L0", "mu_R0",  "N_L0",    "N_R0",  "n0",      "t_end"};
    return keys.count(key) > 0;
}

Config with_value(const Config& config, const std::string& key, double value) {
    if (!sweepable_key(key))
        throw config_error("key not sweepable: " + key);
    Config c = config;
    if (key == "eps_s") c.site_energy = value;
    else if (key == "J") c.hopping = value;
    else if (key == "gamma_L") c.gamma_left = value;
    else if (key == "gamma_R") c.gamma_right = value;
    else if (key == "beta") c.beta = value;
    else if (key == "omega_x") c.omega_x = value;
    else if (key == "omega_y") c.omega_y = value;
    else if (key == "omega_z") c.omega_z = value;
    else if (key == "mu_L0") c.mu_left0 = value;
    else if (key == "mu_R0") c.mu_right0 = value;
    else if (key == "N_L0") c.number_left0 = value;
    else if (key == "N_R0") c.number_right0 = value;
    else if (key == "n0") c.fill = value;
    else if (key == "t_end") c.t_end = value;
    validate_config(c);
    return c;
}

} // namespace finres
