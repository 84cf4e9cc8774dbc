#include <doctest.h>

#include <string>

#include "finres/config.hpp"
#include "finres/errors.hpp"
#include "finres/output.hpp"
#include "finres/reservoir.hpp"

using namespace finres;

namespace {

const char* kReferenceConfig = R"(
# reference transport scenario
stats = fermi
M = 7
eps_s = 2
J = 1
gamma_L = 0.5
beta = 1
omega_x = 0.2
omega_y = 0.2
omega_z = 0.05
mu_L0 = 1.401
mu_R0 = 0.907
)";

} // namespace

TEST_CASE("reference config parses with documented defaults") {
    const Config c = parse_config_text(kReferenceConfig);
    CHECK(c.stats == Statistics::fermi);
    CHECK(c.sites == 7);
    CHECK(c.site_energy == 2.0);
    CHECK(c.hopping == 1.0);
    CHECK(c.gamma_left == 0.5);
    CHECK(c.gamma_right == 0.5); // defaults to gamma_L
    CHECK(c.lattice_init == Config::LatticeInit::empty);
    CHECK(!c.t_end.has_value()); // auto
    CHECK(c.reltol == 1e-8);
    CHECK(c.abstol == 1e-10);
    CHECK(c.sampling.kind == SamplingPolicy::Kind::automatic);
    // derived anchor: initial left resonant occupation
    CHECK(occupation(c.site_energy, *c.mu_left0, c.beta, c.stats) ==
          doctest::Approx(0.35457).epsilon(1e-4));
}

TEST_CASE("missing keys are named") {
    std::string text = kReferenceConfig;
    text.erase(text.find("beta = 1"), 8);
    CHECK_THROWS_WITH_AS((void)parse_config_text(text),
                         doctest::Contains("missing key: beta"), config_error);
    CHECK_THROWS_WITH_AS((void)parse_config_text("stats = fermi\n"),
                         doctest::Contains("missing key"), config_error);
}

TEST_CASE("unknown, duplicate and malformed entries") {
    CHECK_THROWS_WITH_AS(
        (void)parse_config_text(std::string(kReferenceConfig) + "tend = 5\n"),
        doctest::Contains("unknown key: tend"), config_error);
    CHECK_THROWS_WITH_AS(
        (void)parse_config_text(std::string(kReferenceConfig) + "beta = 2\n"),
        doctest::Contains("duplicate key: beta"), config_error);
    CHECK_THROWS_WITH_AS(
        (void)parse_config_text(std::string(kReferenceConfig) + "t_end = 5x\n"),
        doctest::Contains("invalid number for key t_end"), config_error);
    CHECK_THROWS_AS((void)parse_config_text(std::string(kReferenceConfig) + "oops\n"),
                    config_error);
}

TEST_CASE("initial condition pairs are exclusive and complete") {
    std::string both = std::string(kReferenceConfig) + "N_L0 = 1500\nN_R0 = 1000\n";
    CHECK_THROWS_WITH_AS((void)parse_config_text(both), doctest::Contains("not both"),
                         config_error);
    std::string text = kReferenceConfig;
    text.erase(text.find("mu_R0 = 0.907"), 13);
    CHECK_THROWS_WITH_AS((void)parse_config_text(text),
                         doctest::Contains("missing key: mu_R0"), config_error);
}

TEST_CASE("bose chemical potential rule is validated at parse time") {
    std::string text = kReferenceConfig;
    text.replace(text.find("stats = fermi"), 13, "stats = bose ");
    CHECK_THROWS_WITH_AS((void)parse_config_text(text),
                         doctest::Contains("below the trap ground state"),
                         config_error);
    // valid bose document
    text.replace(text.find("mu_L0 = 1.401"), 13, "mu_L0 = -0.3 ");
    text.replace(text.find("mu_R0 = 0.907"), 13, "mu_R0 = -0.8 ");
    const Config c = parse_config_text(text);
    CHECK(c.stats == Statistics::bose);
}

TEST_CASE("uniform lattice needs n0") {
    CHECK_THROWS_WITH_AS(
        (void)parse_config_text(std::string(kReferenceConfig) +
                                "lattice_init = uniform\n"),
        doctest::Contains("missing key: n0"), config_error);
    CHECK_THROWS_WITH_AS(
        (void)parse_config_text(std::string(kReferenceConfig) + "n0 = 0.3\n"),
        doctest::Contains("lattice_init=uniform"), config_error);
    const Config c = parse_config_text(std::string(kReferenceConfig) +
                                       "lattice_init = uniform\nn0 = 0.25\n");
    CHECK(c.fill == 0.25);
}

TEST_CASE("render/parse round trip") {
    Config c = parse_config_text(std::string(kReferenceConfig) +
                                 "t_end = 123.5\nsampling = log:500\n"
                                 "out_csv = /tmp/x.csv\nout_summary = /tmp/x.txt\n");
    CHECK(parse_config_text(render_config(c)) == c);

    Config auto_end = parse_config_text(kReferenceConfig);
    CHECK(parse_config_text(render_config(auto_end)) == auto_end);
}

TEST_CASE("sampling policies parse") {
    CHECK(SamplingPolicy::parse("auto").kind == SamplingPolicy::Kind::automatic);
    CHECK(SamplingPolicy::parse("uniform:500").count == 500);
    CHECK(SamplingPolicy::parse("log").kind == SamplingPolicy::Kind::logarithmic);
    CHECK(SamplingPolicy::parse("steps").kind == SamplingPolicy::Kind::every_step);
    CHECK_THROWS_AS((void)SamplingPolicy::parse("grid"), config_error);
    CHECK_THROWS_AS((void)SamplingPolicy::parse("uniform:abc"), config_error);
    CHECK_THROWS_AS((void)SamplingPolicy::parse("uniform:2"), config_error);
}

TEST_CASE("sweep helpers") {
    const Config base = parse_config_text(kReferenceConfig);
    CHECK(sweepable_key("mu_L0"));
    CHECK(!sweepable_key("M"));
    CHECK(!sweepable_key("stats"));
    const Config c = with_value(base, "mu_L0", 2.0);
    CHECK(*c.mu_left0 == 2.0);
    CHECK_THROWS_AS((void)with_value(base, "M", 5.0), config_error);
    // the swept copy is re-validated
    Config bose = base;
    bose.stats = Statistics::bose;
    CHECK_THROWS_AS((void)with_value(bose, "mu_L0", 2.0), config_error);
}

TEST_CASE("csv header format") {
    CHECK(trajectory_csv_header(3) == "t,n_1,n_2,n_3,j_1,j_2,mu_L,mu_R,N_L,N_R,I,coh_max");
    CHECK(trajectory_csv_header(7) ==
          "t,n_1,n_2,n_3,n_4,n_5,n_6,n_7,j_1,j_2,j_3,j_4,j_5,j_6,"
          "mu_L,mu_R,N_L,N_R,I,coh_max");
}

TEST_CASE("format_double round trips") {
    for (double x : {1.0 / 3.0, 27.833, 1e-300, 12345.6789012345678}) {
        CHECK(std::stod(format_double(x)) == x);
    }
}
