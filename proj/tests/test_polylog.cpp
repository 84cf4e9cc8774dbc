#include <doctest.h>

#include <cmath>

#include "finres/errors.hpp"
#include "finres/polylog.hpp"

using namespace finres;

TEST_CASE("polylog reference values") {
    // classical constants and high-precision references
    CHECK(polylog2(-1.0) == doctest::Approx(-0.82246703342411321824).epsilon(1e-14));
    CHECK(polylog3(-1.0) == doctest::Approx(-0.90154267736969571405).epsilon(1e-14));
    CHECK(polylog2(0.5) == doctest::Approx(0.5822405264650125059).epsilon(1e-14));
    CHECK(polylog3(0.5) == doctest::Approx(0.53721319360804020094).epsilon(1e-14));
    CHECK(polylog2(0.95) == doctest::Approx(1.4406337969700394838).epsilon(1e-14));
    CHECK(polylog3(0.95) == doctest::Approx(1.1235745842791988422).epsilon(1e-14));
    CHECK(polylog2(0.999999) == doctest::Approx(1.6449192513305107122).epsilon(1e-13));
    CHECK(polylog3(0.999999) == doctest::Approx(1.2020552582323627324).epsilon(1e-13));
    CHECK(polylog2(-7.3) == doctest::Approx(-3.4881959147291485741).epsilon(1e-14));
    CHECK(polylog3(-7.3) == doctest::Approx(-4.7138817077068369379).epsilon(1e-14));
}

TEST_CASE("polylog branch boundaries are seamless") {
    // direct series on one side of 0.8, log expansion on the other
    CHECK(polylog3(0.79) == doctest::Approx(0.89721226903020644757).epsilon(1e-14));
    CHECK(polylog3(0.81) == doctest::Approx(0.9240829945683041103).epsilon(1e-14));
    // inversion vs series around |x| = 1
    const double lo = polylog3(-0.999999);
    const double hi = polylog3(-1.000001);
    CHECK(std::abs(hi - lo) < 1e-5);
}

TEST_CASE("neg_exp forms agree with the plain evaluation") {
    for (double eta : {-3.0, -0.4, 0.0, 0.7, 2.5}) {
        CHECK(polylog2_neg_exp(eta) ==
              doctest::Approx(polylog2(-std::exp(eta))).epsilon(1e-14));
        CHECK(polylog3_neg_exp(eta) ==
              doctest::Approx(polylog3(-std::exp(eta))).epsilon(1e-14));
    }
    // stable far into the degenerate regime where e^eta overflows
    const double eta = 800.0;
    const double expect = -eta * eta * eta / 6.0 -
                          9.8696044010893586188 / 6.0 * eta; // -eta^3/6 - pi^2 eta/6
    CHECK(polylog3_neg_exp(eta) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("derivative relation x Li3'(x) = Li2(x)") {
    for (double x : {-5.0, -0.6, 0.3, 0.9}) {
        const double h = 1e-6 * std::max(std::abs(x), 1.0);
        const double fd = (polylog3(x + h) - polylog3(x - h)) / (2.0 * h);
        CHECK(x * fd == doctest::Approx(polylog2(x)).epsilon(1e-8));
    }
}

TEST_CASE("polylog domain ends at x = 1") {
    CHECK_THROWS_AS((void)polylog2(1.0), domain_error);
    CHECK_THROWS_AS((void)polylog3(1.5), domain_error);
}
