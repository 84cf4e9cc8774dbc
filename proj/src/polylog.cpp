#include "finres/polylog.hpp"

#include <cmath>

#include "finres/errors.hpp"

namespace finres {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kZeta2 = 1.64493406684822643647; // pi^2/6
constexpr double kZeta3 = 1.20205690315959428540;
constexpr double kLn2 = 0.69314718055994530942;

// zeta(2-k) for k = 2,3,...  (trivial zeros at negative even integers)
constexpr double kZetaTail2[] = {
    -0.5,            // zeta(0),  k=2
    -1.0 / 12.0,     // zeta(-1), k=3
    0.0,             // zeta(-2), k=4
    1.0 / 120.0,     // zeta(-3), k=5
    0.0,             // k=6
    -1.0 / 252.0,    // zeta(-5), k=7
    0.0,             // k=8
    1.0 / 240.0,     // zeta(-7), k=9
    0.0,             // k=10
    -1.0 / 132.0,    // zeta(-9), k=11
    0.0,             // k=12
    691.0 / 32760.0, // zeta(-11), k=13
    0.0,             // k=14
    -1.0 / 12.0,     // zeta(-13), k=15
};

// eta(m) = (1 - 2^(1-m)) zeta(m) for integer m <= 3; eta(1) = ln 2
double eta_int(int m) {
    switch (m) {
    case 3: return 0.90154267736969571405; // 3 zeta(3)/4
    case 2: return kPi * kPi / 12.0;
    case 1: return kLn2;
    case 0: return 0.5;
    }
    const int n = -m; // eta(-n) = (2^(n+1) - 1) B_(n+1) / (n+1)
    if (n % 2 == 0) return 0.0;
    static const double bern[] = {1.0 / 6,     -1.0 / 30,       1.0 / 42,
                                  -1.0 / 30,   5.0 / 66,        -691.0 / 2730,
                                  7.0 / 6,     -3617.0 / 510,   43867.0 / 798,
                                  -174611.0 / 330, 854513.0 / 138,
                                  -236364091.0 / 2730};
    const int idx = (n + 1) / 2 - 1; // B_2, B_4, ...
    if (idx >= int(sizeof(bern) / sizeof(double)))
        throw numeric_error("eta table exhausted");
    return (std::pow(2.0, n + 1) - 1.0) / (n + 1) * bern[idx];
}

// Li_s(-e^delta) = -sum_k eta(s-k) delta^k / k!, |delta| < pi; used near x = -1
// where the direct series crawls
double eta_expansion(double delta, int s) {
    double sum = 0.0, dk = 1.0, kfac = 1.0;
    for (int k = 0; k <= 30; ++k) {
        if (k > 0) {
            dk *= delta;
            kfac *= k;
        }
        const double term = eta_int(s - k) * dk / kfac;
        sum -= term;
        if (k > 4 && std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) break;
    }
    return sum;
}

// sum_{k>=1} x^k / k^s for |x| < 1, with a tail-aware stop
template <int S>
double power_series(double x) {
    double sum = 0.0, comp = 0.0, xk = 1.0;
    const double tail_factor = x > 0.0 ? x / (1.0 - x) : 1.0;
    for (int k = 1; k < 100000; ++k) {
        xk *= x;
        double denom = double(k) * k;
        if constexpr (S == 3) denom *= k;
        const double term = xk / denom;
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (k > 4 && std::abs(term) * tail_factor < 6e-17 * (std::abs(sum) + 1e-300))
            break;
    }
    return sum;
}

// expansions around x = 1 in delta = log x < 0; rapidly convergent for
// |delta| < 1, used for x in (0.8, 1)
double li2_near_one(double delta) {
    double sum = kZeta2 + delta * (1.0 - std::log(-delta));
    double dk = delta; // delta^k
    double kfac = 1.0;
    for (std::size_t i = 0; i < sizeof(kZetaTail2) / sizeof(double); ++i) {
        const int k = int(i) + 2;
        dk *= delta;
        kfac *= k;
        sum += kZetaTail2[i] * dk / kfac;
    }
    return sum;
}

double li3_near_one(double delta) {
    double sum = kZeta3 + kZeta2 * delta +
                 0.5 * delta * delta * (1.5 - std::log(-delta));
    double dk = delta * delta; // delta^k
    double kfac = 2.0;
    for (std::size_t i = 0; i < sizeof(kZetaTail2) / sizeof(double); ++i) {
        const int k = int(i) + 3; // zeta(3-k) = kZetaTail2[i]
        dk *= delta;
        kfac *= k;
        sum += kZetaTail2[i] * dk / kfac;
    }
    return sum;
}

template <int S>
double polylog_impl(double x) {
    if (!(x < 1.0)) throw domain_error("polylog requires x < 1");
    if (x < -1.0) {
        if constexpr (S == 2) return polylog2_neg_exp(std::log(-x));
        else return polylog3_neg_exp(std::log(-x));
    }
    if (x <= -0.5) return eta_expansion(std::log(-x), S);
    if (x > 0.8) {
        if constexpr (S == 2) return li2_near_one(std::log(x));
        else return li3_near_one(std::log(x));
    }
    if (x == 0.0) return 0.0;
    return power_series<S>(x);
}

} // namespace

double polylog2(double x) { return polylog_impl<2>(x); }

double polylog3(double x) { return polylog_impl<3>(x); }

double polylog2_neg_exp(double eta) {
    if (eta <= 0.0) return polylog_impl<2>(-std::exp(eta));
    // inversion: Li2(-e^eta) + Li2(-e^-eta) = -pi^2/6 - eta^2/2
    return -kPi * kPi / 6.0 - 0.5 * eta * eta - polylog_impl<2>(-std::exp(-eta));
}

double polylog3_neg_exp(double eta) {
    if (eta <= 0.0) return polylog_impl<3>(-std::exp(eta));
    // inversion: Li3(-e^eta) - Li3(-e^-eta) = -eta^3/6 - pi^2 eta/6
    return -eta * eta * eta / 6.0 - kPi * kPi * eta / 6.0 +
           polylog_impl<3>(-std::exp(-eta));
}

} // namespace finres
