#include "finres/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "finres/errors.hpp"

namespace finres::ode {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
// b - b* (5th minus embedded 4th order weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

} // namespace

DormandPrince5::DormandPrince5(Rhs rhs, Options opt)
    : rhs_(std::move(rhs)), opt_(opt) {}

bool DormandPrince5::eval(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
    ++stats_.evaluations;
    try {
        rhs_(t, y, dydt);
    } catch (const domain_error&) {
        return false; // trial state left the domain: shrink the step
    }
    return dydt.allFinite();
}

double DormandPrince5::error_norm(const Eigen::VectorXd& err,
                                  const Eigen::VectorXd& ynew) const {
    const auto n = err.size();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double scale =
            opt_.abstol + opt_.reltol * std::max(std::abs(y_(i)), std::abs(ynew(i)));
        const double q = err(i) / scale;
        acc += q * q;
    }
    return std::sqrt(acc / double(n));
}

double DormandPrince5::initial_step(double span) const {
    const double d0 = y_.cwiseAbs().maxCoeff();
    const double d1 = k1_.cwiseAbs().maxCoeff();
    double h = (d0 > 0.0 && d1 > 0.0) ? 0.01 * d0 / d1 : 1e-6 * std::max(span, 1.0);
    h = std::min(h, 1e-3 * span);
    h = std::min(h, opt_.max_step);
    return std::max(h, 1e-300);
}

void DormandPrince5::start(double t0, Eigen::VectorXd y0) {
    t_ = t0;
    y_ = std::move(y0);
    const auto n = y_.size();
    for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_, &yerr_})
        v->resize(n);
    rhs_(t_, y_, k1_); // initial state must be valid: let errors propagate
    ++stats_.evaluations;
    if (!k1_.allFinite())
        throw numeric_error("right-hand side not finite at the initial state");
    h_ = 0.0;
    started_ = true;
}

void DormandPrince5::advance_to(double t_target) {
    if (!started_) throw numeric_error("integrator not started");
    if (t_target < t_) throw numeric_error("cannot integrate backwards");

    bool previous_rejected = false;
    while (t_ < t_target) {
        if (t_target - t_ <= 4.0 * std::numeric_limits<double>::epsilon() *
                                 std::max(std::abs(t_), 1.0)) {
            t_ = t_target;
            return;
        }
        if (h_ <= 0.0) h_ = initial_step(t_target - t_);
        double h = std::min({h_, opt_.max_step, t_target - t_});

        if (++stats_.steps > opt_.max_steps)
            throw numeric_error("step limit exceeded");
        if (h < 16.0 * std::numeric_limits<double>::epsilon() *
                    std::max(std::abs(t_), 1.0)) {
            std::ostringstream msg;
            msg << "step size underflow at t = " << t_
                << " (stiffness or domain boundary)";
            throw numeric_error(msg.str());
        }

        bool ok = true;
        ytmp_ = y_ + h * (a21 * k1_);
        ok = ok && eval(t_ + c2 * h, ytmp_, k2_);
        if (ok) {
            ytmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
            ok = eval(t_ + c3 * h, ytmp_, k3_);
        }
        if (ok) {
            ytmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
            ok = eval(t_ + c4 * h, ytmp_, k4_);
        }
        if (ok) {
            ytmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
            ok = eval(t_ + c5 * h, ytmp_, k5_);
        }
        if (ok) {
            ytmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
            ok = eval(t_ + h, ytmp_, k6_);
        }
        if (ok) {
            ynew_ = y_ + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
            ok = eval(t_ + h, ynew_, k7_); // FSAL stage
        }

        if (!ok) {
            ++stats_.rejected;
            h_ = 0.5 * h;
            previous_rejected = true;
            continue;
        }

        yerr_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
        const double err = error_norm(yerr_, ynew_);

        if (!(err <= 1.0)) {
            ++stats_.rejected;
            const double fac =
                std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h_ = h * std::min(fac, 0.9);
            previous_rejected = true;
            continue;
        }

        t_ += h;
        y_.swap(ynew_);
        k1_.swap(k7_);
        if (post_step_) post_step_(t_, y_);
        if (observer_) observer_(t_, y_);

        const double fac_max = previous_rejected ? 1.0 : 5.0;
        const double fac = err > 0.0
                               ? std::min(fac_max, std::max(0.2, 0.9 * std::pow(err, -0.2)))
                               : fac_max;
        h_ = h * fac;
        previous_rejected = false;
    }
}

} // namespace finres::ode
