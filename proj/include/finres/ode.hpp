#pragma once

#include <functional>
#include <limits>

#include <Eigen/Core>

namespace finres::ode {

struct Options {
    double reltol = 1e-8;
    double abstol = 1e-10;
    double max_step = std::numeric_limits<double>::infinity();
    long max_steps = 50000000;
};

struct Stats {
    long steps = 0;
    long rejected = 0;
    long evaluations = 0;
};

// Explicit embedded Dormand-Prince 5(4) stepper with PI-free standard step
// control. Stage evaluations that throw finres::domain_error (or produce
// non-finite values) reject the step and retry with a smaller one, so the
// solution can hug a domain boundary without dying on trial excursions.
class DormandPrince5 {
public:
    using Rhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;
    // called after every accepted step; may project the state (e.g. restore
    // hermiticity lost to roundoff)
    using PostStep = std::function<void(double, Eigen::VectorXd&)>;
    using Observer = std::function<void(double, const Eigen::VectorXd&)>;

    DormandPrince5(Rhs rhs, Options opt = {});

    void set_post_step(PostStep hook) { post_step_ = std::move(hook); }
    void set_observer(Observer obs) { observer_ = std::move(obs); }

    void start(double t0, Eigen::VectorXd y0);
    // integrate exactly to t_target (steps are clipped, never interpolated)
    void advance_to(double t_target);

    double time() const { return t_; }
    const Eigen::VectorXd& state() const { return y_; }
    const Stats& stats() const { return stats_; }

private:
    bool eval(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt);
    double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& ynew) const;
    double initial_step(double span) const;

    Rhs rhs_;
    Options opt_;
    PostStep post_step_;
    Observer observer_;
    Stats stats_;

    double t_ = 0.0;
    double h_ = 0.0;
    Eigen::VectorXd y_;
    Eigen::VectorXd k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, yerr_;
    bool started_ = false;
};

} // namespace finres::ode
