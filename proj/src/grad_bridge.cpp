#include "swarmgrad/grad_bridge.hpp"

#include <cmath>
#include <iomanip>

#include "swarmgrad/errors.hpp"

namespace swarmgrad {

std::string to_string(GradientRegime r) {
    switch (r) {
    case GradientRegime::near: return "near";
    case GradientRegime::far: return "far";
    case GradientRegime::shifted: return "shifted";
    }
    return "?";
}

namespace {

void check_eta(double eta) {
    if (!(eta > 0.0)) throw ConfigError("learning rate eta must be > 0");
}

void check_same_size(const Vector& a, const Vector& b, const char* what) {
    if (a.size() != b.size()) {
        throw ConfigError(std::string("dimension mismatch: ") + what + " (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
    }
}

GradientEstimate finish(Vector value, double coefficient, const Vector& gbest, GradientRegime regime) {
    GradientEstimate e;
    e.descent_value = -value;
    e.value = std::move(value);
    e.coefficient = coefficient;
    e.gbest_used = gbest;
    e.regime = regime;
    return e;
}

} // namespace

double second_derivative_estimate(double coeff_sum_avg, double eta) {
    check_eta(eta);
    return -coeff_sum_avg / eta;
}

GradientEstimate approx_gradient_near(const Vector& w, const Vector& gbest, double coeff_sum_avg, double eta) {
    check_eta(eta);
    check_same_size(w, gbest, "w vs gbest");
    const double coefficient = -coeff_sum_avg / eta;
    return finish(coefficient * (w - gbest), coefficient, gbest, GradientRegime::near);
}

GradientEstimate approx_gradient_far(const Vector& w, const Vector& v, const Vector& pbest, const Vector& gbest,
                                     double c1r1, double c2r2, double eta) {
    check_eta(eta);
    check_same_size(w, gbest, "w vs gbest");
    check_same_size(w, pbest, "w vs pbest");
    check_same_size(w, v, "w vs v");
    // c1r1 (w - p) + c2r2 (w - g) = (c1r1 + c2r2)(w - g) + c1r1 (g - p); the
    // first term is exactly the near-regime value.
    const double coefficient = -(c1r1 + c2r2) / eta;
    Vector value = coefficient * (w - gbest);
    value -= (c1r1 / eta) * (gbest - pbest);
    value += v;
    return finish(std::move(value), coefficient, gbest, GradientRegime::far);
}

GradientEstimate approx_gradient_shifted(const Vector& x, double alpha, const Vector& gbest, double coeff_sum_avg,
                                         double eta) {
    check_eta(eta);
    check_same_size(x, gbest, "x vs gbest");
    const double coefficient = -coeff_sum_avg / eta;
    const Vector z = x.array() + alpha;
    return finish(coefficient * (z - gbest), coefficient, gbest, GradientRegime::shifted);
}

void EmulationConfig::validate() const {
    check_eta(eta);
    if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("emulation beta must lie in [0, 1)");
    if (steps_per_query < 1) throw ConfigError("steps_per_query must be >= 1");
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    swarm.validate();
}

namespace {

enum class Scheme { gd, momentum };

Trajectory emulate(const Objective& objective, const EmulationConfig& cfg, const Vector& w0, Scheme scheme) {
    cfg.validate();
    if (static_cast<std::size_t>(w0.size()) != objective.dimension) {
        throw ConfigError("w0 dimension differs from objective dimension");
    }

    SwarmConfig swarm_cfg = cfg.swarm;
    if (swarm_cfg.bounds.empty()) swarm_cfg.bounds = objective.bounds;
    const Fitness fitness = as_fitness(objective);
    SwarmState swarm = init_swarm(swarm_cfg, objective.dimension, fitness);

    // In the momentum scheme the step size is tied to beta.
    const double eta = scheme == Scheme::momentum ? 1.0 - cfg.beta : cfg.eta;
    const double alpha = scheme == Scheme::momentum ? eta * cfg.beta / (1.0 - cfg.beta) : 0.0;
    check_eta(eta);

    auto value_at = [&](const Vector& w) {
        const auto f = objective.evaluate(w);
        if (!f || !std::isfinite(*f)) throw RunError("emulation left the domain of '" + objective.name + "'");
        return *f;
    };

    Trajectory traj;
    Vector w = w0;
    Vector velocity = Vector::Zero(w.size());
    traj.w_history.push_back(w[0]);
    traj.f_history.push_back(value_at(w));

    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
        const double gbest_before = swarm.gbest_fitness;
        for (std::size_t k = 0; k < cfg.steps_per_query; ++k) step(cfg.variant, swarm, swarm_cfg, fitness);

        const GradientEstimate est =
            objective.differentiable
                ? approx_gradient_near(w, swarm.gbest_position, swarm.coeff_sum_avg, eta)
                : approx_gradient_shifted(w, cfg.shift_alpha, swarm.gbest_position, swarm.coeff_sum_avg, eta);

        Vector next = w + eta * est.value;
        if (alpha != 0.0) next += alpha * velocity;
        if (scheme == Scheme::momentum) velocity = cfg.beta * velocity + (1.0 - cfg.beta) * est.value;
        if (!next.allFinite()) throw RunError("emulated iterate diverged on '" + objective.name + "'");
        for (Eigen::Index d = 0; d < next.size(); ++d) next[d] = objective.bounds[d].clamp(next[d]);
        w = std::move(next);

        const double f = value_at(w);
        traj.w_history.push_back(w[0]);
        traj.f_history.push_back(f);
        traj.iterations = it;

        const bool close = std::abs(f - swarm.gbest_fitness) < cfg.value_tolerance;
        const bool settled =
            !cfg.require_settled_swarm || std::abs(gbest_before - swarm.gbest_fitness) < cfg.value_tolerance;
        if (close && settled) {
            traj.reached_tolerance = true;
            break;
        }
    }
    traj.final_w = w;
    traj.final_value = traj.f_history.back();
    traj.gbest_fitness = swarm.gbest_fitness;
    traj.gbest_position = swarm.gbest_position;
    return traj;
}

} // namespace

Trajectory emulate_gd(const Objective& objective, const EmulationConfig& cfg, const Vector& w0) {
    return emulate(objective, cfg, w0, Scheme::gd);
}

Trajectory emulate_sgd_momentum(const Objective& objective, const EmulationConfig& cfg, const Vector& w0) {
    return emulate(objective, cfg, w0, Scheme::momentum);
}

double SweepTable::sign_agreement() const {
    std::size_t compared = 0;
    std::size_t agree = 0;
    for (const auto& r : rows) {
        if (!r.fd_gradient || !r.approx_gradient) continue;
        ++compared;
        const auto sgn = [](double v) { return (v > 0.0) - (v < 0.0); };
        if (sgn(*r.fd_gradient) == sgn(*r.approx_gradient)) ++agree;
    }
    return compared == 0 ? 0.0 : static_cast<double>(agree) / static_cast<double>(compared);
}

void SweepTable::write_csv(std::ostream& os) const {
    os << "x,fd_gradient,approx_gradient,gbest\n";
    os << std::setprecision(17);
    for (const auto& r : rows) {
        os << r.x << ',';
        if (r.fd_gradient) os << *r.fd_gradient;
        else os << "NA";
        os << ',';
        if (r.approx_gradient) os << *r.approx_gradient;
        else os << "NA";
        os << ',' << r.gbest << '\n';
    }
}

SwarmResult converge_swarm(const Objective& objective, const EmulationConfig& cfg) {
    cfg.validate();
    SwarmConfig swarm_cfg = cfg.swarm;
    if (swarm_cfg.bounds.empty()) swarm_cfg.bounds = objective.bounds;
    return run_swarm(swarm_cfg, objective, cfg.variant);
}

SweepTable gradient_sweep(const Objective& objective, Bound interval, std::size_t num_points,
                          const EmulationConfig& cfg) {
    const SwarmResult converged = converge_swarm(objective, cfg);
    return gradient_sweep(objective, interval, num_points, cfg.eta, converged.final_state);
}

SweepTable gradient_sweep(const Objective& objective, Bound interval, std::size_t num_points, double eta,
                          const SwarmState& converged) {
    if (num_points < 2) throw ConfigError("gradient sweep needs at least 2 points");
    if (!(interval.low < interval.high)) throw ConfigError("sweep interval must have low < high");
    if (objective.dimension != 1) throw ConfigError("gradient sweep supports 1-D objectives only");
    check_eta(eta);

    SweepTable table;
    table.gbest = converged.gbest_position[0];
    table.coeff_sum_avg = converged.coeff_sum_avg;
    const double spacing = (interval.high - interval.low) / static_cast<double>(num_points - 1);
    for (std::size_t i = 0; i < num_points; ++i) {
        SweepRow row;
        row.x = interval.low + static_cast<double>(i) * spacing;
        row.gbest = table.gbest;
        const Vector x = Vector::Constant(1, row.x);
        if (objective.evaluate(x)) {
            const FdGradient fd = fd_gradient(objective, x);
            if (fd.value) row.fd_gradient = (*fd.value)[0];
            const GradientEstimate est =
                approx_gradient_near(x, converged.gbest_position, converged.coeff_sum_avg, eta);
            row.approx_gradient = est.descent_value[0];
        }
        table.rows.push_back(row);
    }
    return table;
}

} // namespace swarmgrad
