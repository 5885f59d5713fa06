#include "swarmgrad/optimizers.hpp"

#include <cmath>

#include "swarmgrad/errors.hpp"

namespace swarmgrad {

std::string to_string(OptimizerKind kind) {
    switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::sgd_momentum: return "sgd_momentum";
    case OptimizerKind::adagrad: return "adagrad";
    case OptimizerKind::adadelta: return "adadelta";
    case OptimizerKind::rmsprop: return "rmsprop";
    case OptimizerKind::amsgrad: return "amsgrad";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::adaswarm: return "adaswarm";
    }
    return "?";
}

const std::vector<OptimizerKind>& all_optimizers() {
    static const std::vector<OptimizerKind> kinds{
        OptimizerKind::sgd,     OptimizerKind::sgd_momentum, OptimizerKind::adagrad, OptimizerKind::adadelta,
        OptimizerKind::rmsprop, OptimizerKind::amsgrad,      OptimizerKind::adam,    OptimizerKind::adaswarm};
    return kinds;
}

OptimizerKind parse_optimizer(std::string_view name) {
    for (auto k : all_optimizers()) {
        if (to_string(k) == name) return k;
    }
    throw ValidationError("unknown optimizer '" + std::string(name) + "'");
}

Hyper default_hyper(OptimizerKind kind) {
    Hyper h;
    switch (kind) {
    case OptimizerKind::sgd:
    case OptimizerKind::sgd_momentum:
    case OptimizerKind::adam:
    case OptimizerKind::adaswarm:
        break;
    case OptimizerKind::adagrad:
        h.epsilon = 1e-10;
        break;
    case OptimizerKind::adadelta:
        h.eta = 1.0;
        h.rho = 0.9;
        h.epsilon = 1e-6;
        break;
    case OptimizerKind::rmsprop:
        h.eta = 0.01;
        h.rho = 0.99;
        break;
    case OptimizerKind::amsgrad:
        h.eta = 0.01;
        break;
    }
    return h;
}

OptimizerState make_optimizer(OptimizerKind kind, std::size_t num_params, const Hyper& hyper) {
    OptimizerState s;
    s.kind = kind;
    s.hyper = hyper;
    const auto n = static_cast<Eigen::Index>(num_params);
    s.m = Vector::Zero(n);
    s.v = Vector::Zero(n);
    s.v_hat_max = Vector::Zero(n);
    s.accum = Vector::Zero(n);
    s.delta_accum = Vector::Zero(n);
    s.velocity = Vector::Zero(n);
    return s;
}

OptimizerState make_optimizer(OptimizerKind kind, std::size_t num_params) {
    return make_optimizer(kind, num_params, default_hyper(kind));
}

namespace {

void check(const OptimizerState& s, const Vector& params, const Vector& g) {
    if (params.size() != g.size() || params.size() != s.m.size()) {
        throw ConfigError("optimizer: parameter/gradient size mismatch (" + std::to_string(params.size()) + ", " +
                          std::to_string(g.size()) + ", state " + std::to_string(s.m.size()) + ")");
    }
    if (!g.allFinite()) throw RunError("optimizer: non-finite gradient");
}

Vector adam_update(OptimizerState& s, const Vector& params, const Vector& g) {
    check(s, params, g);
    const Hyper& h = s.hyper;
    ++s.t;
    s.m = h.beta1 * s.m + (1.0 - h.beta1) * g;
    s.v = h.beta2 * s.v + (1.0 - h.beta2) * g.cwiseAbs2();
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(s.t));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(s.t));
    const auto m_hat = s.m.array() / bc1;
    const auto v_hat = s.v.array() / bc2;
    return params.array() - h.eta * m_hat / (v_hat.sqrt() + h.epsilon);
}

} // namespace

Vector step_sgd(OptimizerState& s, const Vector& params, const Vector& g) {
    check(s, params, g);
    ++s.t;
    return params - s.hyper.eta * g;
}

Vector step_sgd_momentum(OptimizerState& s, const Vector& params, const Vector& g) {
    check(s, params, g);
    ++s.t;
    const double beta = s.hyper.momentum;
    s.velocity = beta * s.velocity + (1.0 - beta) * g;
    return params - s.hyper.eta * s.velocity;
}

Vector step_adagrad(OptimizerState& s, const Vector& params, const Vector& g) {
    check(s, params, g);
    ++s.t;
    s.accum += g.cwiseAbs2();
    return params.array() - s.hyper.eta * g.array() / (s.accum.array().sqrt() + s.hyper.epsilon);
}

Vector step_adadelta(OptimizerState& s, const Vector& params, const Vector& g) {
    check(s, params, g);
    ++s.t;
    const Hyper& h = s.hyper;
    s.accum = h.rho * s.accum + (1.0 - h.rho) * g.cwiseAbs2();
    const Vector dx = ((s.delta_accum.array() + h.epsilon).sqrt() / (s.accum.array() + h.epsilon).sqrt() *
                       g.array())
                          .matrix();
    s.delta_accum = h.rho * s.delta_accum + (1.0 - h.rho) * dx.cwiseAbs2();
    return params - h.eta * dx;
}

Vector step_rmsprop(OptimizerState& s, const Vector& params, const Vector& g) {
    check(s, params, g);
    ++s.t;
    const Hyper& h = s.hyper;
    s.v = h.rho * s.v + (1.0 - h.rho) * g.cwiseAbs2();
    return params.array() - h.eta * g.array() / (s.v.array().sqrt() + h.epsilon);
}

Vector step_amsgrad(OptimizerState& s, const Vector& params, const Vector& g) {
    check(s, params, g);
    const Hyper& h = s.hyper;
    ++s.t;
    s.m = h.beta1 * s.m + (1.0 - h.beta1) * g;
    s.v = h.beta2 * s.v + (1.0 - h.beta2) * g.cwiseAbs2();
    s.v_hat_max = s.v_hat_max.cwiseMax(s.v);
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(s.t));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(s.t));
    const auto m_hat = s.m.array() / bc1;
    const auto v_hat = s.v_hat_max.array() / bc2;
    return params.array() - h.eta * m_hat / (v_hat.sqrt() + h.epsilon);
}

Vector step_adam(OptimizerState& s, const Vector& params, const Vector& g) {
    return adam_update(s, params, g);
}

Vector step_adaswarm(OptimizerState& s, const Vector& params, const Vector& g) {
    return adam_update(s, params, g);
}

Vector step(OptimizerState& s, const Vector& params, const Vector& g) {
    switch (s.kind) {
    case OptimizerKind::sgd: return step_sgd(s, params, g);
    case OptimizerKind::sgd_momentum: return step_sgd_momentum(s, params, g);
    case OptimizerKind::adagrad: return step_adagrad(s, params, g);
    case OptimizerKind::adadelta: return step_adadelta(s, params, g);
    case OptimizerKind::rmsprop: return step_rmsprop(s, params, g);
    case OptimizerKind::amsgrad: return step_amsgrad(s, params, g);
    case OptimizerKind::adam: return step_adam(s, params, g);
    case OptimizerKind::adaswarm: return step_adaswarm(s, params, g);
    }
    return params;
}

} // namespace swarmgrad
