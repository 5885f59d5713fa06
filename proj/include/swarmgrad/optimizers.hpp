#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "swarmgrad/types.hpp"

namespace swarmgrad {

enum class OptimizerKind { sgd, sgd_momentum, adagrad, adadelta, rmsprop, amsgrad, adam, adaswarm };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);
const std::vector<OptimizerKind>& all_optimizers();

struct Hyper {
    double eta = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// Velocity decay for sgd_momentum.
    double momentum = 0.9;
    /// Squared-gradient decay for rmsprop and adadelta.
    double rho = 0.9;
};

/// Defaults per rule. Adam and AdaSwarm share beta1 = 0.9, beta2 = 0.999,
/// eps = 1e-8, eta = 0.1.
Hyper default_hyper(OptimizerKind kind);

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::adam;
    Hyper hyper;
    long t = 0;
    Vector m;
    Vector v;
    Vector v_hat_max;
    Vector accum;
    Vector delta_accum;
    Vector velocity;
};

OptimizerState make_optimizer(OptimizerKind kind, std::size_t num_params, const Hyper& hyper);
OptimizerState make_optimizer(OptimizerKind kind, std::size_t num_params);

// Every rule returns the updated parameters and advances state.t by one.
// A gradient of the wrong length throws ConfigError; a non-finite gradient
// throws RunError.

Vector step_sgd(OptimizerState& state, const Vector& params, const Vector& g);
/// V <- beta V + (1 - beta) g;  theta <- theta - eta V.
Vector step_sgd_momentum(OptimizerState& state, const Vector& params, const Vector& g);
Vector step_adagrad(OptimizerState& state, const Vector& params, const Vector& g);
Vector step_adadelta(OptimizerState& state, const Vector& params, const Vector& g);
Vector step_rmsprop(OptimizerState& state, const Vector& params, const Vector& g);
Vector step_amsgrad(OptimizerState& state, const Vector& params, const Vector& g);
/// Bias-corrected Adam.
Vector step_adam(OptimizerState& state, const Vector& params, const Vector& g);
/// Adam's update fed with a swarm-approximated, descent-oriented gradient.
Vector step_adaswarm(OptimizerState& state, const Vector& params, const Vector& g);

/// Dispatches on state.kind.
Vector step(OptimizerState& state, const Vector& params, const Vector& g);

} // namespace swarmgrad
