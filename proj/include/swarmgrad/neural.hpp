#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "swarmgrad/losses.hpp"
#include "swarmgrad/optimizers.hpp"
#include "swarmgrad/swarm.hpp"
#include "swarmgrad/types.hpp"

namespace swarmgrad {

enum class Activation { sigmoid, tanh, relu, identity };

std::string to_string(Activation a);
Activation parse_activation(std::string_view name);

struct Layer {
    Matrix weights;  // [out x in]
    Vector bias;     // [out]
    Activation activation = Activation::sigmoid;

    Eigen::Index inputs() const { return weights.cols(); }
    Eigen::Index outputs() const { return weights.rows(); }
};

/// Fully connected feed-forward network; batches are row-major [batch x features].
class Network {
public:
    Network() = default;
    /// Throws ConfigError if consecutive layer shapes do not chain.
    explicit Network(std::vector<Layer> layers);

    /// Layer sizes {in, h1, ..., out}; weights uniform in [-0.5, 0.5].
    static Network random(const std::vector<std::size_t>& sizes, const std::vector<Activation>& activations,
                          std::uint64_t seed);
    /// input -> hidden sigmoid units -> sigmoid outputs.
    static Network default_topology(std::size_t inputs, std::size_t outputs, std::uint64_t seed,
                                    std::size_t hidden = 10);

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }
    Eigen::Index input_dimension() const;
    Eigen::Index output_dimension() const;

    /// Flat view: per layer, weights column-major then bias.
    std::size_t parameter_count() const;
    Vector parameters() const;
    void set_parameters(const Vector& flat);

    nlohmann::json to_json() const;
    static Network from_json(const nlohmann::json& doc);

private:
    std::vector<Layer> layers_;
};

struct ActivationTrace {
    Matrix input;
    /// Per layer: net = a_prev W^T + b, and out = sigma(net).
    std::vector<Matrix> pre_activations;
    std::vector<Matrix> activations;

    const Matrix& predictions() const { return activations.back(); }
};

ActivationTrace forward(const Network& network, const Matrix& inputs);

struct LayerGradient {
    Matrix weights;
    Vector bias;
};

struct Gradients {
    std::vector<LayerGradient> layers;
    /// Same ordering as Network::parameters().
    Vector flatten() const;
};

/// Backpropagation with dE/dy at the output replaced by delta_out; gradients
/// are averaged over the batch.
Gradients backward(const Network& network, const ActivationTrace& trace, const Matrix& delta_out);

enum class GradientMode { analytic, swarm };

std::string to_string(GradientMode m);
GradientMode parse_gradient_mode(std::string_view name);

struct GradientSource {
    GradientMode mode = GradientMode::analytic;
    LossKind loss = LossKind::mse;
    /// Swarm over candidate output matrices; bounds are filled per batch.
    SwarmConfig swarm;
    double eta = 0.1;
    std::size_t swarm_steps = 20;
    /// Re-initialise the swarm for every batch. Carrying particles over
    /// (false) leaves them clustered around the previous batch's targets.
    bool reinit_per_batch = true;

    void validate() const;
};

/// Swarm searching prediction space: one particle coordinate per
/// (sample, class) entry of the batch, fitness = loss(candidate, targets).
class BatchSwarm {
public:
    /// Prepares the swarm for a batch: initialises it on first use, on a
    /// shape change or when reinit_per_batch is set; otherwise keeps the
    /// particles and re-scores the bests against the new targets. Then runs
    /// source.swarm_steps EMPSO steps.
    void advance(const Matrix& targets, const GradientSource& source);

    bool initialized() const { return state_.has_value(); }
    const SwarmState& state() const { return *state_; }
    /// gbest reshaped to [batch x classes].
    Matrix gbest() const;
    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }

private:
    std::optional<SwarmState> state_;
    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
    std::uint64_t batches_seen_ = 0;
};

/// Descent-oriented swarm delta (coeff_sum_avg / eta) * (predictions - gbest).
/// Advances the batch swarm first.
Matrix output_delta_swarm(const Matrix& predictions, const Matrix& targets, const GradientSource& source,
                          BatchSwarm& swarm);

/// Swarm delta against an already advanced swarm.
Matrix swarm_delta(const Matrix& predictions, const Matrix& gbest, double coeff_sum_avg, double eta);

/// Analytic dE/dy; MAE entries with p == y get a zero subgradient.
Matrix output_delta_analytic(const Matrix& predictions, const Matrix& targets, LossKind loss);

struct Batch {
    Matrix features;
    Matrix targets;
};

struct EpochMetrics {
    double loss_running_avg = 0.0;
    double accuracy_running_avg = 0.0;
    std::size_t batches = 0;
};

/// Fraction of rows whose argmax matches the one-hot target's argmax.
double accuracy(const Matrix& predictions, const Matrix& targets);

/// Per batch: forward, output delta, backward, one optimizer step. Metrics
/// are cumulative averages over the batches seen so far.
/// Throws RunError naming the batch index when the loss goes non-finite.
EpochMetrics train_epoch(Network& network, const std::vector<Batch>& batches, const GradientSource& source,
                         OptimizerState& optimizer, BatchSwarm& swarm);

} // namespace swarmgrad
