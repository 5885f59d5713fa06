#include "swarmgrad/neural.hpp"

#include <cmath>

#include "swarmgrad/errors.hpp"
#include "swarmgrad/random.hpp"

namespace swarmgrad {

std::string to_string(Activation a) {
    switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
    }
    return "?";
}

Activation parse_activation(std::string_view name) {
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    if (name == "identity") return Activation::identity;
    throw ParseError("unknown activation '" + std::string(name) + "'");
}

std::string to_string(GradientMode m) { return m == GradientMode::analytic ? "analytic" : "swarm"; }

GradientMode parse_gradient_mode(std::string_view name) {
    if (name == "analytic") return GradientMode::analytic;
    if (name == "swarm") return GradientMode::swarm;
    throw ValidationError("unknown gradient source '" + std::string(name) + "'");
}

namespace {

Matrix activate(Activation a, const Matrix& net) {
    switch (a) {
    case Activation::sigmoid: return (1.0 / (1.0 + (-net.array()).exp())).matrix();
    case Activation::tanh: return net.array().tanh().matrix();
    case Activation::relu: return net.cwiseMax(0.0);
    case Activation::identity: return net;
    }
    return net;
}

/// d sigma / d net, written in terms of whichever of net/out is cheaper.
Matrix activation_derivative(Activation a, const Matrix& net, const Matrix& out) {
    switch (a) {
    case Activation::sigmoid: return (out.array() * (1.0 - out.array())).matrix();
    case Activation::tanh: return (1.0 - out.array().square()).matrix();
    case Activation::relu: return (net.array() > 0.0).cast<double>().matrix();
    case Activation::identity: return Matrix::Ones(net.rows(), net.cols());
    }
    return Matrix::Ones(net.rows(), net.cols());
}

} // namespace

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw ConfigError("network needs at least one layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& layer = layers_[l];
        if (layer.bias.size() != layer.outputs()) {
            throw ConfigError("layer " + std::to_string(l) + ": bias length differs from output count");
        }
        if (l > 0 && layer.inputs() != layers_[l - 1].outputs()) {
            throw ConfigError("layer " + std::to_string(l) + " expects " + std::to_string(layer.inputs()) +
                              " inputs but previous layer has " + std::to_string(layers_[l - 1].outputs()) +
                              " outputs");
        }
        if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
            throw ConfigError("layer " + std::to_string(l) + " has non-finite weights");
        }
    }
}

Network Network::random(const std::vector<std::size_t>& sizes, const std::vector<Activation>& activations,
                        std::uint64_t seed) {
    if (sizes.size() < 2 || activations.size() != sizes.size() - 1) {
        throw ConfigError("network: need one activation per layer transition");
    }
    Rng rng(seed);
    std::vector<Layer> layers;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Layer layer;
        const auto in = static_cast<Eigen::Index>(sizes[l]);
        const auto out = static_cast<Eigen::Index>(sizes[l + 1]);
        layer.weights.resize(out, in);
        layer.bias.resize(out);
        for (Eigen::Index c = 0; c < in; ++c)
            for (Eigen::Index r = 0; r < out; ++r) layer.weights(r, c) = uniform(rng, -0.5, 0.5);
        for (Eigen::Index r = 0; r < out; ++r) layer.bias[r] = uniform(rng, -0.5, 0.5);
        layer.activation = activations[l];
        layers.push_back(std::move(layer));
    }
    return Network(std::move(layers));
}

Network Network::default_topology(std::size_t inputs, std::size_t outputs, std::uint64_t seed, std::size_t hidden) {
    return random({inputs, hidden, outputs}, {Activation::sigmoid, Activation::sigmoid}, seed);
}

Eigen::Index Network::input_dimension() const { return layers_.front().inputs(); }
Eigen::Index Network::output_dimension() const { return layers_.back().outputs(); }

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

Vector Network::parameters() const {
    Vector flat(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index k = 0;
    for (const auto& l : layers_) {
        flat.segment(k, l.weights.size()) = l.weights.reshaped();
        k += l.weights.size();
        flat.segment(k, l.bias.size()) = l.bias;
        k += l.bias.size();
    }
    return flat;
}

void Network::set_parameters(const Vector& flat) {
    if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
        throw ConfigError("set_parameters: expected " + std::to_string(parameter_count()) + " values, got " +
                          std::to_string(flat.size()));
    }
    Eigen::Index k = 0;
    for (auto& l : layers_) {
        l.weights.reshaped() = flat.segment(k, l.weights.size());
        k += l.weights.size();
        l.bias = flat.segment(k, l.bias.size());
        k += l.bias.size();
    }
}

nlohmann::json Network::to_json() const {
    nlohmann::json doc;
    doc["input_dimension"] = input_dimension();
    doc["output_dimension"] = output_dimension();
    auto& arr = doc["layers"] = nlohmann::json::array();
    for (const auto& l : layers_) {
        nlohmann::json layer;
        layer["inputs"] = l.inputs();
        layer["outputs"] = l.outputs();
        layer["activation"] = to_string(l.activation);
        auto& w = layer["weights"] = nlohmann::json::array();
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
            std::vector<double> row(l.weights.cols());
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c) row[c] = l.weights(r, c);
            w.push_back(row);
        }
        layer["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
        arr.push_back(std::move(layer));
    }
    return doc;
}

Network Network::from_json(const nlohmann::json& doc) {
    try {
        std::vector<Layer> layers;
        for (const auto& jl : doc.at("layers")) {
            Layer l;
            const auto rows = jl.at("outputs").get<Eigen::Index>();
            const auto cols = jl.at("inputs").get<Eigen::Index>();
            l.activation = parse_activation(jl.at("activation").get<std::string>());
            l.weights.resize(rows, cols);
            const auto& w = jl.at("weights");
            if (static_cast<Eigen::Index>(w.size()) != rows) throw ParseError("network json: weight row count");
            for (Eigen::Index r = 0; r < rows; ++r) {
                const auto row = w.at(r).get<std::vector<double>>();
                if (static_cast<Eigen::Index>(row.size()) != cols) throw ParseError("network json: ragged weights");
                for (Eigen::Index c = 0; c < cols; ++c) l.weights(r, c) = row[c];
            }
            const auto b = jl.at("bias").get<std::vector<double>>();
            l.bias = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
            layers.push_back(std::move(l));
        }
        return Network(std::move(layers));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("network json: ") + e.what());
    }
}

ActivationTrace forward(const Network& network, const Matrix& inputs) {
    if (inputs.cols() != network.input_dimension()) {
        throw ConfigError("forward: input width " + std::to_string(inputs.cols()) + " != network input dimension " +
                          std::to_string(network.input_dimension()));
    }
    ActivationTrace trace;
    trace.input = inputs;
    const Matrix* prev = &trace.input;
    for (const auto& layer : network.layers()) {
        Matrix net = (*prev) * layer.weights.transpose();
        net.rowwise() += layer.bias.transpose();
        trace.activations.push_back(activate(layer.activation, net));
        trace.pre_activations.push_back(std::move(net));
        prev = &trace.activations.back();
    }
    return trace;
}

Vector Gradients::flatten() const {
    Eigen::Index n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    Vector flat(n);
    Eigen::Index k = 0;
    for (const auto& l : layers) {
        flat.segment(k, l.weights.size()) = l.weights.reshaped();
        k += l.weights.size();
        flat.segment(k, l.bias.size()) = l.bias;
        k += l.bias.size();
    }
    return flat;
}

Gradients backward(const Network& network, const ActivationTrace& trace, const Matrix& delta_out) {
    const auto& layers = network.layers();
    if (trace.activations.size() != layers.size()) throw ConfigError("backward: trace does not match network");
    const Matrix& pred = trace.predictions();
    if (delta_out.rows() != pred.rows() || delta_out.cols() != pred.cols()) {
        throw ConfigError("backward: delta shape " + std::to_string(delta_out.rows()) + "x" +
                          std::to_string(delta_out.cols()) + " != prediction shape " + std::to_string(pred.rows()) +
                          "x" + std::to_string(pred.cols()));
    }
    const double batch = static_cast<double>(pred.rows());

    Gradients grads;
    grads.layers.resize(layers.size());
    // delta = dE/dnet for the current layer.
    Matrix delta = delta_out.cwiseProduct(
        activation_derivative(layers.back().activation, trace.pre_activations.back(), trace.activations.back()));
    for (std::size_t l = layers.size(); l-- > 0;) {
        const Matrix& a_prev = l == 0 ? trace.input : trace.activations[l - 1];
        grads.layers[l].weights = delta.transpose() * a_prev / batch;
        grads.layers[l].bias = delta.colwise().sum().transpose() / batch;
        if (l > 0) {
            delta = (delta * layers[l].weights)
                        .cwiseProduct(activation_derivative(layers[l - 1].activation, trace.pre_activations[l - 1],
                                                            trace.activations[l - 1]));
        }
    }
    return grads;
}

void GradientSource::validate() const {
    if (mode == GradientMode::swarm) {
        if (!(eta > 0.0)) throw ConfigError("swarm gradient source requires eta > 0");
        if (swarm_steps < 1) throw ConfigError("swarm gradient source requires swarm_steps >= 1");
    }
}

namespace {

Bound prediction_box(LossKind loss) {
    // BCE is undefined on the closed ends.
    if (loss == LossKind::bce) return {1e-6, 1.0 - 1e-6};
    return {0.0, 1.0};
}

} // namespace

void BatchSwarm::advance(const Matrix& targets, const GradientSource& source) {
    source.validate();
    const LossKind loss = source.loss;
    const Eigen::Index rows = targets.rows();
    const Eigen::Index cols = targets.cols();
    const Fitness fitness = [&targets, loss, rows, cols](const Vector& candidate) {
        return loss_forward(loss, candidate.reshaped(rows, cols), targets);
    };

    SwarmConfig cfg = source.swarm;
    cfg.bounds.assign(static_cast<std::size_t>(rows * cols), prediction_box(loss));

    const bool same_shape = state_ && rows == rows_ && cols == cols_;
    if (!same_shape || source.reinit_per_batch) {
        cfg.rng_seed = derive_seed(source.swarm.rng_seed, batches_seen_);
        state_ = init_swarm(cfg, static_cast<std::size_t>(rows * cols), fitness);
        rows_ = rows;
        cols_ = cols;
    } else {
        reset_bests(*state_, fitness);
    }
    ++batches_seen_;
    for (std::size_t k = 0; k < source.swarm_steps; ++k) step_empso(*state_, cfg, fitness);
}

Matrix BatchSwarm::gbest() const {
    if (!state_) throw ConfigError("batch swarm not initialized");
    return state_->gbest_position.reshaped(rows_, cols_);
}

Matrix swarm_delta(const Matrix& predictions, const Matrix& gbest, double coeff_sum_avg, double eta) {
    if (predictions.rows() != gbest.rows() || predictions.cols() != gbest.cols()) {
        throw ConfigError("swarm delta: prediction and gbest shapes differ");
    }
    if (!(eta > 0.0)) throw ConfigError("swarm delta: eta must be > 0");
    return (coeff_sum_avg / eta) * (predictions - gbest);
}

Matrix output_delta_swarm(const Matrix& predictions, const Matrix& targets, const GradientSource& source,
                          BatchSwarm& swarm) {
    if (source.mode != GradientMode::swarm) throw ConfigError("output_delta_swarm needs a swarm gradient source");
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
        throw ConfigError("output_delta_swarm: prediction and target shapes differ");
    }
    swarm.advance(targets, source);
    return swarm_delta(predictions, swarm.gbest(), swarm.state().coeff_sum_avg, source.eta);
}

Matrix output_delta_analytic(const Matrix& predictions, const Matrix& targets, LossKind loss) {
    if (loss == LossKind::mae) {
        // sign(p - y), zero where undefined
        return (predictions - targets).array().sign().matrix();
    }
    if (loss == LossKind::bce) {
        const Matrix p = predictions.cwiseMax(1e-12).cwiseMin(1.0 - 1e-12);
        return std::get<Matrix>(loss_grad_analytic(loss, p, targets));
    }
    return std::get<Matrix>(loss_grad_analytic(loss, predictions, targets));
}

double accuracy(const Matrix& predictions, const Matrix& targets) {
    if (predictions.rows() == 0) return 0.0;
    std::size_t hits = 0;
    for (Eigen::Index r = 0; r < predictions.rows(); ++r) {
        Eigen::Index p = 0, t = 0;
        predictions.row(r).maxCoeff(&p);
        targets.row(r).maxCoeff(&t);
        if (p == t) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.rows());
}

EpochMetrics train_epoch(Network& network, const std::vector<Batch>& batches, const GradientSource& source,
                         OptimizerState& optimizer, BatchSwarm& swarm) {
    source.validate();
    EpochMetrics metrics;
    for (std::size_t b = 0; b < batches.size(); ++b) {
        const Batch& batch = batches[b];
        const ActivationTrace trace = forward(network, batch.features);
        const Matrix& pred = trace.predictions();

        const Matrix scored =
            source.loss == LossKind::bce ? Matrix(pred.cwiseMax(1e-12).cwiseMin(1.0 - 1e-12)) : pred;
        const double loss = loss_forward(source.loss, scored, batch.targets);
        if (!std::isfinite(loss)) throw RunError("non-finite loss at batch " + std::to_string(b));

        const Matrix delta = source.mode == GradientMode::swarm
                                 ? output_delta_swarm(pred, batch.targets, source, swarm)
                                 : output_delta_analytic(pred, batch.targets, source.loss);
        const Gradients grads = backward(network, trace, delta);
        network.set_parameters(step(optimizer, network.parameters(), grads.flatten()));

        const double n = static_cast<double>(b + 1);
        metrics.loss_running_avg += (loss - metrics.loss_running_avg) / n;
        metrics.accuracy_running_avg += (accuracy(pred, batch.targets) - metrics.accuracy_running_avg) / n;
        metrics.batches = b + 1;
    }
    return metrics;
}

} // namespace swarmgrad
