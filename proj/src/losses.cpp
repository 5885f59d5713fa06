#include "swarmgrad/losses.hpp"

#include <cmath>

#include "swarmgrad/errors.hpp"

namespace swarmgrad {

std::string to_string(LossKind kind) {
    switch (kind) {
    case LossKind::mse: return "mse";
    case LossKind::bce: return "bce";
    case LossKind::mae: return "mae";
    }
    return "?";
}

LossKind parse_loss(std::string_view name) {
    if (name == "mse") return LossKind::mse;
    if (name == "bce") return LossKind::bce;
    if (name == "mae") return LossKind::mae;
    throw ValidationError("unknown loss '" + std::string(name) + "' (expected mse, bce or mae)");
}

namespace {

void check_shapes(const Matrix& p, const Matrix& y) {
    if (p.rows() != y.rows() || p.cols() != y.cols()) {
        throw ConfigError("loss: prediction shape " + std::to_string(p.rows()) + "x" + std::to_string(p.cols()) +
                          " does not match target shape " + std::to_string(y.rows()) + "x" +
                          std::to_string(y.cols()));
    }
    if (p.size() == 0) throw ConfigError("loss: empty batch");
}

void check_bce_domain(const Matrix& p, const Matrix& y) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double pi = p.data()[i];
        if (!(pi > 0.0 && pi < 1.0)) {
            throw DomainError("bce: prediction " + std::to_string(pi) + " outside (0, 1)");
        }
        const double yi = y.data()[i];
        if (yi != 0.0 && yi != 1.0) {
            throw DomainError("bce: target " + std::to_string(yi) + " not in {0, 1}");
        }
    }
}

} // namespace

double loss_forward(LossKind kind, const Matrix& predictions, const Matrix& targets) {
    check_shapes(predictions, targets);
    const auto diff = (predictions - targets).array();
    switch (kind) {
    case LossKind::mse:
        return 0.5 * diff.square().mean();
    case LossKind::mae:
        return diff.abs().mean();
    case LossKind::bce: {
        check_bce_domain(predictions, targets);
        const auto p = predictions.array();
        const auto y = targets.array();
        return (-y * p.log() - (1.0 - y) * (1.0 - p).log()).mean();
    }
    }
    return 0.0;
}

OutputGradient loss_grad_analytic(LossKind kind, const Matrix& predictions, const Matrix& targets) {
    check_shapes(predictions, targets);
    switch (kind) {
    case LossKind::mse:
        return Matrix(predictions - targets);
    case LossKind::bce: {
        check_bce_domain(predictions, targets);
        const auto p = predictions.array();
        return Matrix((p - targets.array()) / (p * (1.0 - p)));
    }
    case LossKind::mae: {
        Matrix g(predictions.rows(), predictions.cols());
        UndefinedGradient undefined;
        for (Eigen::Index c = 0; c < g.cols(); ++c) {
            for (Eigen::Index r = 0; r < g.rows(); ++r) {
                const double d = predictions(r, c) - targets(r, c);
                if (d == 0.0) undefined.entries.emplace_back(r, c);
                g(r, c) = d > 0.0 ? 1.0 : -1.0;
            }
        }
        if (!undefined.entries.empty()) return undefined;
        return g;
    }
    }
    return Matrix();
}

} // namespace swarmgrad
