#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "swarmgrad/types.hpp"

namespace swarmgrad {

enum class LossKind { mse, bce, mae };

std::string to_string(LossKind kind);
LossKind parse_loss(std::string_view name);

/// Mean over every entry of a [batch x classes] prediction matrix.
///   mse: 1/2 (p - y)^2
///   bce: -y log p - (1 - y) log(1 - p)
///   mae: |p - y|
/// Throws ConfigError on shape mismatch and DomainError when bce gets a
/// prediction outside (0, 1) or a target outside {0, 1}.
double loss_forward(LossKind kind, const Matrix& predictions, const Matrix& targets);

/// Returned instead of a gradient when MAE is queried at p == y.
struct UndefinedGradient {
    /// (row, col) entries where the derivative does not exist.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> entries;
};

using OutputGradient = std::variant<Matrix, UndefinedGradient>;

/// Per-entry dE/dp of the per-sample loss:
///   mse: p - y;  bce: (p - y) / (p (1 - p));  mae: sign(p - y).
OutputGradient loss_grad_analytic(LossKind kind, const Matrix& predictions, const Matrix& targets);

} // namespace swarmgrad
