#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmgrad/types.hpp"

namespace swarmgrad {

/// A benchmark function together with its search box and known optimum.
///
/// The mapping is total: points outside the mathematical domain (sqrt of a
/// negative number, say) yield std::nullopt instead of NaN.
struct Objective {
    using Function = std::function<std::optional<double>(const Vector&)>;
    using Gradient = std::function<Vector(const Vector&)>;

    std::string name;
    std::string formula;
    Function function;
    std::size_t dimension = 1;
    Bounds bounds;
    bool differentiable = true;
    std::optional<double> known_minimum_value;
    std::optional<Vector> known_minimizer;
    /// Points where the function is continuous but has no derivative (1-D).
    std::vector<double> kinks;
    /// Closed-form derivative, present for the differentiable entries only.
    Gradient gradient;

    /// Throws ConfigError when x has the wrong dimension.
    std::optional<double> evaluate(const Vector& x) const;
    std::optional<double> evaluate(double x) const { return evaluate(Vector::Constant(1, x)); }
};

/// The eight one-dimensional functions used for the minimization tables.
/// Order: x5x10, poly3, negexpcos, x15mix, sqrt, abs, cbrt_sin,
/// piecewise_lin_quad.
const std::vector<Objective>& catalogue();

/// Looks up a catalogue entry by its CLI name. Throws ValidationError.
const Objective& find_objective(std::string_view name);

/// Convenience wrapper for ad-hoc 1-D objectives (tests, sweeps).
Objective make_objective(std::string name, std::function<double(double)> f, Bound bound,
                         bool differentiable = true);

struct FdGradient {
    std::optional<Vector> value;
    bool one_sided = false;
    /// The query landed within h of a catalogued kink.
    bool kink = false;
};

/// Finite-difference gradient. Central by default, one-sided next to a kink
/// or a domain edge, absent when neither neighbour is defined.
FdGradient fd_gradient(const Objective& objective, const Vector& x, double h = 1e-5);

} // namespace swarmgrad
