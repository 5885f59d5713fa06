#include "swarmgrad/objectives.hpp"

#include <cmath>
#include <numbers>

#include "swarmgrad/errors.hpp"

namespace swarmgrad {

std::optional<double> Objective::evaluate(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != dimension) {
        throw ConfigError("objective '" + name + "' expects dimension " + std::to_string(dimension) +
                          ", got " + std::to_string(x.size()));
    }
    return function(x);
}

namespace {

Objective scalar_entry(std::string name, std::string formula, std::function<std::optional<double>(double)> f,
                       Bound bound, bool differentiable, double min_value, double minimizer,
                       std::function<double(double)> df = {}, std::vector<double> kinks = {}) {
    Objective o;
    o.name = std::move(name);
    o.formula = std::move(formula);
    o.function = [f = std::move(f)](const Vector& x) { return f(x[0]); };
    o.dimension = 1;
    o.bounds = {bound};
    o.differentiable = differentiable;
    o.known_minimum_value = min_value;
    o.known_minimizer = Vector::Constant(1, minimizer);
    o.kinks = std::move(kinks);
    if (df) {
        o.gradient = [df = std::move(df)](const Vector& x) { return Vector::Constant(1, df(x[0])); };
    }
    return o;
}

std::vector<Objective> build_catalogue() {
    using std::cos;
    using std::exp;
    using std::pow;
    using std::sin;

    std::vector<Objective> c;

    // Differentiable set.
    c.push_back(scalar_entry(
        "x5x10", "-(3x^5 - x^10)",
        [](double x) -> std::optional<double> { return -(3.0 * pow(x, 5) - pow(x, 10)); },
        {-2.0, 2.0}, true, -2.25, pow(1.5, 0.2),
        [](double x) { return -15.0 * pow(x, 4) + 10.0 * pow(x, 9); }));

    // Unbounded below as x -> -inf; the box keeps x = 2 the global minimum.
    c.push_back(scalar_entry(
        "poly3", "x^3 - 3x^2 + 7",
        [](double x) -> std::optional<double> { return x * x * x - 3.0 * x * x + 7.0; },
        {-0.5, 4.0}, true, 3.0, 2.0,
        [](double x) { return 3.0 * x * x - 6.0 * x; }));

    c.push_back(scalar_entry(
        "negexpcos", "-exp(cos(x^2)) + x^2",
        [](double x) -> std::optional<double> { return -exp(cos(x * x)) + x * x; },
        {-2.0, 2.0}, true, -std::numbers::e, 0.0,
        [](double x) { return 2.0 * x * sin(x * x) * exp(cos(x * x)) + 2.0 * x; }));

    c.push_back(scalar_entry(
        "x15mix", "x^15 - sin(x) + exp(x^6)",
        [](double x) -> std::optional<double> { return pow(x, 15) - sin(x) + exp(pow(x, 6)); },
        {-1.5, 1.5}, true, 0.4747057803205634, 0.6512083981831234,
        [](double x) { return 15.0 * pow(x, 14) - cos(x) + 6.0 * pow(x, 5) * exp(pow(x, 6)); }));

    // Non-differentiable set.
    c.push_back(scalar_entry(
        "sqrt", "sqrt(x)",
        [](double x) -> std::optional<double> {
            if (x < 0.0) return std::nullopt;
            return std::sqrt(x);
        },
        {0.0, 4.0}, false, 0.0, 0.0, {}, {0.0}));

    c.push_back(scalar_entry(
        "abs", "|x|", [](double x) -> std::optional<double> { return std::abs(x); },
        {-2.0, 2.0}, false, 0.0, 0.0, {}, {0.0}));

    c.push_back(scalar_entry(
        "cbrt_sin", "x^(1/3) + sin(x) if x > 0, else 0",
        [](double x) -> std::optional<double> { return x > 0.0 ? std::cbrt(x) + sin(x) : 0.0; },
        {-2.0, 2.0}, false, 0.0, 0.0, {}, {0.0}));

    c.push_back(scalar_entry(
        "piecewise_lin_quad", "x if x > 0, x^2 if x < 0, 0 at 0",
        [](double x) -> std::optional<double> {
            if (x > 0.0) return x;
            if (x < 0.0) return x * x;
            return 0.0;
        },
        {-2.0, 2.0}, false, 0.0, 0.0, {}, {0.0}));

    return c;
}

} // namespace

const std::vector<Objective>& catalogue() {
    static const std::vector<Objective> entries = build_catalogue();
    return entries;
}

const Objective& find_objective(std::string_view name) {
    for (const auto& o : catalogue()) {
        if (o.name == name) return o;
    }
    throw ValidationError("unknown objective '" + std::string(name) + "'");
}

Objective make_objective(std::string name, std::function<double(double)> f, Bound bound, bool differentiable) {
    Objective o;
    o.name = std::move(name);
    o.formula = o.name;
    o.function = [f = std::move(f)](const Vector& x) -> std::optional<double> { return f(x[0]); };
    o.dimension = 1;
    o.bounds = {bound};
    o.differentiable = differentiable;
    return o;
}

FdGradient fd_gradient(const Objective& objective, const Vector& x, double h) {
    if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
    if (static_cast<std::size_t>(x.size()) != objective.dimension) {
        throw ConfigError("fd_gradient: dimension mismatch");
    }

    FdGradient result;
    Vector grad(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        bool near_kink = false;
        for (double k : objective.kinks) {
            if (std::abs(x[i] - k) < h) near_kink = true;
        }

        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const auto f0 = objective.evaluate(x);
        const auto fp = objective.evaluate(xp);
        const auto fm = objective.evaluate(xm);

        if (!near_kink && fp && fm) {
            grad[i] = (*fp - *fm) / (2.0 * h);
            continue;
        }
        if (f0 && fp) {
            grad[i] = (*fp - *f0) / h;
        } else if (f0 && fm) {
            grad[i] = (*f0 - *fm) / h;
        } else {
            return {std::nullopt, true, near_kink || result.kink};
        }
        result.one_sided = true;
        result.kink = result.kink || near_kink;
    }
    result.value = std::move(grad);
    return result;
}

} // namespace swarmgrad
