#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "swarmgrad/objectives.hpp"
#include "swarmgrad/swarm.hpp"
#include "swarmgrad/types.hpp"

namespace swarmgrad {

enum class GradientRegime { near, far, shifted };

std::string to_string(GradientRegime r);

/// Swarm-derived gradient.
///
/// `value` follows the ascent-form algebra w <- w + eta * value, so it points
/// against the true derivative; `descent_value` (= -value) carries the
/// conventional sign and is what minimizers should subtract.
struct GradientEstimate {
    Vector value;
    /// -(c1 r1 + c2 r2) / eta; never positive.
    double coefficient = 0.0;
    Vector gbest_used;
    GradientRegime regime = GradientRegime::near;
    Vector descent_value;
};

/// Curvature surrogate -(c1 r1 + c2 r2) / eta. Reported only; it is negative
/// at minima where the true curvature is positive.
double second_derivative_estimate(double coeff_sum_avg, double eta);

/// value = -(coeff_sum_avg / eta) * (w - gbest).
GradientEstimate approx_gradient_near(const Vector& w, const Vector& gbest, double coeff_sum_avg, double eta);

/// value = v - [c1r1 (w - pbest) + c2r2 (w - gbest)] / eta, with v the
/// velocity of the particle that set gbest. Reduces exactly to the near
/// regime when v = 0 and pbest = gbest.
GradientEstimate approx_gradient_far(const Vector& w, const Vector& v, const Vector& pbest, const Vector& gbest,
                                     double c1r1, double c2r2, double eta);

/// Near-regime formula evaluated at the shifted point z = x + alpha.
GradientEstimate approx_gradient_shifted(const Vector& x, double alpha, const Vector& gbest, double coeff_sum_avg,
                                         double eta);

struct EmulationConfig {
    double eta = 0.1;
    /// Momentum factor of the SGD-momentum emulation.
    double beta = 0.9;
    SwarmConfig swarm;
    /// Update rule of the driving swarm.
    SwarmVariant variant = SwarmVariant::empso;
    std::size_t steps_per_query = 1;
    double shift_alpha = 0.0;
    /// Stop once |f(w) - gbest_fitness| drops below this.
    double value_tolerance = 1e-6;
    /// ...and gbest_fitness moved less than value_tolerance in the last query.
    bool require_settled_swarm = true;
    std::size_t max_iterations = 1000;

    void validate() const;
};

struct Trajectory {
    std::vector<double> w_history;
    std::vector<double> f_history;
    /// Queries until the stopping rule fired; equals max_iterations otherwise.
    std::size_t iterations = 0;
    bool reached_tolerance = false;
    Vector final_w;
    double final_value = 0.0;
    double gbest_fitness = 0.0;
    Vector gbest_position;
};

/// Gradient descent driven by swarm estimates: per query the swarm advances
/// steps_per_query steps, then w <- w + eta * value (a contraction
/// toward gbest). Non-differentiable objectives use the shifted estimate.
/// Iterates are kept inside the objective's box.
Trajectory emulate_gd(const Objective& objective, const EmulationConfig& cfg, const Vector& w0);

/// SGD with momentum in the swarm-equivalent parameterisation eta = 1 - beta,
/// alpha = eta * beta / (1 - beta):
///   w <- w + alpha * V + eta * value;  V <- beta * V + (1 - beta) * value.
/// beta = 0 reproduces emulate_gd exactly.
Trajectory emulate_sgd_momentum(const Objective& objective, const EmulationConfig& cfg, const Vector& w0);

struct SweepRow {
    double x = 0.0;
    std::optional<double> fd_gradient;
    std::optional<double> approx_gradient;
    double gbest = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    double gbest = 0.0;
    double coeff_sum_avg = 0.0;

    /// Fraction of rows with both columns present whose signs agree
    /// (a zero only agrees with a zero).
    double sign_agreement() const;
    void write_csv(std::ostream& os) const;
};

/// Runs the configured swarm variant on the objective to convergence.
SwarmResult converge_swarm(const Objective& objective, const EmulationConfig& cfg);

/// Compares finite-difference and swarm-approximated gradients on an evenly
/// spaced grid. Rows outside the objective's domain have both columns absent.
SweepTable gradient_sweep(const Objective& objective, Bound interval, std::size_t num_points,
                          const EmulationConfig& cfg);

/// Same, against an already converged swarm.
SweepTable gradient_sweep(const Objective& objective, Bound interval, std::size_t num_points, double eta,
                          const SwarmState& converged);

} // namespace swarmgrad
