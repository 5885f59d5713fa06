#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmgrad/objectives.hpp"
#include "swarmgrad/random.hpp"
#include "swarmgrad/types.hpp"

namespace swarmgrad {

enum class SwarmVariant { vanilla, mpso, empso };

std::string to_string(SwarmVariant v);
SwarmVariant parse_variant(std::string_view name);

struct SwarmConfig {
    std::size_t num_particles = 20;
    double c1 = 0.8;
    double c2 = 0.9;
    /// EMPSO momentum factor, in [0, 1).
    double beta = 0.9;
    /// Inertia weight of the vanilla update.
    double inertia = 0.5;
    /// MPSO blend of the previous velocity, in [0, 1].
    double lambda = 0.1;
    Bounds bounds;
    std::size_t max_iterations = 200;
    double fitness_tolerance = 1e-8;
    std::uint64_t rng_seed = 1;

    /// Throws ConfigError listing the first violated constraint.
    void validate() const;
};

struct Particle {
    Vector position;
    Vector velocity;
    /// Exponentially averaged velocity (EMPSO).
    Vector momentum;
    /// Velocity before the latest update (MPSO).
    Vector prev_velocity;
    Vector pbest_position;
    double pbest_fitness = 0.0;

    bool operator==(const Particle&) const = default;
};

struct SwarmState {
    std::vector<Particle> particles;
    Vector gbest_position;
    double gbest_fitness = 0.0;
    /// Velocity of the particle that most recently improved gbest.
    Vector gbest_velocity;
    std::size_t iteration = 0;
    /// Mean over particles of c1*r1 + c2*r2 drawn in the latest step.
    double coeff_sum_avg = 0.0;
    double c1r1_avg = 0.0;
    double c2r2_avg = 0.0;
    Rng rng;

    std::size_t dimension() const { return static_cast<std::size_t>(gbest_position.size()); }
    bool operator==(const SwarmState&) const = default;
};

/// Fitness seen by the swarm. Non-finite values abort the step with RunError.
using Fitness = std::function<double(const Vector&)>;

/// Adapts a catalogue objective; out-of-domain points map to NaN.
Fitness as_fitness(const Objective& objective);

SwarmState init_swarm(const SwarmConfig& config, std::size_t dimension, const Fitness& fitness);
/// Empty config bounds fall back to the objective's box.
SwarmState init_swarm(const SwarmConfig& config, std::size_t dimension, const Objective& objective);

void step_vanilla(SwarmState& state, const SwarmConfig& config, const Fitness& fitness);
void step_mpso(SwarmState& state, const SwarmConfig& config, const Fitness& fitness);
void step_empso(SwarmState& state, const SwarmConfig& config, const Fitness& fitness);
void step(SwarmVariant variant, SwarmState& state, const SwarmConfig& config, const Fitness& fitness);

/// Re-scores every particle against a new fitness: pbest collapses to the
/// current position and gbest is recomputed. Positions, velocities and
/// momenta are kept.
void reset_bests(SwarmState& state, const Fitness& fitness);

struct SwarmResult {
    Vector gbest_position;
    double gbest_fitness = 0.0;
    std::size_t iterations_used = 0;
    std::vector<double> coeff_history;
    SwarmState final_state;
};

/// Window of steps over which gbest must improve by fitness_tolerance.
inline constexpr std::size_t kStagnationWindow = 10;

/// Steps the chosen variant until max_iterations or until gbest_fitness
/// improved by less than fitness_tolerance over kStagnationWindow steps.
SwarmResult run_swarm(const SwarmConfig& config, std::size_t dimension, const Fitness& fitness,
                      SwarmVariant variant);
SwarmResult run_swarm(const SwarmConfig& config, const Objective& objective, SwarmVariant variant);

} // namespace swarmgrad
