#include "swarmgrad/swarm.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "swarmgrad/errors.hpp"

namespace swarmgrad {

std::string to_string(SwarmVariant v) {
    switch (v) {
    case SwarmVariant::vanilla: return "vanilla";
    case SwarmVariant::mpso: return "mpso";
    case SwarmVariant::empso: return "empso";
    }
    return "?";
}

SwarmVariant parse_variant(std::string_view name) {
    if (name == "vanilla") return SwarmVariant::vanilla;
    if (name == "mpso") return SwarmVariant::mpso;
    if (name == "empso") return SwarmVariant::empso;
    throw ValidationError("unknown swarm variant '" + std::string(name) + "'");
}

void SwarmConfig::validate() const {
    if (num_particles < 1) throw ConfigError("num_particles must be >= 1");
    if (!(c1 >= 0.0)) throw ConfigError("c1 must be >= 0");
    if (!(c2 >= 0.0)) throw ConfigError("c2 must be >= 0");
    if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("beta must lie in [0, 1)");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
    if (!(inertia >= 0.0)) throw ConfigError("inertia must be >= 0");
    for (std::size_t d = 0; d < bounds.size(); ++d) {
        if (!(bounds[d].low < bounds[d].high)) {
            throw ConfigError("bounds[" + std::to_string(d) + "]: low must be < high");
        }
    }
}

Fitness as_fitness(const Objective& objective) {
    return [&objective](const Vector& x) {
        const auto v = objective.evaluate(x);
        return v ? *v : std::numeric_limits<double>::quiet_NaN();
    };
}

namespace {

std::string describe(const Vector& x) {
    std::ostringstream os;
    os << '[';
    const Eigen::Index shown = std::min<Eigen::Index>(x.size(), 8);
    for (Eigen::Index i = 0; i < shown; ++i) os << (i ? ", " : "") << x[i];
    if (x.size() > shown) os << ", ...";
    os << ']';
    return os.str();
}

double checked_fitness(const Fitness& fitness, const Vector& x, std::size_t particle) {
    const double f = fitness(x);
    if (!std::isfinite(f)) {
        throw RunError("non-finite fitness at particle " + std::to_string(particle) + ", position " + describe(x));
    }
    return f;
}

void check_dimension(const SwarmConfig& config, std::size_t dimension) {
    if (dimension < 1) throw ConfigError("swarm dimension must be >= 1");
    if (config.bounds.size() != dimension) {
        throw ConfigError("bounds have " + std::to_string(config.bounds.size()) + " entries but dimension is " +
                          std::to_string(dimension));
    }
}

void clamp_to_bounds(Vector& x, const Bounds& bounds) {
    for (Eigen::Index d = 0; d < x.size(); ++d) x[d] = bounds[d].clamp(x[d]);
}

/// Lowest-index particle with the smallest pbest; replaces gbest only on a
/// strict improvement so gbest_fitness never increases.
void update_gbest(SwarmState& s) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.particles.size(); ++i) {
        if (s.particles[i].pbest_fitness < s.particles[best].pbest_fitness) best = i;
    }
    const Particle& p = s.particles[best];
    if (p.pbest_fitness < s.gbest_fitness) {
        s.gbest_fitness = p.pbest_fitness;
        s.gbest_position = p.pbest_position;
        s.gbest_velocity = p.velocity;
    }
}

/// Shared step skeleton: draw (r1, r2) once per particle, let the variant
/// produce the new velocity, move, then refresh bests synchronously.
template <typename VelocityRule>
void generic_step(SwarmState& s, const SwarmConfig& config, const Fitness& fitness, VelocityRule&& rule) {
    if (s.particles.empty()) throw ConfigError("swarm not initialized");
    const std::size_t n = s.particles.size();
    double c1r1_sum = 0.0;
    double c2r2_sum = 0.0;
    for (auto& p : s.particles) {
        const double c1r1 = config.c1 * uniform01(s.rng);
        const double c2r2 = config.c2 * uniform01(s.rng);
        c1r1_sum += c1r1;
        c2r2_sum += c2r2;
        const Vector attraction = c1r1 * (p.pbest_position - p.position) + c2r2 * (s.gbest_position - p.position);
        rule(p, attraction);
        p.position += p.velocity;
        clamp_to_bounds(p.position, config.bounds);
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto& p = s.particles[i];
        const double f = checked_fitness(fitness, p.position, i);
        if (f < p.pbest_fitness) {
            p.pbest_fitness = f;
            p.pbest_position = p.position;
        }
    }
    update_gbest(s);
    s.c1r1_avg = c1r1_sum / static_cast<double>(n);
    s.c2r2_avg = c2r2_sum / static_cast<double>(n);
    s.coeff_sum_avg = s.c1r1_avg + s.c2r2_avg;
    ++s.iteration;
}

} // namespace

SwarmState init_swarm(const SwarmConfig& config, std::size_t dimension, const Fitness& fitness) {
    config.validate();
    check_dimension(config, dimension);

    SwarmState s;
    s.rng.seed(config.rng_seed);
    const auto d = static_cast<Eigen::Index>(dimension);
    s.particles.resize(config.num_particles);
    for (auto& p : s.particles) {
        p.position.resize(d);
        for (Eigen::Index k = 0; k < d; ++k) p.position[k] = uniform(s.rng, config.bounds[k].low, config.bounds[k].high);
        p.velocity = Vector::Zero(d);
        p.momentum = Vector::Zero(d);
        p.prev_velocity = Vector::Zero(d);
        p.pbest_position = p.position;
    }
    for (std::size_t i = 0; i < s.particles.size(); ++i) {
        s.particles[i].pbest_fitness = checked_fitness(fitness, s.particles[i].position, i);
    }
    s.gbest_fitness = std::numeric_limits<double>::infinity();
    s.gbest_velocity = Vector::Zero(d);
    update_gbest(s);
    return s;
}

SwarmState init_swarm(const SwarmConfig& config, std::size_t dimension, const Objective& objective) {
    if (dimension != objective.dimension) throw ConfigError("swarm dimension differs from objective dimension");
    if (config.bounds.empty()) {
        SwarmConfig boxed = config;
        boxed.bounds = objective.bounds;
        return init_swarm(boxed, dimension, as_fitness(objective));
    }
    return init_swarm(config, dimension, as_fitness(objective));
}

void step_vanilla(SwarmState& state, const SwarmConfig& config, const Fitness& fitness) {
    generic_step(state, config, fitness, [&](Particle& p, const Vector& attraction) {
        p.velocity = config.inertia * p.velocity + attraction;
    });
}

void step_mpso(SwarmState& state, const SwarmConfig& config, const Fitness& fitness) {
    const double lambda = config.lambda;
    generic_step(state, config, fitness, [&](Particle& p, const Vector& attraction) {
        Vector next = (1.0 - lambda) * (p.velocity + attraction) + lambda * p.prev_velocity;
        p.prev_velocity = std::move(p.velocity);
        p.velocity = std::move(next);
    });
}

void step_empso(SwarmState& state, const SwarmConfig& config, const Fitness& fitness) {
    const double beta = config.beta;
    generic_step(state, config, fitness, [&](Particle& p, const Vector& attraction) {
        p.velocity = beta * p.momentum + (1.0 - beta) * p.velocity + attraction;
        // Momentum absorbs the freshly computed velocity.
        p.momentum = beta * p.momentum + (1.0 - beta) * p.velocity;
    });
}

void step(SwarmVariant variant, SwarmState& state, const SwarmConfig& config, const Fitness& fitness) {
    switch (variant) {
    case SwarmVariant::vanilla: step_vanilla(state, config, fitness); return;
    case SwarmVariant::mpso: step_mpso(state, config, fitness); return;
    case SwarmVariant::empso: step_empso(state, config, fitness); return;
    }
}

void reset_bests(SwarmState& state, const Fitness& fitness) {
    for (std::size_t i = 0; i < state.particles.size(); ++i) {
        auto& p = state.particles[i];
        p.pbest_position = p.position;
        p.pbest_fitness = checked_fitness(fitness, p.position, i);
    }
    state.gbest_fitness = std::numeric_limits<double>::infinity();
    state.gbest_velocity = Vector::Zero(static_cast<Eigen::Index>(state.dimension()));
    update_gbest(state);
}

SwarmResult run_swarm(const SwarmConfig& config, std::size_t dimension, const Fitness& fitness,
                      SwarmVariant variant) {
    SwarmState state = init_swarm(config, dimension, fitness);
    std::vector<double> gbest_history{state.gbest_fitness};
    SwarmResult result;
    while (state.iteration < config.max_iterations) {
        step(variant, state, config, fitness);
        result.coeff_history.push_back(state.coeff_sum_avg);
        gbest_history.push_back(state.gbest_fitness);
        const std::size_t t = gbest_history.size() - 1;
        if (t >= kStagnationWindow &&
            gbest_history[t - kStagnationWindow] - gbest_history[t] < config.fitness_tolerance) {
            break;
        }
    }
    result.gbest_position = state.gbest_position;
    result.gbest_fitness = state.gbest_fitness;
    result.iterations_used = state.iteration;
    result.final_state = std::move(state);
    return result;
}

SwarmResult run_swarm(const SwarmConfig& config, const Objective& objective, SwarmVariant variant) {
    if (config.bounds.empty()) {
        SwarmConfig boxed = config;
        boxed.bounds = objective.bounds;
        return run_swarm(boxed, objective.dimension, as_fitness(objective), variant);
    }
    return run_swarm(config, objective.dimension, as_fitness(objective), variant);
}

} // namespace swarmgrad
