#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "swarmgrad/errors.hpp"
#include "swarmgrad/swarm.hpp"

using namespace swarmgrad;

namespace {

SwarmConfig config_1d(double low, double high, std::uint64_t seed = 1) {
    SwarmConfig c;
    c.bounds = {Bound{low, high}};
    c.rng_seed = seed;
    return c;
}

const Fitness sphere = [](const Vector& x) { return x.squaredNorm(); };

/// Places a single particle at x = pbest = gbest with the given velocity.
SwarmState single_particle(double x, double v, double m = 0.0) {
    SwarmState s;
    Particle p;
    p.position = Vector::Constant(1, x);
    p.velocity = Vector::Constant(1, v);
    p.momentum = Vector::Constant(1, m);
    p.prev_velocity = Vector::Zero(1);
    p.pbest_position = p.position;
    p.pbest_fitness = sphere(p.position);
    s.particles = {p};
    s.gbest_position = p.position;
    s.gbest_fitness = p.pbest_fitness;
    s.gbest_velocity = Vector::Zero(1);
    s.rng.seed(99);
    return s;
}

} // namespace

TEST(InitSwarm, PositionsInsideBoundsAndVelocitiesZero) {
    SwarmConfig c = config_1d(-5, 5);
    c.num_particles = 10;
    const SwarmState s = init_swarm(c, 1, sphere);
    ASSERT_EQ(s.particles.size(), 10u);
    for (const auto& p : s.particles) {
        EXPECT_GE(p.position[0], -5.0);
        EXPECT_LE(p.position[0], 5.0);
        EXPECT_EQ(p.velocity[0], 0.0);
        EXPECT_EQ(p.momentum[0], 0.0);
        EXPECT_EQ(p.pbest_position, p.position);
    }
}

TEST(InitSwarm, SameSeedIsBitIdentical) {
    const SwarmConfig c = config_1d(-5, 5, 42);
    EXPECT_EQ(init_swarm(c, 1, sphere), init_swarm(c, 1, sphere));
    const SwarmConfig d = config_1d(-5, 5, 43);
    EXPECT_FALSE(init_swarm(c, 1, sphere) == init_swarm(d, 1, sphere));
}

TEST(InitSwarm, ConstantObjective) {
    const SwarmState s = init_swarm(config_1d(-1, 1), 1, [](const Vector&) { return 7.0; });
    EXPECT_EQ(s.gbest_fitness, 7.0);
}

TEST(InitSwarm, GbestIsBestInitialParticleLowestIndexOnTies) {
    const SwarmState s = init_swarm(config_1d(-3, 3), 1, sphere);
    double best = s.particles[0].pbest_fitness;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < s.particles.size(); ++i) {
        if (s.particles[i].pbest_fitness < best) {
            best = s.particles[i].pbest_fitness;
            idx = i;
        }
    }
    EXPECT_EQ(s.gbest_fitness, best);
    EXPECT_EQ(s.gbest_position, s.particles[idx].position);

    const SwarmState flat = init_swarm(config_1d(-3, 3), 1, [](const Vector&) { return 1.0; });
    EXPECT_EQ(flat.gbest_position, flat.particles[0].position);
}

TEST(InitSwarm, BoundsDimensionMismatch) {
    EXPECT_THROW(init_swarm(config_1d(-1, 1), 2, sphere), ConfigError);
}

TEST(SwarmConfig, RejectsInvalidValues) {
    SwarmConfig c = config_1d(-1, 1);
    c.beta = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = config_1d(-1, 1);
    c.lambda = 1.5;
    EXPECT_THROW(c.validate(), ConfigError);
    c = config_1d(1, -1);
    EXPECT_THROW(c.validate(), ConfigError);
    c = config_1d(-1, 1);
    c.num_particles = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = config_1d(-1, 1);
    c.c1 = -0.1;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Step, NonFiniteFitnessNamesParticle) {
    SwarmConfig c = config_1d(-1, 1);
    SwarmState s = init_swarm(c, 1, sphere);
    try {
        step_empso(s, c, [](const Vector&) { return std::nan(""); });
        FAIL() << "expected RunError";
    } catch (const RunError& e) {
        EXPECT_NE(std::string(e.what()).find("particle 0"), std::string::npos);
    }
}

TEST(StepVanilla, ZeroCoefficientsFreezeEverything) {
    SwarmConfig c = config_1d(-5, 5);
    c.inertia = 0.0;
    c.c1 = c.c2 = 0.0;
    SwarmState s = init_swarm(c, 1, sphere);
    for (auto& p : s.particles) p.velocity[0] = 0.3;
    const SwarmState before = s;
    step_vanilla(s, c, sphere);
    for (std::size_t i = 0; i < s.particles.size(); ++i) {
        EXPECT_EQ(s.particles[i].velocity[0], 0.0);
        EXPECT_EQ(s.particles[i].position, before.particles[i].position);
    }
}

TEST(StepVanilla, AttractionVanishesAtBests) {
    SwarmConfig c = config_1d(-5, 5);
    c.inertia = 0.5;
    SwarmState s = single_particle(1.0, 0.4);
    step_vanilla(s, c, sphere);
    EXPECT_EQ(s.particles[0].velocity[0], 0.5 * 0.4);
}

TEST(StepVanilla, SphereConvergesOverSeeds) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SwarmConfig c = config_1d(-5, 5, seed);
        c.num_particles = 10;
        c.inertia = 0.5;
        SwarmState s = init_swarm(c, 1, sphere);
        for (int t = 0; t < 100; ++t) step_vanilla(s, c, sphere);
        EXPECT_LE(std::abs(s.gbest_position[0]), 1e-2) << "seed " << seed;
    }
}

TEST(StepMpso, LambdaOneFreezesVelocityToPrevious) {
    SwarmConfig c = config_1d(-50, 50);
    c.lambda = 1.0;
    SwarmState s = init_swarm(c, 1, sphere);
    for (auto& p : s.particles) {
        p.velocity[0] = 0.25;
        p.prev_velocity[0] = 0.25;
    }
    for (int t = 0; t < 5; ++t) {
        step_mpso(s, c, sphere);
        for (const auto& p : s.particles) EXPECT_EQ(p.velocity[0], 0.25);
    }
}

TEST(StepMpso, LambdaZeroMatchesVanillaWithUnitInertia) {
    SwarmConfig c = config_1d(-5, 5, 8);
    c.lambda = 0.0;
    c.inertia = 1.0;
    SwarmState a = init_swarm(c, 1, sphere);
    SwarmState b = a;
    for (int t = 0; t < 20; ++t) {
        step_mpso(a, c, sphere);
        step_vanilla(b, c, sphere);
        for (std::size_t i = 0; i < a.particles.size(); ++i) {
            EXPECT_EQ(a.particles[i].position, b.particles[i].position);
            EXPECT_EQ(a.particles[i].velocity, b.particles[i].velocity);
        }
    }
}

TEST(StepMpso, SphereConvergesOverSeeds) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SwarmConfig c = config_1d(-5, 5, seed);
        c.lambda = 0.1;
        SwarmState s = init_swarm(c, 1, sphere);
        for (int t = 0; t < 200; ++t) step_mpso(s, c, sphere);
        EXPECT_LE(std::abs(s.gbest_position[0]), 1e-2) << "seed " << seed;
    }
}

TEST(StepEmpso, ZeroBetaZeroCoefficientsPassVelocityThrough) {
    SwarmConfig c = config_1d(-100, 100);
    c.beta = 0.0;
    c.c1 = c.c2 = 0.0;
    SwarmState s = init_swarm(c, 1, sphere);
    for (auto& p : s.particles) p.velocity[0] = -0.7;
    step_empso(s, c, sphere);
    for (const auto& p : s.particles) EXPECT_EQ(p.velocity[0], -0.7);
}

TEST(StepEmpso, FixedPointStaysPut) {
    const SwarmConfig c = config_1d(-5, 5);
    SwarmState s = single_particle(0.75, 0.0);
    for (int t = 0; t < 50; ++t) step_empso(s, c, sphere);
    EXPECT_EQ(s.particles[0].position[0], 0.75);
    EXPECT_EQ(s.particles[0].velocity[0], 0.0);
}

TEST(StepEmpso, SphereWithDefaultConstantsConverges) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const SwarmConfig c = config_1d(-5, 5, seed);
        SwarmState s = init_swarm(c, 1, sphere);
        for (int t = 0; t < 100; ++t) step_empso(s, c, sphere);
        EXPECT_LE(std::abs(s.gbest_position[0]), 1e-2) << "seed " << seed;
    }
}

/// Independent re-statement of one EMPSO step: draw r1 then r2 per particle,
/// velocity from the old momentum, move, clamp, momentum from the new
/// velocity, then synchronous best updates.
TEST(StepEmpso, MatchesHandWrittenReference) {
    SwarmConfig c;
    c.bounds = {Bound{-2, 2}, Bound{-1, 3}};
    c.num_particles = 6;
    c.rng_seed = 2024;
    const Fitness f = [](const Vector& x) { return (x[0] - 0.5) * (x[0] - 0.5) + std::abs(x[1] - 1.0); };
    SwarmState s = init_swarm(c, 2, f);
    for (int t = 0; t < 3; ++t) step_empso(s, c, f);

    SwarmState ref = s;
    Rng rng = s.rng;
    double coeff = 0.0;
    for (auto& p : ref.particles) {
        const double r1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double r2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        coeff += c.c1 * r1 + c.c2 * r2;
        for (int d = 0; d < 2; ++d) {
            const double v = c.beta * p.momentum[d] + (1 - c.beta) * p.velocity[d] +
                             c.c1 * r1 * (p.pbest_position[d] - p.position[d]) +
                             c.c2 * r2 * (s.gbest_position[d] - p.position[d]);
            p.velocity[d] = v;
            p.position[d] = std::clamp(p.position[d] + v, c.bounds[d].low, c.bounds[d].high);
            p.momentum[d] = c.beta * p.momentum[d] + (1 - c.beta) * v;
        }
    }
    step_empso(s, c, f);
    for (std::size_t i = 0; i < s.particles.size(); ++i) {
        EXPECT_NEAR((s.particles[i].velocity - ref.particles[i].velocity).norm(), 0.0, 1e-15);
        EXPECT_NEAR((s.particles[i].position - ref.particles[i].position).norm(), 0.0, 1e-15);
        EXPECT_NEAR((s.particles[i].momentum - ref.particles[i].momentum).norm(), 0.0, 1e-15);
    }
    EXPECT_NEAR(s.coeff_sum_avg, coeff / 6.0, 1e-15);
}

TEST(StepEmpso, ClampLeavesVelocityUnchanged) {
    SwarmConfig c = config_1d(-1, 1);
    c.c1 = c.c2 = 0.0;
    c.beta = 0.0;
    SwarmState s = single_particle(0.9, 0.5);
    step_empso(s, c, sphere);
    EXPECT_EQ(s.particles[0].position[0], 1.0);
    EXPECT_EQ(s.particles[0].velocity[0], 0.5);
}

TEST(SwarmProperties, GbestAndPbestMonotoneForEveryVariant) {
    const Fitness rastrigin = [](const Vector& x) {
        double sum = 10.0 * static_cast<double>(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) sum += x[i] * x[i] - 10.0 * std::cos(2 * M_PI * x[i]);
        return sum;
    };
    for (SwarmVariant v : {SwarmVariant::vanilla, SwarmVariant::mpso, SwarmVariant::empso}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            SwarmConfig c;
            c.bounds = {Bound{-5, 5}, Bound{-5, 5}, Bound{-5, 5}};
            c.rng_seed = seed;
            SwarmState s = init_swarm(c, 3, rastrigin);
            for (int t = 0; t < 100; ++t) {
                const SwarmState before = s;
                step(v, s, c, rastrigin);
                EXPECT_LE(s.gbest_fitness, before.gbest_fitness);
                double min_pbest = s.particles[0].pbest_fitness;
                for (std::size_t i = 0; i < s.particles.size(); ++i) {
                    EXPECT_LE(s.particles[i].pbest_fitness, before.particles[i].pbest_fitness);
                    EXPECT_EQ(s.particles[i].pbest_fitness, rastrigin(s.particles[i].pbest_position));
                    min_pbest = std::min(min_pbest, s.particles[i].pbest_fitness);
                }
                EXPECT_EQ(s.gbest_fitness, min_pbest);
                EXPECT_GE(s.coeff_sum_avg, 0.0);
                EXPECT_LE(s.coeff_sum_avg, c.c1 + c.c2);
                EXPECT_GE(s.c1r1_avg, 0.0);
                EXPECT_LT(s.c1r1_avg, c.c1);
                EXPECT_LT(s.c2r2_avg, c.c2);
            }
        }
    }
}

TEST(SwarmProperties, PbestIsMinimumEverEvaluated) {
    SwarmConfig c = config_1d(-4, 4, 5);
    c.num_particles = 4;
    std::vector<double> seen_min(4, INFINITY);
    std::size_t call = 0;
    const Fitness tracked = [&](const Vector& x) {
        const double f = std::sin(3 * x[0]) + 0.1 * x[0] * x[0];
        seen_min[call % 4] = std::min(seen_min[call % 4], f);
        ++call;
        return f;
    };
    SwarmState s = init_swarm(c, 1, tracked);
    for (int t = 0; t < 40; ++t) step_empso(s, c, tracked);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(s.particles[i].pbest_fitness, seen_min[i]);
}

TEST(SwarmProperties, MomentumExpansionIdentity) {
    SwarmConfig c;
    c.bounds = {Bound{-3, 3}, Bound{-3, 3}};
    c.rng_seed = 17;
    c.num_particles = 8;
    SwarmState s = init_swarm(c, 2, sphere);
    // Start from a non-zero momentum so the beta^t M(0) term is exercised.
    for (auto& p : s.particles) p.momentum = Vector::Constant(2, 0.3);
    std::vector<Vector> m0;
    for (const auto& p : s.particles) m0.push_back(p.momentum);
    std::vector<std::vector<Vector>> velocities(s.particles.size());
    const int steps = 40;
    for (int t = 0; t < steps; ++t) {
        step_empso(s, c, sphere);
        for (std::size_t i = 0; i < s.particles.size(); ++i) velocities[i].push_back(s.particles[i].velocity);
    }
    const double b = c.beta;
    for (std::size_t i = 0; i < s.particles.size(); ++i) {
        Vector expected = std::pow(b, steps) * m0[i];
        for (int k = 1; k <= steps; ++k) expected += std::pow(b, steps - k) * (1 - b) * velocities[i][k - 1];
        EXPECT_LE((s.particles[i].momentum - expected).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(SwarmProperties, GbestVelocityIsSetterVelocity) {
    SwarmConfig c = config_1d(-5, 5, 3);
    SwarmState s = init_swarm(c, 1, sphere);
    for (int t = 0; t < 30; ++t) {
        const double before = s.gbest_fitness;
        step_empso(s, c, sphere);
        if (s.gbest_fitness < before) {
            bool found = false;
            for (const auto& p : s.particles) {
                if (p.pbest_position == s.gbest_position && p.velocity == s.gbest_velocity) found = true;
            }
            EXPECT_TRUE(found);
        }
    }
}

TEST(RunSwarm, EmpsoOnX5X10) {
    SwarmConfig c;
    c.rng_seed = 4;
    const auto r = run_swarm(c, find_objective("x5x10"), SwarmVariant::empso);
    EXPECT_NEAR(r.gbest_fitness, -2.25, 0.01);
}

TEST(RunSwarm, EmpsoOnPoly3) {
    SwarmConfig c;
    c.rng_seed = 4;
    const auto r = run_swarm(c, find_objective("poly3"), SwarmVariant::empso);
    EXPECT_NEAR(r.gbest_fitness, 3.0, 0.01);
}

TEST(RunSwarm, ConstantObjectiveStopsAtWindow) {
    const SwarmConfig c = config_1d(-1, 1);
    const auto r = run_swarm(c, 1, [](const Vector&) { return 2.0; }, SwarmVariant::empso);
    EXPECT_EQ(r.iterations_used, kStagnationWindow);
    EXPECT_EQ(r.gbest_fitness, 2.0);
    EXPECT_EQ(r.coeff_history.size(), kStagnationWindow);
}

TEST(RunSwarm, RespectsMaxIterations) {
    SwarmConfig c = config_1d(-1, 1);
    c.max_iterations = 3;
    c.fitness_tolerance = 0.0;
    const auto r = run_swarm(c, 1, sphere, SwarmVariant::vanilla);
    EXPECT_EQ(r.iterations_used, 3u);
}

TEST(RunSwarm, DeterministicPerSeed) {
    SwarmConfig c = config_1d(-5, 5, 77);
    const auto a = run_swarm(c, find_objective("negexpcos"), SwarmVariant::empso);
    const auto b = run_swarm(c, find_objective("negexpcos"), SwarmVariant::empso);
    EXPECT_EQ(a.final_state, b.final_state);
    EXPECT_EQ(a.coeff_history, b.coeff_history);
}

TEST(RunSwarm, EvaluationCountIsLinearInParticlesAndIterations) {
    for (std::size_t n : {5u, 10u, 40u}) {
        for (std::size_t iters : {10u, 50u}) {
            SwarmConfig c = config_1d(-5, 5);
            c.num_particles = n;
            c.max_iterations = iters;
            c.fitness_tolerance = -1.0;
            std::size_t calls = 0;
            run_swarm(c, 1, [&](const Vector& x) { ++calls; return x.squaredNorm(); }, SwarmVariant::empso);
            EXPECT_EQ(calls, n * (iters + 1));
        }
    }
}

TEST(ResetBests, RescoresAgainstNewFitness) {
    SwarmConfig c = config_1d(-5, 5);
    SwarmState s = init_swarm(c, 1, sphere);
    for (int t = 0; t < 10; ++t) step_empso(s, c, sphere);
    const Fitness shifted = [](const Vector& x) { return (x[0] - 3) * (x[0] - 3); };
    const SwarmState before = s;
    reset_bests(s, shifted);
    for (std::size_t i = 0; i < s.particles.size(); ++i) {
        EXPECT_EQ(s.particles[i].position, before.particles[i].position);
        EXPECT_EQ(s.particles[i].velocity, before.particles[i].velocity);
        EXPECT_EQ(s.particles[i].pbest_position, s.particles[i].position);
        EXPECT_EQ(s.particles[i].pbest_fitness, shifted(s.particles[i].position));
    }
    double best = INFINITY;
    for (const auto& p : s.particles) best = std::min(best, p.pbest_fitness);
    EXPECT_EQ(s.gbest_fitness, best);
}

TEST(Variant, ParseRoundTrip) {
    for (SwarmVariant v : {SwarmVariant::vanilla, SwarmVariant::mpso, SwarmVariant::empso}) {
        EXPECT_EQ(parse_variant(to_string(v)), v);
    }
    EXPECT_THROW(parse_variant("rempso"), ValidationError);
}
