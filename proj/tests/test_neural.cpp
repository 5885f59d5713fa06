#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "swarmgrad/errors.hpp"
#include "swarmgrad/losses.hpp"
#include "swarmgrad/neural.hpp"
#include "swarmgrad/random.hpp"

using namespace swarmgrad;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double lo = -1, double hi = 1) {
    std::uniform_real_distribution<double> u(lo, hi);
    return Matrix::NullaryExpr(r, c, [&] { return u(rng); });
}

Matrix random_one_hot(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::uniform_int_distribution<Eigen::Index> pick(0, c - 1);
    Matrix y = Matrix::Zero(r, c);
    for (Eigen::Index i = 0; i < r; ++i) y(i, pick(rng)) = 1.0;
    return y;
}

/// Summed squared error per sample, averaged over the batch.
double batch_sse(const Network& net, const Matrix& x, const Matrix& y) {
    const Matrix p = forward(net, x).predictions();
    return (p - y).squaredNorm() / static_cast<double>(x.rows());
}

GradientSource swarm_source(LossKind loss, std::uint64_t seed, std::size_t steps = 20) {
    GradientSource s;
    s.mode = GradientMode::swarm;
    s.loss = loss;
    s.swarm.rng_seed = seed;
    s.swarm_steps = steps;
    return s;
}

} // namespace

TEST(Forward, IdentityLayerPassesInputThrough) {
    Layer l{Matrix::Identity(3, 3), Vector::Zero(3), Activation::identity};
    const Network net({l});
    const Matrix x = (Matrix(2, 3) << 1, -2, 3, 0.5, 0, -7).finished();
    EXPECT_EQ(forward(net, x).predictions(), x);
}

TEST(Forward, ZeroSigmoidLayerGivesHalf) {
    const Network net({Layer{Matrix::Zero(2, 4), Vector::Zero(2), Activation::sigmoid}});
    const Matrix out = forward(net, Matrix::Ones(5, 4)).predictions();
    EXPECT_TRUE(out.isApprox(Matrix::Constant(5, 2, 0.5)));
}

TEST(Forward, ShapeOfRandomNetwork) {
    std::mt19937_64 rng(1);
    const Network net = Network::random({4, 2, 3}, {Activation::sigmoid, Activation::sigmoid}, 9);
    const Matrix out = forward(net, random_matrix(10, 4, rng)).predictions();
    EXPECT_EQ(out.rows(), 10);
    EXPECT_EQ(out.cols(), 3);
    EXPECT_THROW(forward(net, random_matrix(10, 5, rng)), ConfigError);
}

TEST(Network, ConstructorRejectsBrokenChain) {
    EXPECT_THROW(Network({Layer{Matrix::Zero(3, 4), Vector::Zero(3), Activation::sigmoid},
                          Layer{Matrix::Zero(2, 5), Vector::Zero(2), Activation::sigmoid}}),
                 ConfigError);
}

TEST(Network, RandomWeightsInUnitBox) {
    const Network net = Network::default_topology(4, 3, 17);
    const Vector p = net.parameters();
    EXPECT_EQ(p.size(), 4 * 10 + 10 + 10 * 3 + 3);
    EXPECT_LE(p.cwiseAbs().maxCoeff(), 0.5);
    EXPECT_EQ(Network::default_topology(4, 3, 17).parameters(), p);
    EXPECT_NE(Network::default_topology(4, 3, 18).parameters(), p);
}

TEST(Network, ParameterAndJsonRoundTrip) {
    Network net = Network::random({3, 5, 2}, {Activation::tanh, Activation::relu}, 4);
    const Vector p = net.parameters();
    net.set_parameters(p * 2.0);
    EXPECT_EQ(net.parameters(), p * 2.0);
    const Network back = Network::from_json(net.to_json());
    EXPECT_EQ(back.parameters(), net.parameters());
    EXPECT_EQ(back.layers()[0].activation, Activation::tanh);
    EXPECT_EQ(back.layers()[1].activation, Activation::relu);
    EXPECT_THROW(net.set_parameters(Vector::Zero(3)), ConfigError);
}

TEST(Backward, HandChainRule) {
    const Network net({Layer{Matrix::Constant(1, 1, 0.3), Vector::Zero(1), Activation::identity}});
    const auto trace = forward(net, Matrix::Constant(1, 1, 2.0));
    const Gradients g = backward(net, trace, Matrix::Constant(1, 1, 1.0));
    EXPECT_EQ(g.layers[0].weights(0, 0), 2.0);
    EXPECT_EQ(g.layers[0].bias[0], 1.0);
}

TEST(Backward, ZeroDeltaGivesZeroGradients) {
    std::mt19937_64 rng(2);
    const Network net = Network::default_topology(4, 3, 5);
    const auto trace = forward(net, random_matrix(6, 4, rng));
    EXPECT_TRUE(backward(net, trace, Matrix::Zero(6, 3)).flatten().isZero(0.0));
    EXPECT_THROW(backward(net, trace, Matrix::Zero(6, 2)), ConfigError);
}

/// Every weight of a 4-10-3 sigmoid network against central differences of
/// a loss computed here, independently of the library's loss code.
TEST(Backward, MatchesFiniteDifferencesOnEveryWeight) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        std::mt19937_64 rng(seed);
        Network net = Network::default_topology(4, 3, seed);
        const Matrix x = random_matrix(7, 4, rng, -2, 2);
        const Matrix y = random_one_hot(7, 3, rng);
        const auto trace = forward(net, x);
        const Vector analytic = backward(net, trace, 2.0 * (trace.predictions() - y)).flatten();

        const Vector p = net.parameters();
        ASSERT_EQ(analytic.size(), p.size());
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double h = 1e-5;
            Vector pp = p, pm = p;
            pp[i] += h;
            pm[i] -= h;
            net.set_parameters(pp);
            const double up = batch_sse(net, x, y);
            net.set_parameters(pm);
            const double down = batch_sse(net, x, y);
            const double fd = (up - down) / (2 * h);
            const double scale = std::max(std::abs(fd), 1e-6);
            EXPECT_LE(std::abs(analytic[i] - fd) / scale, 1e-4) << "seed " << seed << " weight " << i;
        }
        net.set_parameters(p);
    }
}

TEST(SwarmDelta, FixedPointAndScaling) {
    const Matrix pred = (Matrix(2, 2) << 0.8, 0.1, 0.4, 0.6).finished();
    EXPECT_TRUE(swarm_delta(pred, pred, 1.2, 0.1).isZero(0.0));
    const Matrix gbest = (Matrix(2, 2) << 0.5, 0.1, 0.9, 0.6).finished();
    const Matrix d = swarm_delta(pred, gbest, 0.85, 0.1);
    EXPECT_NEAR(d(0, 0), 8.5 * 0.3, 1e-12);
    EXPECT_NEAR(d(1, 0), -8.5 * 0.5, 1e-12);
    EXPECT_EQ(d(0, 1), 0.0);
}

TEST(SwarmDelta, LinearInResidual) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix g = random_matrix(4, 3, rng, 0, 1);
        const Matrix r = random_matrix(4, 3, rng);
        const double k = std::uniform_real_distribution<double>(-3, 3)(rng);
        const Matrix d1 = swarm_delta(g + r, g, 0.7, 0.05);
        const Matrix dk = swarm_delta(g + k * r, g, 0.7, 0.05);
        EXPECT_TRUE(dk.isApprox(k * d1, 1e-9)) << trial;
    }
}

/// Twenty particles often stall above a dozen dimensions, so the converged precondition is
/// met with a larger swarm and checked explicitly.
TEST(SwarmDelta, ConvergedSwarmAgreesInSignWithAnalytic) {
    std::mt19937_64 rng(4);
    std::size_t agree = 0, total = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Matrix y = random_one_hot(4, 3, rng);
        const Matrix p = random_matrix(4, 3, rng, 0.02, 0.98);
        BatchSwarm swarm;
        GradientSource src = swarm_source(LossKind::mse, seed, 500);
        src.swarm.num_particles = 100;
        const Matrix d = output_delta_swarm(p, y, src, swarm);
        ASSERT_LT(swarm.state().gbest_fitness, 1e-6) << "seed " << seed;
        const Matrix a = output_delta_analytic(p, y, LossKind::mse);
        for (Eigen::Index i = 0; i < d.size(); ++i) {
            agree += (d.data()[i] > 0) == (a.data()[i] > 0) && d.data()[i] != 0.0;
            ++total;
        }
    }
    EXPECT_GE(static_cast<double>(agree) / static_cast<double>(total), 0.95);
}

TEST(SwarmDelta, RequiresSwarmModeAndPositiveEta) {
    BatchSwarm swarm;
    GradientSource analytic;
    EXPECT_THROW(output_delta_swarm(Matrix::Zero(2, 2), Matrix::Zero(2, 2), analytic, swarm), ConfigError);
    GradientSource bad = swarm_source(LossKind::mse, 1);
    bad.eta = 0.0;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(BatchSwarm, ParticleDimensionIsBatchTimesClasses) {
    std::mt19937_64 rng(5);
    for (std::size_t hidden : {2u, 50u}) {
        (void)Network::default_topology(4, 3, 1, hidden);
        BatchSwarm swarm;
        swarm.advance(random_one_hot(16, 3, rng), swarm_source(LossKind::mse, 2, 1));
        EXPECT_EQ(swarm.state().dimension(), 48u);
        EXPECT_EQ(swarm.gbest().rows(), 16);
        EXPECT_EQ(swarm.gbest().cols(), 3);
        swarm.advance(random_one_hot(5, 3, rng), swarm_source(LossKind::mse, 2, 1));
        EXPECT_EQ(swarm.state().dimension(), 15u);
    }
}

TEST(BatchSwarm, GbestFitnessMonotoneWithinBatch) {
    std::mt19937_64 rng(6);
    const Matrix y = random_one_hot(6, 3, rng);
    GradientSource src = swarm_source(LossKind::mse, 3, 1);
    BatchSwarm swarm;
    swarm.advance(y, src);
    double last = swarm.state().gbest_fitness;
    src.reinit_per_batch = false;
    for (int k = 0; k < 30; ++k) {
        swarm.advance(y, src);
        EXPECT_LE(swarm.state().gbest_fitness, last);
        last = swarm.state().gbest_fitness;
    }
}

TEST(AnalyticDelta, MaeAtTargetsIsZero) {
    std::mt19937_64 rng(7);
    const Matrix y = random_one_hot(5, 3, rng);
    const Matrix d = output_delta_analytic(y, y, LossKind::mae);
    EXPECT_TRUE(d.isZero(0.0));
    EXPECT_TRUE(d.allFinite());
}

/// With the swarm source on MAE, targets that the network already matches
/// contribute no signal and training does not fail.
TEST(AnalyticDelta, MaeSwarmTrainingAtTargetsIsFinite) {
    std::mt19937_64 rng(8);
    const Network zero({Layer{Matrix::Zero(3, 4), Vector::Zero(3), Activation::sigmoid}});
    Batch b{random_matrix(4, 4, rng), Matrix::Constant(4, 3, 0.5)};
    Network net = zero;
    OptimizerState opt = make_optimizer(OptimizerKind::adaswarm, net.parameter_count());
    BatchSwarm swarm;
    const EpochMetrics m = train_epoch(net, {b}, swarm_source(LossKind::mae, 4), opt, swarm);
    EXPECT_EQ(m.loss_running_avg, 0.0);
    EXPECT_TRUE(net.parameters().allFinite());
}

TEST(TrainEpoch, ZeroDeltaLeavesWeightsUnchanged) {
    std::mt19937_64 rng(9);
    Network net = Network::default_topology(4, 3, 2);
    const Vector before = net.parameters();
    // Targets equal to the current predictions make the MSE delta vanish.
    const Matrix x = random_matrix(6, 4, rng);
    const Batch b{x, forward(net, x).predictions()};
    OptimizerState opt = make_optimizer(OptimizerKind::adam, net.parameter_count());
    BatchSwarm swarm;
    train_epoch(net, {b, b}, GradientSource{}, opt, swarm);
    EXPECT_EQ(net.parameters(), before);
}

TEST(TrainEpoch, MetricsAreRunningAverages) {
    std::mt19937_64 rng(10);
    Network net = Network::default_topology(4, 3, 3);
    std::vector<Batch> batches;
    for (int i = 0; i < 3; ++i) batches.push_back({random_matrix(5, 4, rng), random_one_hot(5, 3, rng)});

    Network replay = net;
    OptimizerState o1 = make_optimizer(OptimizerKind::sgd, net.parameter_count());
    OptimizerState o2 = o1;
    BatchSwarm s1, s2;
    const EpochMetrics m = train_epoch(net, batches, GradientSource{}, o1, s1);

    double loss_sum = 0, acc_sum = 0;
    for (const Batch& b : batches) {
        const Matrix p = forward(replay, b.features).predictions();
        loss_sum += loss_forward(LossKind::mse, p, b.targets);
        acc_sum += accuracy(p, b.targets);
        train_epoch(replay, {b}, GradientSource{}, o2, s2);
    }
    EXPECT_EQ(m.batches, 3u);
    EXPECT_NEAR(m.loss_running_avg, loss_sum / 3, 1e-12);
    EXPECT_NEAR(m.accuracy_running_avg, acc_sum / 3, 1e-12);
    EXPECT_EQ(net.parameters(), replay.parameters());
}

TEST(TrainEpoch, NonFiniteLossNamesBatch) {
    Network net = Network::default_topology(2, 2, 1);
    Batch good{Matrix::Zero(2, 2), Matrix::Identity(2, 2)};
    Batch bad = good;
    bad.targets(0, 0) = std::nan("");
    OptimizerState opt = make_optimizer(OptimizerKind::sgd, net.parameter_count());
    BatchSwarm swarm;
    try {
        train_epoch(net, {good, bad}, GradientSource{}, opt, swarm);
        FAIL() << "expected RunError";
    } catch (const RunError& e) {
        EXPECT_NE(std::string(e.what()).find("batch 1"), std::string::npos) << e.what();
    }
}

TEST(Accuracy, ArgmaxMatch) {
    const Matrix p = (Matrix(3, 3) << 0.7, 0.2, 0.1, 0.1, 0.3, 0.6, 0.4, 0.5, 0.1).finished();
    const Matrix y = (Matrix(3, 3) << 1, 0, 0, 0, 1, 0, 0, 1, 0).finished();
    EXPECT_NEAR(accuracy(p, y), 2.0 / 3.0, 1e-15);
}

/// 50 AdaSwarm steps on one fixed batch, swarm-supplied deltas only.
TEST(Property, SwarmDeltasHalveLossOnFixedBatch) {
    std::vector<double> ratios;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        Network net = Network::default_topology(4, 3, derive_seed(seed, 1));
        const Batch b{random_matrix(8, 4, rng, -2, 2), random_one_hot(8, 3, rng)};
        const double initial = loss_forward(LossKind::mse, forward(net, b.features).predictions(), b.targets);
        OptimizerState opt = make_optimizer(OptimizerKind::adaswarm, net.parameter_count());
        BatchSwarm swarm;
        const GradientSource src = swarm_source(LossKind::mse, derive_seed(seed, 2));
        for (int k = 0; k < 50; ++k) train_epoch(net, {b}, src, opt, swarm);
        const double final = loss_forward(LossKind::mse, forward(net, b.features).predictions(), b.targets);
        ratios.push_back(final / initial);
    }
    std::sort(ratios.begin(), ratios.end());
    EXPECT_LE((ratios[9] + ratios[10]) / 2, 0.5);
}
