#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace geoforge;

namespace {

Field random_field(int c, Index3 d, std::uint64_t seed) {
    Rng rng(seed);
    return standard_normal_field(c, d, rng);
}

std::vector<double> flat(const Field& f) { return {f.data().begin(), f.data().end()}; }

GeoModel random_model(const GridSpec& g, int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Label> l(g.voxel_count());
    for (auto& x : l) x = static_cast<Label>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    return GeoModel(g, n, l);
}

// dy/dt = -2 t y has y(t) = y0 exp(-t^2): nonlinear in t, so each scheme
// shows its true order.
const FunctionVelocity gaussian_decay([](const Field& y, double t) {
    Field out = y;
    for (double& x : out.data()) x *= -2.0 * t;
    return out;
});

}  // namespace

TEST(Objective, InterpolantAndTarget) {
    const Field m = random_field(3, {2, 2, 2}, 1), z = random_field(3, {2, 2, 2}, 2);
    const Field y = interpolant(m, z, 0.3), u = fm_target(m, z);
    for (std::size_t k = 0; k < y.data().size(); ++k) {
        EXPECT_NEAR(y.data()[k], 0.3 * m.data()[k] + 0.7 * z.data()[k], 1e-15);
        EXPECT_NEAR(u.data()[k], m.data()[k] - z.data()[k], 1e-15);
    }
    EXPECT_THROW(interpolant(m, Field(2, {2, 2, 2}), 0.5), std::invalid_argument);
}

TEST(Objective, LossOfExactTargetIsZero) {
    const Field m = random_field(3, {3, 3, 3}, 3);
    // v(y, t) = (m - y)/(1 - t) equals m - z on the interpolant path.
    const FunctionVelocity v([&](const Field& y, double t) {
        Field out = y;
        for (std::size_t k = 0; k < out.data().size(); ++k) out.data()[k] = (m.data()[k] - y.data()[k]) / (1.0 - t);
        return out;
    });
    std::vector<FmSample> batch;
    for (int i = 0; i < 4; ++i) batch.push_back({m, random_field(3, {3, 3, 3}, 10 + i), 0.2 * i});
    EXPECT_LE(fm_loss(v, batch), 1e-20);
}

TEST(Objective, LossIsHalfMeanSquaredError) {
    const FunctionVelocity zero([](const Field& y, double) { return Field(y.channels(), y.dims()); });
    const Field m(2, {1, 1, 2}, 1.0), z(2, {1, 1, 2}, 0.0);
    const Field m2(2, {1, 1, 2}, 3.0);
    std::vector<FmSample> batch{{m, z, 0.5}, {m2, z, 0.1}};
    // Per-sample MSEs 1 and 9; loss = 0.5 * mean = 2.5.
    EXPECT_NEAR(fm_loss(zero, batch), 2.5, 1e-15);
}

TEST(Objective, ReferenceModelGradientCheck) {
    ReferenceVelocityModel model({3, 4, {6, 6}}, 7);
    std::vector<double> p(model.parameters().begin(), model.parameters().end());
    Rng rng(8);
    for (double& x : p) x += 0.05 * rng.normal();
    model.set_parameters(p);
    const GridSpec g({4, 4, 4}, 1.0, {});
    const EmbeddingTable t(3);
    std::vector<FmSample> batch;
    for (int i = 0; i < 3; ++i)
        batch.push_back({embed_model(random_model(g, 3, 20 + i), t), random_field(3, g.dims, 30 + i), 0.15 + 0.3 * i});
    EXPECT_LE(gradient_check(model, batch), 1e-3);
}

TEST(Objective, GradientIsFiniteDifferenceOfLoss) {
    ReferenceVelocityModel model({2, 4, {3}}, 2);
    const GridSpec g({3, 3, 2}, 1.0, {});
    const EmbeddingTable t(2);
    std::vector<FmSample> batch{{embed_model(random_model(g, 2, 1), t), random_field(2, g.dims, 2), 0.6}};
    std::vector<double> grad(model.parameter_count());
    fm_loss_and_gradient(model, batch, grad);
    const std::vector<double> p(model.parameters().begin(), model.parameters().end());
    for (std::size_t k = 0; k < p.size(); k += 11) {
        auto up = p, dn = p;
        up[k] += 1e-6;
        dn[k] -= 1e-6;
        model.set_parameters(up);
        const double lu = fm_loss(model, batch);
        model.set_parameters(dn);
        const double ld = fm_loss(model, batch);
        EXPECT_NEAR(grad[k], (lu - ld) / 2e-6, 1e-6 * std::max(1.0, std::abs(grad[k])));
    }
}

TEST(OracleVelocity, MatchesMixtureOracle) {
    std::vector<Field> data{random_field(3, {2, 2, 2}, 1), random_field(3, {2, 2, 2}, 2), random_field(3, {2, 2, 2}, 3)};
    std::vector<std::vector<double>> flat_data;
    for (const auto& f : data) flat_data.push_back(flat(f));
    for (double t : {0.0, 0.3, 0.7, 0.95}) {
        const Field y = random_field(3, {2, 2, 2}, 100 + static_cast<std::uint64_t>(t * 100));
        const Field v = oracle_velocity(data, y, t);
        const auto o = oracle::mixture_velocity(flat_data, flat(y), t);
        for (std::size_t k = 0; k < o.size(); ++k) EXPECT_NEAR(v.data()[k], o[k], 1e-10 * std::max(1.0, std::abs(o[k])));
    }
}

TEST(OracleVelocity, SingleSampleReachesTheSample) {
    const Field m = random_field(4, {2, 2, 2}, 5);
    const std::vector<Field> data{m};
    const FunctionVelocity v([&](const Field& y, double t) { return oracle_velocity(data, y, t); });
    const Field y = integrate(v, random_field(4, {2, 2, 2}, 6), {SolverMethod::Rk4, 50, 0.99});
    // Exact path: y(0.99) = 0.99 m + 0.01 y0, so the distance to m is 0.01 |m - y0|.
    const Field y0 = random_field(4, {2, 2, 2}, 6);
    for (std::size_t k = 0; k < m.data().size(); ++k)
        EXPECT_NEAR(y.data()[k], 0.99 * m.data()[k] + 0.01 * y0.data()[k], 1e-6);
}

TEST(Solvers, ConvergenceOrders) {
    const Field y0(1, {1, 1, 1}, 1.0);
    const double exact = std::exp(-1.0);
    const std::pair<SolverMethod, double> cases[] = {{SolverMethod::Euler, 1.0}, {SolverMethod::Heun, 2.0}, {SolverMethod::Rk4, 4.0}};
    for (const auto& [method, order] : cases) {
        const double e1 = std::abs(integrate(gaussian_decay, y0, {method, 20, 1.0}).data()[0] - exact);
        const double e2 = std::abs(integrate(gaussian_decay, y0, {method, 40, 1.0}).data()[0] - exact);
        EXPECT_NEAR(std::log2(e1 / e2), order, 0.15) << static_cast<int>(method);
    }
}

TEST(Solvers, ObserverSeesEveryStep) {
    std::vector<double> times;
    integrate(gaussian_decay, Field(1, {1, 1, 1}, 1.0), {SolverMethod::Heun, 8, 0.8},
              [&](int step, double t, const Field&) {
                  EXPECT_EQ(step, static_cast<int>(times.size()) + 1);
                  times.push_back(t);
              });
    ASSERT_EQ(times.size(), 8u);
    EXPECT_NEAR(times.back(), 0.8, 1e-15);
}

TEST(Solvers, ConfigValidation) {
    EXPECT_THROW(integrate(gaussian_decay, Field(1, {1, 1, 1}), {SolverMethod::Rk4, 0, 1.0}), std::invalid_argument);
    EXPECT_THROW(integrate(gaussian_decay, Field(1, {1, 1, 1}), {SolverMethod::Rk4, 10, 1.5}), std::invalid_argument);
}

TEST(Guidance, ZeroVelocityRelaxesToData) {
    // With v = 0, dy/dt = -mu (y - d) on observed voxels: y(1) = d + (y0 - d) e^{-mu}.
    const FunctionVelocity zero([](const Field& y, double) { return Field(y.channels(), y.dims()); });
    const Field y0 = random_field(2, {3, 1, 1}, 1);
    Guidance gd{{1, 0, 1}, random_field(2, {3, 1, 1}, 2)};
    const Field y = integrate_guided(zero, y0, gd, 5.0, {SolverMethod::Rk4, 200, 1.0});
    for (int c = 0; c < 2; ++c) {
        for (std::size_t v : {0u, 2u})
            EXPECT_NEAR(y(c, v), gd.data(c, v) + (y0(c, v) - gd.data(c, v)) * std::exp(-5.0), 1e-8);
        EXPECT_EQ(y(c, 1), y0(c, 1));
    }
}

TEST(Guidance, MuZeroIsBitIdenticalToUnguided) {
    ReferenceVelocityModel model({3, 4, {4}}, 9);
    const Field y0 = random_field(3, {3, 3, 3}, 3);
    Guidance gd{std::vector<std::uint8_t>(27, 1), random_field(3, {3, 3, 3}, 4)};
    const SolverConfig cfg{SolverMethod::Heun, 12, 1.0};
    const Field a = integrate(model, y0, cfg), b = integrate_guided(model, y0, gd, 0.0, cfg);
    EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
    EXPECT_THROW(integrate_guided(model, y0, gd, -1.0, cfg), std::invalid_argument);
    Guidance bad{std::vector<std::uint8_t>(5, 1), gd.data};
    EXPECT_THROW(integrate_guided(model, y0, bad, 1.0, cfg), std::invalid_argument);
}

TEST(Training, ReproducibleAndDecreasing) {
    const GridSpec g({4, 4, 4}, 480.0 / 2, {});
    const HistoryStream stream(TransitionMatrix::uniform(), ParamPriors::for_grid(g, 3), g, 3, 42);
    TrainConfig cfg;
    cfg.steps = 60;
    cfg.batch_size = 4;
    cfg.learning_rate = 1e-2;
    cfg.dims = g.dims;
    cfg.num_categories = 3;
    cfg.seed = 5;
    const EmbeddingTable t(3);
    auto run = [&] {
        ReferenceVelocityModel m({3, 4, {6, 6}}, 1);
        StreamSource src(stream);
        return train(m, src, t, cfg);
    };
    const TrainResult a = run(), b = run();
    EXPECT_EQ(a.parameters, b.parameters);
    EXPECT_EQ(a.loss_trace, b.loss_trace);
    ASSERT_EQ(a.loss_trace.size(), 60u);
    const double head = std::accumulate(a.loss_trace.begin(), a.loss_trace.begin() + 15, 0.0);
    const double tail = std::accumulate(a.loss_trace.end() - 15, a.loss_trace.end(), 0.0);
    EXPECT_LT(tail, head);
}

TEST(Training, RejectsNonFiniteLossAndMismatch) {
    const GridSpec g({2, 2, 2}, 1.0, {});
    FixedSource src({random_model(g, 3, 1)});
    const EmbeddingTable t(3);
    TrainConfig cfg;
    cfg.steps = 3;
    cfg.dims = g.dims;
    cfg.num_categories = 3;
    ReferenceVelocityModel m({3, 4, {2}}, 1);
    std::vector<double> p(m.parameters().begin(), m.parameters().end());
    p[0] = NAN;
    m.set_parameters(p);
    EXPECT_THROW(train(m, src, t, cfg), std::runtime_error);
    cfg.num_categories = 4;
    EXPECT_THROW(train(m, src, EmbeddingTable(4), cfg), std::invalid_argument);
    cfg.learning_rate = 0.0;
    EXPECT_THROW(train(m, src, EmbeddingTable(4), cfg), std::invalid_argument);
}

TEST(Training, CosineSimilarity) {
    const Field a(1, {2, 1, 1}, 1.0);
    Field b = a;
    EXPECT_NEAR(cosine_similarity(a, b), 1.0, 1e-15);
    b.data()[1] = -1.0;
    EXPECT_NEAR(cosine_similarity(a, b), 0.0, 1e-15);
}
