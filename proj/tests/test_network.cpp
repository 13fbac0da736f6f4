#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sirkit/network.hpp"

using namespace sirkit;
using namespace sirkit::network;

namespace
{
double max_rise(std::vector<double> const& v)
{
    double rise = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i)
        rise = std::max(rise, v[i] - v[i - 1]);
    return rise;
}

NetworkState seeded(std::size_t n, double eps)
{
    NetworkState s{std::vector<double>(n, 1.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    s.x[0] = 1.0 - eps;
    s.y[0] = eps;
    return s;
}
}  // namespace

TEST(Graph, Validation)
{
    Matrix bad(2, 2);
    bad << 1, -1, 1, 1;
    EXPECT_THROW(ContactGraph{bad}, std::invalid_argument);
    Matrix zero_diag(2, 2);
    zero_diag << 0, 1, 1, 1;
    EXPECT_THROW(ContactGraph{zero_diag}, std::invalid_argument);
    EXPECT_THROW(ContactGraph{Matrix(2, 3)}, std::invalid_argument);
}

TEST(Graph, Connectivity)
{
    EXPECT_TRUE(ContactGraph::complete(3).strongly_connected());
    std::vector<ContactGraph::Edge> const chain{{0, 0, 1}, {1, 1, 1}, {2, 2, 1}, {0, 1, 0.5}, {1, 2, 0.5}};
    EXPECT_FALSE(ContactGraph::from_edges(3, chain).strongly_connected());
    auto ring = chain;
    ring.push_back({2, 0, 0.5});
    EXPECT_TRUE(ContactGraph::from_edges(3, ring).strongly_connected());
}

TEST(NetworkRhs, LemmaInitialDerivatives)
{
    auto const setup = lemma_setup(0.01);
    auto const d = network_rhs(setup.initial, setup.model);
    EXPECT_NEAR(d.dy[0], -0.0001, 1e-15);
    EXPECT_NEAR(d.dy[1], 0.01, 1e-15);
    EXPECT_NEAR(d.dy[0] + d.dy[1], 0.99 * 0.01, 1e-15);
}

TEST(NetworkRhs, DiseaseFree)
{
    NetworkState const s{{0.5, 0.7}, {0.0, 0.0}, {0.5, 0.3}};
    auto const d = network_rhs(s, {ContactGraph::complete(2), 1.0, 1.0});
    for (double v : d.dx)
        EXPECT_EQ(v, 0.0);
    for (double v : d.dy)
        EXPECT_EQ(v, 0.0);
}

TEST(NetworkRhs, SingleNodeIsScalar)
{
    NetworkState const s{{0.99}, {0.01}, {0.0}};
    auto const d = network_rhs(s, {ContactGraph::complete(1), 2.0, 0.4});
    auto const e = sir::scalar_rhs({0.99, 0.01, 0.0}, {sir::RateFunction::constant(2.0), 0.4});
    EXPECT_EQ(d.dx[0], e.dx);
    EXPECT_EQ(d.dy[0], e.dy);
    EXPECT_EQ(d.dz[0], e.dz);
}

TEST(Spectral, ClosedForms)
{
    Matrix const ones = Matrix::Ones(2, 2);
    auto const r = spectral_radius(std::vector<double>{1.0, 1.0}, ones);
    EXPECT_NEAR(r.lambda_max, 2.0, 1e-12);
    EXPECT_NEAR(r.v[0], 0.5, 1e-12);
    EXPECT_NEAR(r.v[1], 0.5, 1e-12);
    EXPECT_NEAR(spectral_radius(std::vector<double>{0.5, 1.0}, ones).lambda_max, 1.5, 1e-12);
    EXPECT_EQ(spectral_radius(std::vector<double>{0.0, 0.0}, ones).lambda_max, 0.0);
}

TEST(Spectral, Random2x2AgainstQuadratic)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial)
    {
        Matrix a(2, 2);
        a << 0.01 + u(rng), u(rng), u(rng), 0.01 + u(rng);
        std::vector<double> const x{u(rng), u(rng)};
        double const p = x[0] * a(0, 0), q = x[0] * a(0, 1), r = x[1] * a(1, 0), s = x[1] * a(1, 1);
        double const exact = 0.5 * (p + s + std::sqrt((p - s) * (p - s) + 4 * q * r));
        EXPECT_NEAR(spectral_radius(x, a).lambda_max, exact, 1e-10);
    }
}

TEST(Spectral, RankOneIdentity)
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t n = 1; n <= 12; ++n)
    {
        std::vector<double> x(n);
        double sum = 0.0;
        for (auto& v : x)
            sum += v = u(rng);
        Matrix const ones = Matrix::Ones(static_cast<long>(n), static_cast<long>(n));
        EXPECT_NEAR(spectral_radius(x, ones).lambda_max, sum, 1e-12);
    }
}

TEST(Spectral, ReducibleFallsBackToDense)
{
    // upper triangular: power iteration stalls on the repeated eigenvalue
    Matrix a(2, 2);
    a << 1, 1, 0, 1;
    SpectralOptions options;
    options.max_iterations = 50;
    auto const r = spectral_radius(std::vector<double>{1.0, 1.0}, a, 1.0, options);
    EXPECT_NEAR(r.lambda_max, 1.0, 1e-12);
    options.dense_fallback = false;
    EXPECT_THROW(spectral_radius(std::vector<double>{1.0, 1.0}, a, 1.0, options), SpectralError);
}

TEST(NetworkReproduction, Values)
{
    Matrix two(1, 1);
    two << 2.0;
    EXPECT_NEAR(network_R({{0.99}, {0.01}, {0.0}}, {ContactGraph(two), 1.0, 0.4}), 4.95, 1e-12);
    EXPECT_EQ(network_R({{0.0, 0.0}, {0.5, 0.5}, {0.5, 0.5}}, {ContactGraph::complete(2), 1.0, 1.0}), 0.0);
    auto const setup = lemma_setup(0.01);
    EXPECT_NEAR(network_R(setup.initial, setup.model), 1.99, 1e-12);
}

TEST(NetworkSimulate, InvariantsOnConnectedGraphs)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (std::size_t n : {2u, 3u, 6u})
    {
        Matrix a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                a(i, j) = u(rng);
        NetworkModel const model(ContactGraph(a), 1.5 / static_cast<double>(n), 0.3);
        ASSERT_TRUE(model.graph.strongly_connected());
        auto const run = simulate_network(model, seeded(n, 0.02), 400.0, {});
        EXPECT_LE(max_rise(run.reproduction), 1e-9);
        for (auto const& s : run.trajectory.states)
            for (std::size_t i = 0; i < n; ++i)
                EXPECT_LE(std::abs(s[i] + s[n + i] + s[2 * n + i] - 1.0), 1e-9);
        for (std::size_t i = 0; i < n; ++i)
        {
            EXPECT_LE(max_rise(run.trajectory.component(i)), 0.0);
            EXPECT_LE(run.trajectory.states.back()[n + i], sir::default_extinction_threshold + ode::default_event_tol);
        }
        EXPECT_EQ(run.trajectory.events.back().label, "extinction");
    }
}

TEST(NetworkSimulate, SingleNodeMatchesScalar)
{
    for (double beta : {0.3, 2.0, 4.0})
    {
        NetworkModel const model(ContactGraph::complete(1), beta, 0.4);
        double const z0 = 1.0 - 0.99 - 0.01;
        auto const run = simulate_network(model, {{0.99}, {0.01}, {z0}}, 100.0, {});
        auto const plain = sir::simulate_scalar({sir::RateFunction::constant(beta), 0.4}, 0.99, 0.01, 100.0, {});
        ASSERT_EQ(run.trajectory.size(), plain.size());
        for (std::size_t i = 0; i < plain.size(); ++i)
            for (std::size_t j = 0; j < 3; ++j)
                EXPECT_NEAR(run.trajectory.states[i][j], plain.states[i][j], 1e-9);
        auto const mm = detect_multimodality(run.trajectory, 1, 0);
        EXPECT_EQ(mm.peak_count(), 1u);
    }
}

TEST(Lemma, Multimodality)
{
    for (double eps : {0.005, 0.01, 0.05, 0.1, 0.17})
    {
        auto const setup = lemma_setup(eps);
        auto const run = simulate_network(setup.model, setup.initial, 100.0, {});
        EXPECT_GE(detect_multimodality(run.trajectory, 2, 0).peak_count(), 2u) << eps;
        EXPECT_EQ(detect_multimodality(run.trajectory, 2, 1).peak_count(), 1u) << eps;

        std::vector<double> total;
        for (auto const& s : run.trajectory.states)
            total.push_back(s[2] + s[3]);
        EXPECT_EQ(sir::classify_shape(run.trajectory.times, total).shape, sir::Shape::single_peak);

        auto const drift = aggregate_invariants(run.trajectory, setup.model);
        EXPECT_LT(drift.constant_motion, 1e-6);
        EXPECT_LT(drift.ratio, 1e-6);
    }
}

TEST(Lemma, StateAtAggregatePeak)
{
    auto const setup = lemma_setup(0.01);
    auto const run = simulate_network(setup.model, setup.initial, 100.0, {});
    auto const peaks = run.trajectory.events_labelled("aggregate-peak");
    ASSERT_EQ(peaks.size(), 1u);
    auto const& s = peaks[0].state;
    EXPECT_NEAR(s[0] + s[1], 1.0, 1e-8);
    EXPECT_NEAR(s[2] + s[3], 1.0 - std::log(1.99), 1e-3);
    EXPECT_NEAR(s[1], 1.0 / 1.99, 1e-3);
}

TEST(Lemma, InvariantsAtStartAreExactlyZero)
{
    auto const setup = lemma_setup(0.1);
    ode::Trajectory t;
    t.push(0.0, setup.initial.to_vector());
    auto const drift = aggregate_invariants(t, setup.model);
    EXPECT_EQ(drift.constant_motion, 0.0);
    EXPECT_EQ(drift.ratio, 0.0);
    EXPECT_THROW(aggregate_invariants(t, {ContactGraph::complete(2), 2.0, 1.0}), std::invalid_argument);
}

TEST(EpsilonBar, Value)
{
    EXPECT_NEAR(epsilon_bar(), 0.1809, 1e-3);
    EXPECT_NEAR(epsilon_bar_fixed_point(0.1), epsilon_bar(), 1e-12);
    EXPECT_NEAR(epsilon_bar(), bimodality_map(epsilon_bar()), 1e-14);
    EXPECT_NEAR(0.0 - bimodality_map(0.0), -(1.0 - std::log(2.0)) / 2.0, 1e-15);
    EXPECT_NEAR(1.0 - bimodality_map(1.0), 1.0, 1e-15);
}

TEST(Perturbation, ZeroRadiiReproduceLemma)
{
    PerturbationOptions options;
    options.beta_radius = options.gamma_radius = options.weight_radius = 0.0;
    auto const sweep = perturbation_sweep(options);
    ASSERT_EQ(sweep.rows.size(), 1u);
    auto const setup = lemma_setup(0.01);
    auto const run = simulate_network(setup.model, setup.initial, options.horizon, options.control);
    EXPECT_EQ(sweep.rows[0].peaks, detect_multimodality(run.trajectory, 2, 0).peak_count());
}

// Node 0 keeps its initial dip, and with it a second maximum, exactly when
// ydot_0(0) = eps (beta (1 + w)(1 - eps) - gamma) stays negative.
TEST(Perturbation, MultimodalityFollowsInitialDip)
{
    PerturbationOptions options;
    options.epsilons = {0.01, 0.1};
    auto const sweep = perturbation_sweep(options);
    ASSERT_EQ(sweep.rows.size(), 54u);
    std::size_t dipping = 0;
    for (auto const& row : sweep.rows)
    {
        ASSERT_TRUE(row.error.empty()) << row.error;
        double const dip = row.eps * (row.beta * (1.0 + row.weight_offset) * (1.0 - row.eps) - row.gamma);
        if (std::abs(dip) < 1e-9)
            continue;
        dipping += dip < 0 ? 1 : 0;
        EXPECT_EQ(row.multimodal, dip < 0)
            << row.eps << " " << row.beta << " " << row.gamma << " " << row.weight_offset;
    }
    EXPECT_GT(dipping, 0u);
    ASSERT_EQ(sweep.persistence.size(), 2u);
    EXPECT_EQ(sweep.persistence[1].first, 0.1);
    EXPECT_EQ(sweep.persistence[1].second, 1.0);
}

TEST(Perturbation, FarAboveThresholdRecordedWithoutFailure)
{
    PerturbationOptions options;
    options.epsilons = {0.5};
    options.points_per_axis = 2;
    auto const sweep = perturbation_sweep(options);
    EXPECT_EQ(sweep.rows.size(), 8u);
    for (auto const& row : sweep.rows)
        EXPECT_TRUE(row.error.empty());
}

TEST(Perturbation, Offsets)
{
    EXPECT_EQ(symmetric_offsets(0.0, 3), std::vector<double>{0.0});
    EXPECT_EQ(symmetric_offsets(0.02, 3), (std::vector<double>{-0.02, 0.0, 0.02}));
}
