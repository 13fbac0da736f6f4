#include <cmath>

#include <gtest/gtest.h>

#include "sirkit/ode.hpp"
#include "sirkit/sir.hpp"

using namespace sirkit;
using ode::StepControl;

namespace
{
ode::VectorField linear(double lambda)
{
    return [lambda](double, std::span<double const> y, std::span<double> d) { d[0] = lambda * y[0]; };
}

ode::VectorField classical_sir()
{
    return sir::scalar_vector_field(sir::ScalarModel(sir::RateFunction::constant(2.0), 0.4));
}

double max_y(ode::Trajectory const& traj)
{
    double best = 0.0;
    for (auto const& s : traj.states)
        best = std::max(best, s[1]);
    return best;
}
}  // namespace

TEST(Integrate, ZeroFieldIsConstant)
{
    auto const zero = [](double, std::span<double const>, std::span<double> d) { d[0] = d[1] = 0.0; };
    auto const traj = ode::integrate(zero, {0.5, 0.5}, 0.0, 10.0, {});
    ASSERT_GT(traj.size(), 1u);
    EXPECT_DOUBLE_EQ(traj.times.back(), 10.0);
    for (auto const& s : traj.states)
    {
        EXPECT_EQ(s[0], 0.5);
        EXPECT_EQ(s[1], 0.5);
    }
}

TEST(Integrate, Exponential)
{
    StepControl c;
    auto const traj = ode::integrate(linear(-1.0), {1.0}, 0.0, 1.0, c);
    EXPECT_NEAR(traj.states.back()[0], std::exp(-1.0), 10 * (c.abs_tol + c.rel_tol));
}

TEST(Integrate, LinearFieldsBothSchemes)
{
    for (auto scheme : {ode::Scheme::dopri5, ode::Scheme::rk4})
    {
        StepControl c;
        c.scheme = scheme;
        c.max_step = scheme == ode::Scheme::rk4 ? 1e-3 : c.max_step;
        c.initial_step = 1e-3;
        for (double lambda : {-1.0, 0.0, 1.0})
        {
            auto const traj = ode::integrate(linear(lambda), {1.0}, 0.0, 1.0, c);
            double const exact = std::exp(lambda);
            EXPECT_LT(std::abs(traj.states.back()[0] - exact) / exact, 10 * (c.abs_tol + c.rel_tol))
                << "lambda " << lambda;
        }
    }
}

TEST(Integrate, ClassicalSirPeak)
{
    auto const traj = ode::integrate(classical_sir(), {0.99, 0.01, 0.0}, 0.0, 50.0, {});
    EXPECT_LT(traj.states.back()[1], 1e-3);
    EXPECT_NEAR(max_y(traj), 0.4801225, 1e-3);
}

TEST(Integrate, AgreesWithFineFixedStepOracle)
{
    ode::Vector oracle{0.99, 0.01, 0.0};
    double const h = 1e-3;
    for (int i = 0; i < 20'000; ++i)
        oracle = ode::advance(classical_sir(), i * h, oracle, h, ode::Scheme::rk4);
    auto const traj = ode::integrate(classical_sir(), {0.99, 0.01, 0.0}, 0.0, 20.0, {});
    for (std::size_t j = 0; j < 3; ++j)
        EXPECT_NEAR(traj.states.back()[j], oracle[j], 1e-9);
}

TEST(Integrate, HalvingTolerancesNeverIncreasesError)
{
    ode::Vector oracle{0.99, 0.01, 0.0};
    double const h = 5e-4;
    for (int i = 0; i < 40'000; ++i)
        oracle = ode::advance(classical_sir(), i * h, oracle, h, ode::Scheme::rk4);

    double previous = INFINITY;
    StepControl c;
    c.abs_tol = c.rel_tol = 1e-4;
    for (int i = 0; i < 8; ++i, c.abs_tol *= 0.5, c.rel_tol *= 0.5)
    {
        auto const y = ode::integrate(classical_sir(), {0.99, 0.01, 0.0}, 0.0, 20.0, c).states.back();
        double err = 0.0;
        for (std::size_t j = 0; j < 3; ++j)
            err = std::max(err, std::abs(y[j] - oracle[j]));
        EXPECT_LE(err, previous) << "abs_tol " << c.abs_tol;
        previous = err;
    }
}

TEST(Events, AffineInTime)
{
    std::vector<ode::EventSpec> const events{
        {[](double t, std::span<double const>) { return t - 5.0; }, ode::Direction::rising, false, "five"}};
    auto const traj = ode::integrate(linear(-0.3), {1.0}, 0.0, 10.0, {}, events);
    auto const hits = traj.events_labelled("five");
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_NEAR(hits[0].time, 5.0, ode::default_event_tol);
    EXPECT_NEAR(hits[0].state[0], std::exp(-1.5), 1e-9);
    // event states are part of the stored grid
    EXPECT_NE(std::find(traj.times.begin(), traj.times.end(), hits[0].time), traj.times.end());
}

TEST(Events, ThresholdCrossingOnClassicalRun)
{
    std::vector<ode::EventSpec> const events{
        {[](double, std::span<double const> y) { return y[1] - 0.35; }, ode::Direction::rising, false, "k"}};
    auto const traj = ode::integrate(classical_sir(), {0.99, 0.01, 0.0}, 0.0, 50.0, {}, events);
    auto const hits = traj.events_labelled("k");
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_NEAR(hits[0].state[0], 0.5219879, 1e-4);
    EXPECT_LE(std::abs(hits[0].state[1] - 0.35), ode::default_event_tol);
}

TEST(Events, PeakAtRho)
{
    sir::ScalarModel const model(sir::RateFunction::constant(2.0), 0.4);
    std::vector<ode::EventSpec> const events{sir::peak_event(model)};
    auto const traj = ode::integrate(classical_sir(), {0.99, 0.01, 0.0}, 0.0, 50.0, {}, events);
    auto const hits = traj.events_labelled("peak");
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_NEAR(hits[0].state[0], 0.2, 1e-4);
}

TEST(Events, TerminalStopsIntegration)
{
    std::vector<ode::EventSpec> const events{
        {[](double, std::span<double const> y) { return y[0] - 0.5; }, ode::Direction::falling, true, "half"}};
    auto const traj = ode::integrate(linear(-1.0), {1.0}, 0.0, 10.0, {}, events);
    EXPECT_NEAR(traj.times.back(), std::log(2.0), 1e-9);
    EXPECT_EQ(traj.events.back().label, "half");
}

TEST(Events, DirectionFilter)
{
    std::vector<ode::EventSpec> const events{
        {[](double, std::span<double const> y) { return y[0] - 0.5; }, ode::Direction::rising, false, "up"}};
    auto const traj = ode::integrate(linear(-1.0), {1.0}, 0.0, 3.0, {}, events);
    EXPECT_TRUE(traj.events.empty());
}

TEST(Events, RelocationIsIdempotent)
{
    auto const rhs = classical_sir();
    std::vector<ode::EventSpec> const events{
        {[](double, std::span<double const> y) { return y[1] - 0.35; }, ode::Direction::rising, false, "k"}};
    auto const traj = ode::integrate(rhs, {0.99, 0.01, 0.0}, 0.0, 50.0, {}, events);
    double const te = traj.events_labelled("k").front().time;
    for (double width : {1e-2, 1e-4, 1e-6})
    {
        auto const ya = ode::integrate(rhs, {0.99, 0.01, 0.0}, 0.0, te - width, {}).states.back();
        auto const yb = ode::advance(rhs, te - width, ya, 2 * width, ode::Scheme::dopri5);
        auto const hit = ode::locate_event(rhs, te - width, ya, te + width, yb, events[0], {});
        EXPECT_NEAR(hit.time, te, 1e-9) << width;
        EXPECT_LE(std::abs(hit.state[1] - 0.35), ode::default_event_tol);
    }
}

TEST(Events, LocateWithoutSignChangeThrows)
{
    ode::EventSpec const e{[](double t, std::span<double const>) { return t - 5.0; }, ode::Direction::any, false, "x"};
    try
    {
        ode::locate_event(linear(0.0), 0.0, {1.0}, 1.0, {1.0}, e, {});
        FAIL() << "expected IntegrationError";
    }
    catch (ode::IntegrationError const& err)
    {
        EXPECT_EQ(err.kind(), ode::ErrorKind::no_event);
    }
}

TEST(Errors, StepBudget)
{
    StepControl c;
    c.max_steps = 10;
    c.max_step = 0.01;
    try
    {
        ode::integrate(linear(-1.0), {1.0}, 0.0, 10.0, c);
        FAIL() << "expected IntegrationError";
    }
    catch (ode::IntegrationError const& err)
    {
        EXPECT_EQ(err.kind(), ode::ErrorKind::budget_exceeded);
        EXPECT_FALSE(err.partial().empty());
        EXPECT_LT(err.partial().times.back(), 10.0);
    }
}

TEST(Errors, Divergence)
{
    // y' = y^2 blows up at t = 1
    auto const blowup = [](double, std::span<double const> y, std::span<double> d) { d[0] = y[0] * y[0]; };
    try
    {
        ode::integrate(blowup, {1.0}, 0.0, 2.0, {});
        FAIL() << "expected IntegrationError";
    }
    catch (ode::IntegrationError const& err)
    {
        EXPECT_EQ(err.kind(), ode::ErrorKind::divergence);
        EXPECT_LT(err.partial().times.back(), 1.0 + 1e-6);
    }
}

TEST(Errors, InvalidControl)
{
    StepControl c;
    c.abs_tol = -1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_THROW(ode::integrate(linear(1.0), {1.0}, 0.0, 1.0, c), std::invalid_argument);
}

TEST(Trajectory, PushIgnoresRepeatedTime)
{
    ode::Trajectory t;
    t.push(0.0, {1.0});
    t.push(0.0, {2.0});
    t.push(1.0, {3.0});
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t.states[0][0], 1.0);
    EXPECT_EQ(t.component(0), (std::vector<double>{1.0, 3.0}));
}
