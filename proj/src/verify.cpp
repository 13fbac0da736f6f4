#include "sirkit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sirkit/filippov.hpp"
#include "sirkit/network.hpp"
#include "sirkit/report.hpp"
#include "sirkit/sir.hpp"

namespace sirkit::verify
{
namespace
{
using ode::StepControl;

struct Suite
{
    std::vector<CheckResult> results;

    //! Passes when measured <= threshold.
    void at_most(std::string name, double measured, double threshold, std::string detail = {})
    {
        results.push_back({std::move(name), measured <= threshold, measured, threshold, std::move(detail)});
    }

    void holds(std::string name, bool ok, std::string detail = {})
    {
        results.push_back({std::move(name), ok, ok ? 0.0 : 1.0, 0.0, std::move(detail)});
    }

    //! Runs body, turning an exception into a failed check.
    template<class Fn>
    void guarded(std::string const& name, Fn&& body)
    {
        try
        {
            body();
        }
        catch (std::exception const& e)
        {
            holds(name, false, std::string("threw: ") + e.what());
        }
    }
};

double simplex_drift(ode::Trajectory const& traj, std::size_t nodes)
{
    double drift = 0.0;
    for (auto const& s : traj.states)
        for (std::size_t i = 0; i < nodes; ++i)
            drift = std::max(drift, std::abs(s[i] + s[nodes + i] + s[2 * nodes + i] - 1.0));
    return drift;
}

// Largest increase between consecutive stored values.
double max_rise(std::vector<double> const& v)
{
    double rise = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i)
        rise = std::max(rise, v[i] - v[i - 1]);
    return rise;
}

double slope(std::vector<double> const& t, std::vector<double> const& x)
{
    double const n = static_cast<double>(t.size());
    double st = 0, sx = 0, stt = 0, stx = 0;
    for (std::size_t i = 0; i < t.size(); ++i)
    {
        st += t[i];
        sx += x[i];
        stt += t[i] * t[i];
        stx += t[i] * x[i];
    }
    return (n * stx - st * sx) / (n * stt - st * st);
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

//---------------------------------------------------------------------------//

void check_ode(Suite& suite, StepControl const& control)
{
    suite.guarded("ode.linear-fields", [&] {
        double worst = 0.0;
        for (double lambda : {-1.0, 0.0, 1.0})
        {
            auto const rhs = [lambda](double, std::span<double const> y, std::span<double> d) {
                d[0] = lambda * y[0];
            };
            auto const traj = ode::integrate(rhs, {1.0}, 0.0, 1.0, control);
            double const exact = std::exp(lambda);
            worst = std::max(worst, std::abs(traj.states.back()[0] - exact) / exact);
        }
        suite.at_most("ode.linear-fields", worst, 10.0 * (control.abs_tol + control.rel_tol),
                      "relative error at t=1, lambda in {-1,0,1}");
    });

    suite.guarded("ode.event-idempotence", [&] {
        sir::ScalarModel const model(sir::RateFunction::constant(2.0), 0.4);
        auto const rhs = sir::scalar_vector_field(model);
        auto const traj = sir::simulate_scalar(model, 0.99, 0.01, 100.0, control);
        auto const peaks = traj.events_labelled("peak");
        if (peaks.empty())
            throw std::runtime_error("no peak event");
        double const tp = peaks.front().time;
        double const ta = tp - 1e-3;
        double const tb = tp + 1e-3;
        auto const ya = ode::integrate(rhs, sir::SirState::seeded(0.01).to_vector(), 0.0, ta, control).states.back();
        auto const yb = ode::advance(rhs, ta, ya, tb - ta, control.scheme);
        auto const again = ode::locate_event(rhs, ta, ya, tb, yb, sir::peak_event(model), control);
        suite.at_most("ode.event-idempotence", std::abs(again.time - tp), ode::default_event_tol,
                      "peak event re-located inside its bracket");
    });

    suite.guarded("ode.tolerance-halving", [&] {
        sir::ScalarModel const model(sir::RateFunction::constant(2.0), 0.4);
        auto const rhs = sir::scalar_vector_field(model);
        double const t_end = 20.0;
        ode::Vector oracle = sir::SirState::seeded(0.01).to_vector();
        int const steps = 40'000;
        double const h = t_end / steps;
        for (int i = 0; i < steps; ++i)
            oracle = ode::advance(rhs, i * h, oracle, h, ode::Scheme::rk4);

        std::vector<double> errors;
        StepControl c;
        c.abs_tol = c.rel_tol = 1e-5;
        for (int i = 0; i < 5; ++i, c.abs_tol *= 0.5, c.rel_tol *= 0.5)
        {
            auto const traj = ode::integrate(rhs, sir::SirState::seeded(0.01).to_vector(), 0.0, t_end, c);
            double err = 0.0;
            for (std::size_t j = 0; j < 3; ++j)
                err = std::max(err, std::abs(traj.states.back()[j] - oracle[j]));
            errors.push_back(err);
        }
        double worst_increase = 0.0;
        std::string detail = "errors:";
        for (std::size_t i = 0; i < errors.size(); ++i)
        {
            detail += " " + fmt(errors[i]);
            if (i)
                worst_increase = std::max(worst_increase, errors[i] - errors[i - 1]);
        }
        suite.at_most("ode.tolerance-halving", worst_increase, 0.0, detail);
    });
}

void check_sir(Suite& suite, StepControl const& control, double scale)
{
    struct Case
    {
        char const* name;
        sir::RateFunction rate;
        double gamma;
        double eps;
    };
    std::vector<Case> const cases{
        {"constant-outbreak", sir::RateFunction::constant(2.0), 0.4, 0.01},
        {"constant-subcritical", sir::RateFunction::constant(0.3), 0.4, 0.01},
        {"power1-outbreak", sir::RateFunction::power(2.0, 1.0), 0.4, 0.01},
        {"power1-subcritical", sir::RateFunction::power(0.3, 1.0), 0.4, 0.01},
        {"power2-outbreak", sir::RateFunction::power(3.0, 2.0), 0.4, 0.01},
        {"power2-subcritical", sir::RateFunction::power(0.3, 2.0), 0.4, 0.01},
    };

    double simplex = 0.0, x_rise = 0.0, z_fall = 0.0, gamma_drift = 0.0, orbit_gap = 0.0;
    double prop1_r = 0.0, prop1_y = 0.0;
    bool dichotomy = true;
    std::string dichotomy_detail;
    for (auto const& c : cases)
    {
        sir::ScalarModel const model(c.rate, c.gamma);
        auto const traj = sir::simulate_scalar(model, 1.0 - c.eps, c.eps, 100.0, control);
        simplex = std::max(simplex, simplex_drift(traj, 1));
        x_rise = std::max(x_rise, max_rise(traj.component(0)));
        auto z = traj.component(2);
        for (double& v : z)
            v = -v;
        z_fall = std::max(z_fall, max_rise(z));

        double const r0 = sir::reproduction_function(sir::SirState::seeded(c.eps), model);
        auto const shape = sir::classify_shape(traj);
        auto const expected = r0 > 1.0 ? sir::Shape::single_peak : sir::Shape::monotone_decreasing;
        if (shape.shape != expected)
        {
            dichotomy = false;
            dichotomy_detail += std::string(c.name) + " -> " + sir::to_string(shape.shape) + "; ";
        }
        if (r0 < 1.0)
        {
            for (auto const& s : traj.states)
                prop1_r = std::max(prop1_r, sir::reproduction_function(sir::SirState::from_vector(s), model));
            prop1_y = std::max(prop1_y, max_rise(traj.component(1)));
        }
        if (auto rho = model.rho())
        {
            double const g0 = sir::motion_invariant(sir::SirState::seeded(c.eps), *rho);
            for (auto const& s : traj.states)
            {
                auto const st = sir::SirState::from_vector(s);
                gamma_drift = std::max(gamma_drift, std::abs(sir::motion_invariant(st, *rho) - g0));
                orbit_gap = std::max(orbit_gap, std::abs(st.y - sir::orbit_infected(st.x, c.eps, *rho)));
            }
        }
    }
    suite.at_most("sir.simplex", simplex, 1e-9);
    suite.at_most("sir.x-nonincreasing", x_rise, 0.0);
    suite.at_most("sir.z-nondecreasing", z_fall, 0.0);
    suite.results.push_back({"sir.prop1-R-below-one", prop1_r < 1.0, prop1_r, 1.0, "max R over subcritical runs"});
    suite.at_most("sir.prop1-y-nonincreasing", prop1_y, 0.0);
    suite.holds("sir.theorem1-dichotomy", dichotomy, dichotomy_detail);
    suite.at_most("sir.gamma-drift", gamma_drift, 1e-6 * scale);
    suite.at_most("sir.orbit-agreement", orbit_gap, 1e-6 * scale);
}

void check_filippov(Suite& suite, StepControl const& control, VerifyOptions const& options)
{
    filippov::ThresholdPolicy const left{2.0, 0.38, 0.35, 0.4};
    filippov::ThresholdPolicy const right{2.0, 1.0, 0.35, 0.4};
    filippov::ThresholdPolicy const high{2.0, 0.38, 0.6, 0.4};
    double const eps = 0.01;

    suite.guarded("filippov.sliding", [&] {
        auto const run = filippov::simulate_threshold(left, eps, 100.0, control);
        std::vector<double> ts, xs;
        double plateau = 0.0;
        for (auto const& seg : run.segments)
        {
            if (seg.mode != filippov::Mode::sliding)
                continue;
            for (std::size_t i = 0; i < run.trajectory.size(); ++i)
            {
                double const t = run.trajectory.times[i];
                if (t < seg.t_begin || t > seg.t_end)
                    continue;
                ts.push_back(t);
                xs.push_back(run.trajectory.states[i][0]);
                plateau = std::max(plateau, std::abs(run.trajectory.states[i][1] - left.k));
            }
        }
        if (ts.size() < 2)
            throw std::runtime_error("no sliding segment");
        suite.at_most("filippov.sliding-plateau", plateau, 1e-6);
        double const expected = -left.gamma * left.k;
        suite.at_most("filippov.sliding-slope", std::abs(slope(ts, xs) / expected - 1.0), 0.01,
                      "fitted xdot " + fmt(slope(ts, xs)));
        auto const exits = run.trajectory.events_labelled("sliding-exit");
        if (exits.empty())
            throw std::runtime_error("no sliding exit");
        suite.at_most("filippov.sliding-exit", std::abs(exits.front().state[0] - left.rho()), 1e-4);
        double const duration = ts.back() - ts.front();
        suite.at_most("filippov.sliding-duration",
                      std::abs(duration - filippov::sliding_duration(eps, left)), 0.05,
                      "duration " + fmt(duration));
    });

    suite.guarded("filippov.regime-consistency", [&] {
        std::string detail;
        bool ok = true;
        for (auto const& policy : {left, right, high})
        {
            auto const predicted = filippov::classify_regime(eps, policy).regime;
            auto const run = filippov::simulate_threshold(policy, eps, 100.0, control);
            auto const observed = filippov::observed_regime(run, policy.k);
            detail += std::string(filippov::to_string(predicted)) + "/" + filippov::to_string(observed) + " ";
            ok = ok && predicted == observed;
        }
        suite.holds("filippov.regime-consistency", ok, detail);
    });

    suite.guarded("filippov.peak-consistency", [&] {
        auto base = threshold_template();
        base.control = control;
        auto const result = report::run_sweep(base, threshold_consistency_grid(), options.execution, options.workers);
        double worst = 0.0;
        std::size_t matched = 0;
        for (auto const& row : result.rows)
        {
            if (auto d = row.discrepancy())
                worst = std::max(worst, *d);
            else
                worst = std::max(worst, 1.0);
            matched += row.status == "ok" && row.label == row.structure ? 1 : 0;
        }
        suite.at_most("filippov.peak-consistency", worst, 1e-3,
                      std::to_string(result.rows.size()) + " cells");
        suite.holds("filippov.sweep-regime-labels", matched == result.rows.size(),
                    std::to_string(matched) + "/" + std::to_string(result.rows.size()) + " match");
    });

    suite.guarded("filippov.well-posedness", [&] {
        std::size_t mismatches = 0;
        for (auto const& policy : {left, right})
        {
            auto const manifold = filippov::sliding_manifold(policy);
            double const delta = 1e-7;
            for (int i = 1; i < 400; ++i)
            {
                double const x = i / 400.0;
                if (std::abs(x - manifold.x_low) < 1e-6 || std::abs(x - manifold.x_high) < 1e-6)
                    continue;
                double const below = (policy.k - delta) * (policy.beta * x - policy.gamma);
                double const above = (policy.k + delta) * (policy.beta_bar * x - policy.gamma);
                bool const toward = below > 0 && above < 0;
                bool const inside = x > manifold.x_low && x < manifold.x_high;
                mismatches += toward != inside ? 1 : 0;
            }
        }
        suite.at_most("filippov.well-posedness", static_cast<double>(mismatches), 0.0,
                      "sampled abscissae where field direction disagrees with the manifold");
    });

    suite.guarded("filippov.regime-c-identity", [&] {
        double worst = 0.0;
        for (double e : {0.005, 0.01, 0.02})
            for (double beta : {1.5, 2.0, 3.0})
                for (double ratio : {0.3, 0.5, 0.7})
                    for (double k : {0.05, 0.1, 0.2})
                    {
                        filippov::ThresholdPolicy const p{beta, ratio * beta, k, 0.4};
                        auto const r = filippov::classify_regime(e, p);
                        if (r.regime != filippov::Regime::C)
                            continue;
                        double const rho = p.rho(), rb = p.rho_bar(), x = *r.crossing_x;
                        double const lhs = k + x - rb + rb * std::log(rb / x);
                        double const rhs = sir::classical_peak(e, rb).value + (rb - rho) * std::log((1.0 - e) / x);
                        worst = std::max(worst, std::abs(lhs - rhs));
                    }
        suite.at_most("filippov.regime-c-identity", worst, 1e-10);
    });
}

void check_network(Suite& suite, StepControl const& control, VerifyOptions const& options, double scale)
{
    suite.guarded("network.lemma", [&] {
        bool multimodal = true;
        std::string detail;
        double derivative_gap = 0.0, motion = 0.0, ratio = 0.0, simplex = 0.0, r_rise = 0.0;
        for (double eps : {0.005, 0.01, 0.05, 0.1, 0.17})
        {
            auto const setup = network::lemma_setup(eps);
            auto const d = network::network_rhs(setup.initial, setup.model);
            derivative_gap = std::max(derivative_gap, std::abs(d.dy[0] + eps * eps));
            derivative_gap = std::max(derivative_gap, std::abs(d.dy[0] + d.dy[1] - (1.0 - eps) * eps));

            auto const run = network::simulate_network(setup.model, setup.initial, 100.0, control);
            auto const mm = network::detect_multimodality(run.trajectory, 2, 0);
            detail += fmt(eps) + ":" + std::to_string(mm.peak_count()) + " ";
            multimodal = multimodal && mm.multimodal();
            auto const drift = network::aggregate_invariants(run.trajectory, setup.model);
            motion = std::max(motion, drift.constant_motion);
            ratio = std::max(ratio, drift.ratio);
            simplex = std::max(simplex, simplex_drift(run.trajectory, 2));
            r_rise = std::max(r_rise, max_rise(run.reproduction));
        }
        suite.holds("network.lemma-multimodal", multimodal, "peaks per eps " + detail);
        suite.at_most("network.lemma-initial-derivatives", derivative_gap, 1e-12);
        suite.at_most("network.constant-motion-drift", motion, 1e-6 * scale);
        suite.at_most("network.ratio-drift", ratio, 1e-6 * scale);
        suite.at_most("network.lemma-simplex", simplex, 1e-9);
        suite.at_most("network.lemma-R-nonincreasing", r_rise, 1e-9);

        auto const setup = network::lemma_setup(0.01);
        auto const run = network::simulate_network(setup.model, setup.initial, 100.0, control);
        auto const peaks = run.trajectory.events_labelled("aggregate-peak");
        if (peaks.empty())
            throw std::runtime_error("no aggregate peak");
        auto const& s = peaks.front().state;
        double const gap = std::max(std::abs(s[2] + s[3] - (1.0 - std::log(1.99))),
                                    std::abs(s[1] - 1.0 / 1.99));
        suite.at_most("network.lemma-peak-state", gap, 1e-3);
    });

    suite.guarded("network.epsilon-bar", [&] {
        double const bisection = network::epsilon_bar();
        double const fixed = options.epsilon_bar_override.value_or(network::epsilon_bar_fixed_point());
        double const residual = std::abs(fixed - network::bimodality_map(fixed));
        suite.at_most("network.epsilon-bar-fixed-point", std::max(residual, std::abs(fixed - bisection)), 1e-12,
                      "eps_bar " + fmt(fixed));
        suite.at_most("network.epsilon-bar-value", std::abs(fixed - 0.1809), 1e-3);
    });

    suite.guarded("network.spectral", [&] {
        std::mt19937_64 rng(20240611);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial)
        {
            network::Matrix a(2, 2);
            a << 0.05 + unit(rng), unit(rng), unit(rng), 0.05 + unit(rng);
            std::vector<double> x{unit(rng), unit(rng)};
            double const p = x[0] * a(0, 0), q = x[0] * a(0, 1), r = x[1] * a(1, 0), s = x[1] * a(1, 1);
            double const exact = 0.5 * (p + s + std::sqrt((p - s) * (p - s) + 4.0 * q * r));
            worst = std::max(worst, std::abs(network::spectral_radius(x, a).lambda_max - exact));
        }
        suite.at_most("network.spectral-2x2", worst, 1e-10, "100 random matrices");

        double rank_one = 0.0;
        for (int trial = 0; trial < 20; ++trial)
        {
            std::size_t const n = 2 + trial % 5;
            std::vector<double> x(n);
            double sum = 0.0;
            for (auto& v : x)
                sum += v = unit(rng);
            network::Matrix const a = network::Matrix::Ones(static_cast<long>(n), static_cast<long>(n));
            rank_one = std::max(rank_one, std::abs(network::spectral_radius(x, a).lambda_max - sum));
        }
        suite.at_most("network.rank-one", rank_one, 1e-12);
    });

    suite.guarded("network.connected-runs", [&] {
        // ring with self loops and a denser random strongly connected graph
        network::Matrix ring = network::Matrix::Zero(4, 4);
        for (int i = 0; i < 4; ++i)
        {
            ring(i, i) = 1.0;
            ring(i, (i + 1) % 4) = 0.5;
        }
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> unit(0.1, 1.0);
        network::Matrix dense(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                dense(i, j) = unit(rng);

        double r_rise = 0.0, x_rise = 0.0, simplex = 0.0, terminal = 0.0;
        bool connected = true;
        for (auto const& [w, beta] : {std::pair{ring, 1.2}, std::pair{dense, 0.6}})
        {
            network::NetworkModel const model(network::ContactGraph(w), beta, 0.5);
            connected = connected && model.graph.strongly_connected();
            std::size_t const n = model.graph.size();
            network::NetworkState s{std::vector<double>(n, 1.0), std::vector<double>(n, 0.0),
                                    std::vector<double>(n, 0.0)};
            s.x[0] = 0.98;
            s.y[0] = 0.02;
            auto const run = network::simulate_network(model, s, 400.0, control);
            r_rise = std::max(r_rise, max_rise(run.reproduction));
            simplex = std::max(simplex, simplex_drift(run.trajectory, n));
            for (std::size_t i = 0; i < n; ++i)
                x_rise = std::max(x_rise, max_rise(run.trajectory.component(i)));
            auto const& last = run.trajectory.states.back();
            for (std::size_t i = 0; i < n; ++i)
                terminal = std::max(terminal, last[n + i]);
        }
        suite.holds("network.test-graphs-connected", connected);
        suite.at_most("network.R-nonincreasing", r_rise, 1e-9);
        suite.at_most("network.simplex", simplex, 1e-9);
        suite.at_most("network.x-nonincreasing", x_rise, 0.0);
        suite.at_most("network.extinction", terminal, sir::default_extinction_threshold + ode::default_event_tol,
                      "max terminal y; the extinction event is located to event_tol");
    });

    suite.guarded("network.scalar-equivalence", [&] {
        network::NetworkModel const model(network::ContactGraph::complete(1), 2.0, 0.4);
        auto const run = network::simulate_network(model, {{0.99}, {0.01}, {1.0 - 0.99 - 0.01}}, 100.0, control);
        sir::ScalarModel const scalar(sir::RateFunction::constant(2.0), 0.4);
        auto const traj = sir::simulate_scalar(scalar, 0.99, 0.01, 100.0, control);
        if (traj.size() != run.trajectory.size())
            throw std::runtime_error("grids differ: " + std::to_string(traj.size()) + " vs "
                                     + std::to_string(run.trajectory.size()));
        double gap = 0.0;
        for (std::size_t i = 0; i < traj.size(); ++i)
        {
            gap = std::max(gap, std::abs(traj.times[i] - run.trajectory.times[i]));
            for (std::size_t j = 0; j < 3; ++j)
                gap = std::max(gap, std::abs(traj.states[i][j] - run.trajectory.states[i][j]));
        }
        suite.at_most("network.scalar-equivalence", gap, 1e-9);
    });
}

void check_scenario(Suite& suite, StepControl const& control)
{
    suite.guarded("scenario.round-trip", [&] {
        auto s = threshold_template();
        s.control = control;
        auto const text = scenario::to_json(s).dump(2);
        auto const again = scenario::to_json(scenario::parse_scenario(text)).dump(2);
        suite.holds("scenario.round-trip", text == again);
    });
    suite.guarded("scenario.determinism", [&] {
        auto s = threshold_template();
        s.control = control;
        auto const a = report::run_scenario(s);
        auto const b = report::run_scenario(s);
        suite.holds("scenario.determinism",
                    a.trajectory_csv == b.trajectory_csv && a.events_csv == b.events_csv
                        && a.report.dump() == b.report.dump());
    });
}
}  // namespace

scenario::Scenario threshold_template()
{
    scenario::Scenario s;
    s.kind = scenario::ModelKind::threshold;
    s.params = scenario::ThresholdParams{};
    return s;
}

scenario::Grid threshold_consistency_grid()
{
    scenario::Grid grid;
    grid.axes = {{"epsilon", {0.005, 0.01, 0.02}},
                 {"beta", {1.5, 2.0, 3.0}},
                 {"beta_bar_ratio", {0.3, 0.5}},
                 {"k", {0.2, 0.35}}};
    return grid;
}

std::vector<CheckResult> run_verification(VerifyOptions const& options)
{
    if (!(options.tolerance_scale > 0))
        throw std::invalid_argument("tolerance_scale must be > 0");
    auto const control = StepControl{}.scaled_tolerances(options.tolerance_scale);
    Suite suite;
    check_ode(suite, control);
    check_sir(suite, control, options.tolerance_scale);
    check_filippov(suite, control, options);
    check_network(suite, control, options, options.tolerance_scale);
    check_scenario(suite, control);
    return suite.results;
}

bool all_passed(std::vector<CheckResult> const& results)
{
    return std::all_of(results.begin(), results.end(), [](CheckResult const& r) { return r.passed; });
}

}  // namespace sirkit::verify
