// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "sirkit/filippov.hpp"
#include "sirkit/network.hpp"
#include "sirkit/report.hpp"
#include "sirkit/sir.hpp"
#include "sirkit/verify.hpp"

using namespace sirkit;

namespace
{
int failures = 0;

void criterion(char const* id, char const* title, std::function<std::string(bool&)> const& body)
{
    bool ok = true;
    std::string detail;
    try
    {
        detail = body(ok);
    }
    catch (std::exception const& e)
    {
        ok = false;
        detail = std::string("threw: ") + e.what();
    }
    failures += ok ? 0 : 1;
    std::printf("[%s] %s %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
    std::fflush(stdout);
}

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double max_rise(std::vector<double> const& v)
{
    double rise = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i)
        rise = std::max(rise, v[i] - v[i - 1]);
    return rise;
}

double max_of(std::vector<double> const& v)
{
    return *std::max_element(v.begin(), v.end());
}

sir::ScalarModel const classical{sir::RateFunction::constant(2.0), 0.4};
filippov::ThresholdPolicy const sliding_policy{2.0, 0.38, 0.35, 0.4};
filippov::ThresholdPolicy const excursion_policy{2.0, 1.0, 0.35, 0.4};
double const eps = 0.01;
}  // namespace

int main()
{
    ode::StepControl const control;

    criterion("AC1", "classical peak", [&](bool& ok) {
        double const m = sir::classical_peak(eps, 0.2).value;
        double const coarse = max_of(sir::simulate_scalar(classical, 0.99, 0.01, 100.0, control).component(1));
        double const fine =
            max_of(sir::simulate_scalar(classical, 0.99, 0.01, 100.0, control.scaled_tolerances(0.1)).component(1));
        ok = std::abs(m - 0.48012) <= 1e-5 && std::abs(coarse - m) <= 1e-3 && std::abs(fine - m) <= 1e-5;
        return "M=" + num(m) + " |sim-M|=" + num(std::abs(coarse - m)) + " (<=1e-3), finer tolerances "
               + num(std::abs(fine - m)) + " (<=1e-5)";
    });

    criterion("AC2", "regime classification on the figure parameters", [&](bool& ok) {
        auto const b = filippov::classify_regime(eps, sliding_policy);
        auto const b_run = filippov::simulate_threshold(sliding_policy, eps, 100.0, control);
        auto const c = filippov::classify_regime(eps, excursion_policy);
        auto const c_run = filippov::simulate_threshold(excursion_policy, eps, 100.0, control);

        double peak_time = 0.0;
        double const peak = c_run.max_infected();
        for (std::size_t i = 0; i < c_run.trajectory.size(); ++i)
            if (c_run.trajectory.states[i][1] == peak)
                peak_time = c_run.trajectory.times[i];
        bool sliding_before_peak = false;
        for (auto const& seg : c_run.segments)
            sliding_before_peak |= seg.mode == filippov::Mode::sliding && seg.t_begin < peak_time;

        ok = b.regime == filippov::Regime::B && b_run.has_sliding() && c.regime == filippov::Regime::C
             && c_run.exceeds_threshold(0.35) && !sliding_before_peak;
        return std::string("beta_bar=0.38 -> ") + filippov::to_string(b.regime)
               + (b_run.has_sliding() ? " with sliding" : " WITHOUT sliding") + "; beta_bar=1 -> "
               + filippov::to_string(c.regime) + (c_run.exceeds_threshold(0.35) ? " with excursion" : " no excursion")
               + (sliding_before_peak ? ", sliding before peak" : ", no sliding before peak");
    });

    criterion("AC3", "regime B sliding", [&](bool& ok) {
        auto const run = filippov::simulate_threshold(sliding_policy, eps, 100.0, control);
        auto const entry = run.trajectory.events_labelled("sliding-entry").at(0);
        auto const exit = run.trajectory.events_labelled("sliding-exit").at(0);
        std::vector<double> ts, xs;
        double plateau = 0.0;
        for (std::size_t i = 0; i < run.trajectory.size(); ++i)
        {
            double const t = run.trajectory.times[i];
            if (t < entry.time || t > exit.time)
                continue;
            ts.push_back(t);
            xs.push_back(run.trajectory.states[i][0]);
            plateau = std::max(plateau, std::abs(run.trajectory.states[i][1] - 0.35));
        }
        double const n = static_cast<double>(ts.size());
        double st = 0, sx = 0, stt = 0, stx = 0;
        for (std::size_t i = 0; i < ts.size(); ++i)
        {
            st += ts[i];
            sx += xs[i];
            stt += ts[i] * ts[i];
            stx += ts[i] * xs[i];
        }
        double const slope = (n * stx - st * sx) / (n * stt - st * st);
        double const duration = exit.time - entry.time;
        ok = ts.size() >= 2 && plateau <= 1e-6 && std::abs(duration - 2.300) <= 0.05
             && std::abs(exit.state[0] - 0.2) <= 1e-4 && std::abs(slope / -0.14 - 1.0) <= 0.01;
        return "plateau dev " + num(plateau) + ", duration " + num(duration) + ", exit x " + num(exit.state[0])
               + ", slope " + num(slope);
    });

    criterion("AC4", "regime C peak", [&](bool& ok) {
        double const xk = filippov::crossing_abscissa(eps, 0.2, 0.35);
        double const back = sir::orbit_infected(xk, eps, 0.2);
        double const predicted = filippov::controlled_peak(eps, excursion_policy);
        double const simulated = filippov::simulate_threshold(excursion_policy, eps, 100.0, control).max_infected();
        ok = std::abs(simulated - 0.36552) <= 1e-3 && std::abs(predicted - 0.36552) <= 1e-3
             && std::abs(simulated - predicted) <= 1e-3 && std::abs(xk - 0.52199) <= 1e-4
             && std::abs(back - 0.35) <= 1e-10;
        return "simulated " + num(simulated) + ", formula " + num(predicted) + ", x(k) " + num(xk)
               + ", back-substitution error " + num(std::abs(back - 0.35));
    });

    criterion("AC5", "threshold above M coincides with classical run", [&](bool& ok) {
        auto const run = filippov::simulate_threshold({2.0, 0.38, 0.6, 0.4}, eps, 100.0, control);
        auto const plain = sir::simulate_scalar(classical, sir::SirState::seeded(eps), 100.0, control);
        double gap = run.trajectory.size() == plain.size() ? 0.0 : INFINITY;
        for (std::size_t i = 0; std::isfinite(gap) && i < plain.size(); ++i)
        {
            gap = std::max(gap, std::abs(run.trajectory.times[i] - plain.times[i]));
            for (std::size_t j = 0; j < 3; ++j)
                gap = std::max(gap, std::abs(run.trajectory.states[i][j] - plain.states[i][j]));
        }
        ok = gap <= 1e-9;
        return "max pointwise gap " + num(gap) + " over " + std::to_string(plain.size()) + " points";
    });

    criterion("AC6", "subcritical runs stay subcritical", [&](bool& ok) {
        std::vector<sir::ScalarModel> const models{{sir::RateFunction::constant(0.3), 0.4},
                                                   {sir::RateFunction::power(0.3, 1.0), 0.4},
                                                   {sir::RateFunction::power(0.3, 2.0), 0.4}};
        double worst_r = 0.0, worst_rise = 0.0;
        for (auto const& model : models)
        {
            auto const traj = sir::simulate_scalar(model, 0.99, 0.01, 100.0, control);
            for (auto const& s : traj.states)
                worst_r = std::max(worst_r, sir::reproduction_function(sir::SirState::from_vector(s), model));
            worst_rise = std::max(worst_rise, max_rise(traj.component(1)));
        }
        ok = worst_r < 1.0 && worst_rise <= 0.0;
        return "max R " + num(worst_r) + ", max y increase " + num(worst_rise);
    });

    criterion("AC7", "conservation suite", [&](bool& ok) {
        double simplex = 0.0, gamma = 0.0;
        for (double beta : {0.3, 0.8, 2.0, 5.0})
            for (double e : {0.001, 0.01, 0.1})
            {
                sir::ScalarModel const model(sir::RateFunction::constant(beta), 0.4);
                auto const traj = sir::simulate_scalar(model, 1.0 - e, e, 100.0, control);
                double const g0 = sir::motion_invariant(sir::SirState::seeded(e), *model.rho());
                for (auto const& s : traj.states)
                {
                    simplex = std::max(simplex, std::abs(s[0] + s[1] + s[2] - 1.0));
                    gamma = std::max(gamma,
                                     std::abs(sir::motion_invariant(sir::SirState::from_vector(s), *model.rho()) - g0));
                }
            }
        auto const setup = network::lemma_setup(eps);
        auto const run = network::simulate_network(setup.model, setup.initial, 100.0, control);
        auto const drift = network::aggregate_invariants(run.trajectory, setup.model);
        ok = simplex <= 1e-9 && gamma <= 1e-6 && drift.constant_motion <= 1e-6 && drift.ratio <= 1e-6;
        return "simplex " + num(simplex) + ", Gamma " + num(gamma) + ", constant-motion " + num(drift.constant_motion)
               + ", ratio " + num(drift.ratio);
    });

    criterion("AC8", "two-population bimodality", [&](bool& ok) {
        auto const setup = network::lemma_setup(eps);
        auto const d = network::network_rhs(setup.initial, setup.model);
        auto const run = network::simulate_network(setup.model, setup.initial, 100.0, control);
        auto const peaks = network::detect_multimodality(run.trajectory, 2, 0).peak_count();
        auto const s = run.trajectory.events_labelled("aggregate-peak").at(0).state;
        double const ybar = s[2] + s[3];
        double const x2 = s[1];
        double const dy1 = d.dy[0];
        double const dybar = d.dy[0] + d.dy[1];
        ok = peaks >= 2 && std::abs(ybar - 0.311865) <= 1e-3 && std::abs(x2 - 0.502513) <= 1e-3
             && std::abs(dy1 + 1e-4) <= 1e-12 && std::abs(dybar - 0.0099) <= 1e-12;
        return "node-1 maxima " + std::to_string(peaks) + ", ybar " + num(ybar) + ", x2 " + num(x2) + ", dy1(0) "
               + num(dy1) + ", dybar(0) " + num(dybar);
    });

    criterion("AC9", "bimodality threshold", [&](bool& ok) {
        double const fixed = network::epsilon_bar_fixed_point(0.1);
        double const bisect = network::epsilon_bar();
        std::string counts;
        bool all = true;
        for (double e : {0.005, 0.01, 0.05, 0.1, 0.17})
        {
            auto const setup = network::lemma_setup(e);
            auto const run = network::simulate_network(setup.model, setup.initial, 100.0, control);
            auto const n = network::detect_multimodality(run.trajectory, 2, 0).peak_count();
            all = all && n >= 2 && e < fixed;
            counts += " " + num(e) + ":" + std::to_string(n);
        }
        ok = std::abs(fixed - 0.1809) <= 1e-3 && std::abs(fixed - bisect) <= 1e-12 && all;
        return "eps_bar " + num(fixed) + ", |fixed-bisection| " + num(std::abs(fixed - bisect)) + ", maxima" + counts;
    });

    criterion("AC10", "spectral oracle", [&](bool& ok) {
        std::mt19937_64 rng(42);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial)
        {
            network::Matrix a(2, 2);
            a << 1e-3 + u(rng), u(rng), u(rng), 1e-3 + u(rng);
            std::vector<double> const x{u(rng), u(rng)};
            double const p = x[0] * a(0, 0), q = x[0] * a(0, 1), r = x[1] * a(1, 0), t = x[1] * a(1, 1);
            double const exact = 0.5 * (p + t + std::sqrt((p - t) * (p - t) + 4 * q * r));
            worst = std::max(worst, std::abs(network::spectral_radius(x, a).lambda_max - exact));
        }
        double rank_one = 0.0;
        for (std::size_t n = 1; n <= 8; ++n)
        {
            std::vector<double> x(n);
            double sum = 0.0;
            for (auto& v : x)
                sum += v = u(rng);
            network::Matrix const ones = network::Matrix::Ones(static_cast<long>(n), static_cast<long>(n));
            rank_one = std::max(rank_one, std::abs(network::spectral_radius(x, ones).lambda_max - sum));
        }
        double r_rise = 0.0;
        auto const setup = network::lemma_setup(eps);
        r_rise = max_rise(network::simulate_network(setup.model, setup.initial, 100.0, control).reproduction);
        network::Matrix ring = network::Matrix::Zero(5, 5);
        for (int i = 0; i < 5; ++i)
        {
            ring(i, i) = 1.0;
            ring(i, (i + 1) % 5) = 0.7;
        }
        network::NetworkModel const model(network::ContactGraph(ring), 0.9, 0.5);
        network::NetworkState s{std::vector<double>(5, 1.0), std::vector<double>(5, 0.0), std::vector<double>(5, 0.0)};
        s.x[2] = 0.95;
        s.y[2] = 0.05;
        r_rise = std::max(r_rise, max_rise(network::simulate_network(model, s, 200.0, control).reproduction));
        ok = worst <= 1e-10 && rank_one <= 1e-12 && r_rise <= 1e-9;
        return "2x2 max error " + num(worst) + ", rank-one error " + num(rank_one) + ", max R increase " + num(r_rise);
    });

    criterion("AC11", "formula-vs-simulation sweep", [&](bool& ok) {
        auto const result = report::run_sweep(verify::threshold_template(), verify::threshold_consistency_grid());
        double worst = 0.0;
        std::size_t matched = 0;
        for (auto const& row : result.rows)
        {
            worst = std::max(worst, row.discrepancy().value_or(INFINITY));
            matched += row.status == "ok" && row.label == row.structure ? 1 : 0;
        }
        ok = worst <= 1e-3 && matched == result.rows.size() && !result.rows.empty();
        return "max |predicted-simulated| " + num(worst) + ", labels " + std::to_string(matched) + "/"
               + std::to_string(result.rows.size());
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
