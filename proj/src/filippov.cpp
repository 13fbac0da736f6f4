#include "sirkit/filippov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace sirkit::filippov
{
namespace
{
constexpr double boundary_tol = 1e-12;

// Next mode for a state lying on y = k.
Mode mode_on_threshold(double x, ThresholdPolicy const& policy)
{
    auto const manifold = sliding_manifold(policy);
    if (x <= manifold.x_low)
        return Mode::free_beta;
    if (manifold.contains(x))
        return Mode::sliding;
    return Mode::free_beta_bar;
}

Mode initial_mode(sir::SirState const& s, ThresholdPolicy const& policy)
{
    if (s.y < policy.k)
        return Mode::free_beta;
    if (s.y > policy.k)
        return Mode::free_beta_bar;
    return mode_on_threshold(s.x, policy);
}

sir::SirState snap_to_threshold(sir::SirState s, double k)
{
    s.y = k;
    s.z = 1.0 - s.x - k;
    return s;
}

void require_outbreak(double eps, double rho)
{
    if (!(eps > 0 && eps < 1))
        throw DomainError("eps must lie in (0, 1)");
    if (!((1.0 - eps) / rho > 1.0))
        throw DomainError("no outbreak: (1 - eps) / rho must exceed 1");
}
}  // namespace

void ThresholdPolicy::validate() const
{
    if (!(beta > 0))
        throw std::invalid_argument("policy.beta must be > 0");
    if (!(beta_bar > 0))
        throw std::invalid_argument("policy.beta_bar must be > 0");
    if (!(beta_bar < beta))
        throw std::invalid_argument("policy.beta_bar must be < policy.beta");
    if (!(k > 0 && k < 1))
        throw std::invalid_argument("policy.k must lie in (0, 1)");
    if (!(gamma > 0))
        throw std::invalid_argument("policy.gamma must be > 0");
}

ModeChatterError::ModeChatterError(std::string const& what, ode::Trajectory partial)
    : std::runtime_error("mode chatter: " + what), partial_(std::move(partial))
{
}

char const* to_string(Regime regime)
{
    switch (regime)
    {
        case Regime::A: return "A";
        case Regime::B: return "B";
        case Regime::C: return "C";
    }
    return "?";
}

char const* to_string(Mode mode)
{
    switch (mode)
    {
        case Mode::free_beta: return "free-beta";
        case Mode::free_beta_bar: return "free-beta-bar";
        case Mode::sliding: return "sliding";
    }
    return "?";
}

SlidingManifold sliding_manifold(ThresholdPolicy const& policy)
{
    return {policy.rho(), std::min(policy.rho_bar(), 1.0), policy.k};
}

double threshold_rate(double y, ThresholdPolicy const& policy)
{
    return y < policy.k ? policy.beta : policy.beta_bar;
}

EntryLevel entry_level(double eps, double rho, double rho_bar)
{
    if (!(eps > 0 && eps < 1))
        throw DomainError("entry_level: eps must lie in (0, 1)");
    if (!(rho > 0 && rho < rho_bar))
        throw DomainError("entry_level: requires 0 < rho < rho_bar");
    if (rho_bar < 1.0 - eps)
        return {1.0 - rho_bar + rho * std::log(rho_bar / (1.0 - eps)), false};
    return {eps, rho_bar == 1.0 - eps};
}

double crossing_abscissa(double eps, double rho, double k)
{
    require_outbreak(eps, rho);
    if (k < eps)
        throw DomainError("crossing_abscissa: starts above threshold (k < eps)");
    double const peak = sir::classical_peak(eps, rho).value;
    if (k >= peak)
        throw DomainError("crossing_abscissa: no crossing (k >= M(eps, rho))");
    if (k == eps)
        return 1.0 - eps;

    // orbit_infected - k is positive at rho and non-positive at 1 - eps.
    double lo = rho;
    double hi = 1.0 - eps;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it)
    {
        double const mid = 0.5 * (lo + hi);
        if (sir::orbit_infected(mid, eps, rho) - k > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double orbit_travel_time(double eps, double beta, double gamma, double x_target)
{
    double const rho = gamma / beta;
    require_outbreak(eps, rho);
    if (!(x_target > rho && x_target <= 1.0 - eps))
        throw DomainError("orbit_travel_time: x_target must lie in (rho, 1 - eps]");
    if (x_target == 1.0 - eps)
        return 0.0;
    auto const integrand = [&](double x) {
        return 1.0 / (beta * x * sir::orbit_infected(x, eps, rho));
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, x_target, 1.0 - eps, 20, 1e-13);
}

RegimeReport classify_regime(double eps, ThresholdPolicy const& policy)
{
    policy.validate();
    double const rho = policy.rho();
    double const rho_bar = policy.rho_bar();
    double const k = policy.k;
    require_outbreak(eps, rho);
    if (k < eps)
        throw DomainError("classify_regime: starts above threshold (k < eps)");

    RegimeReport report;
    report.classical_peak = sir::classical_peak(eps, rho).value;
    report.entry_level = entry_level(eps, rho, rho_bar).value;
    double const big_m = report.classical_peak;
    double const small_m = report.entry_level;

    if (std::abs(k - big_m) <= boundary_tol || std::abs(k - small_m) <= boundary_tol)
        throw BoundaryRegimeError("boundary regime: k coincides with M or m");

    if (k > big_m)
    {
        report.regime = Regime::A;
        report.predicted_peak = big_m;
        return report;
    }

    double const x_cross = crossing_abscissa(eps, rho, k);
    report.crossing_x = x_cross;
    report.t_star = orbit_travel_time(eps, policy.beta, policy.gamma, x_cross);
    if (k > small_m)
    {
        report.regime = Regime::B;
        report.predicted_peak = k;
        report.sliding_duration = (x_cross - rho) / (policy.gamma * k);
        report.t_star_star = *report.t_star + *report.sliding_duration;
    }
    else
    {
        report.regime = Regime::C;
        report.predicted_peak = sir::classical_peak(eps, rho_bar).value
                                + (rho_bar - rho) * std::log((1.0 - eps) / x_cross);
    }
    return report;
}

double controlled_peak(double eps, ThresholdPolicy const& policy)
{
    policy.validate();
    double const rho = policy.rho();
    double const rho_bar = policy.rho_bar();
    require_outbreak(eps, rho);
    if (!(rho_bar < 1.0 - eps))
        throw DomainError("controlled_peak: regime C needs rho_bar < 1 - eps");
    double const m = entry_level(eps, rho, rho_bar).value;
    if (!(policy.k >= eps && policy.k <= m))
        throw DomainError("controlled_peak: regime C needs eps <= k <= m(eps, rho, rho_bar)");
    double const x_cross = crossing_abscissa(eps, rho, policy.k);
    return sir::classical_peak(eps, rho_bar).value
           + (rho_bar - rho) * std::log((1.0 - eps) / x_cross);
}

double sliding_duration(double eps, ThresholdPolicy const& policy)
{
    auto const report = classify_regime(eps, policy);
    if (report.regime != Regime::B)
        throw NoSlidingError(std::string("no sliding interval in regime ")
                             + to_string(report.regime));
    return *report.sliding_duration;
}

//---------------------------------------------------------------------------//

bool ThresholdRun::has_sliding() const
{
    return std::any_of(segments.begin(), segments.end(), [](Segment const& s) {
        return s.mode == Mode::sliding && s.t_end > s.t_begin;
    });
}

bool ThresholdRun::exceeds_threshold(double k) const
{
    return std::any_of(trajectory.states.begin(), trajectory.states.end(), [k](auto const& s) {
        return s[1] > k + 1e-9;
    });
}

double ThresholdRun::max_infected() const
{
    double best = 0.0;
    for (auto const& s : trajectory.states)
        best = std::max(best, s[1]);
    return best;
}

Regime observed_regime(ThresholdRun const& run, double k)
{
    if (run.exceeds_threshold(k))
        return Regime::C;
    if (run.has_sliding())
        return Regime::B;
    return Regime::A;
}

ThresholdRun simulate_threshold(ThresholdPolicy const& policy,
                                double eps,
                                double horizon,
                                ode::StepControl const& control,
                                ThresholdOptions const& options)
{
    return simulate_threshold(policy, sir::SirState::seeded(eps), horizon, control, options);
}

ThresholdRun simulate_threshold(ThresholdPolicy const& policy,
                                sir::SirState const& initial,
                                double horizon,
                                ode::StepControl const& control,
                                ThresholdOptions const& options)
{
    policy.validate();
    control.validate();
    if (!initial.on_simplex() || initial.x < 0 || initial.y < 0)
        throw std::invalid_argument("initial state must lie on the simplex");
    if (!(horizon > 0))
        throw std::invalid_argument("horizon must be > 0");

    double const k = policy.k;
    double const gamma = policy.gamma;
    double const rho = policy.rho();

    ThresholdRun run;
    auto& traj = run.trajectory;
    double t = 0.0;
    sir::SirState s = initial;
    Mode mode = initial_mode(s, policy);
    traj.push(t, s.to_vector());
    int switches = 0;

    auto switch_mode = [&](Mode next) {
        mode = next;
        if (++switches > options.max_mode_switches)
            throw ModeChatterError("more than " + std::to_string(options.max_mode_switches)
                                       + " mode transitions",
                                   traj);
    };

    while (t < horizon)
    {
        if (mode == Mode::sliding)
        {
            // Reduced dynamics on the manifold: ydot = 0 forces x f = gamma.
            double const rate = gamma * k;
            double const t_exit = t + (s.x - rho) / rate;
            double const t_end = std::min(t_exit, horizon);
            traj.events.push_back({"sliding-entry", t, s.to_vector()});
            auto const count = static_cast<long>(
                std::max(1.0, std::ceil((t_end - t) / options.sliding_sample_step)));
            double const x_entry = s.x;
            double const t_entry = t;
            for (long i = 1; i <= count; ++i)
            {
                double const ti = i == count ? t_end : t_entry + (t_end - t_entry) * i / count;
                double const xi = (i == count && t_end == t_exit) ? rho
                                                                 : x_entry - rate * (ti - t_entry);
                traj.push(ti, {xi, k, 1.0 - xi - k});
            }
            run.segments.push_back({Mode::sliding, t_entry, t_end});
            t = t_end;
            s = sir::SirState::from_vector(traj.states.back());
            if (t_end < t_exit)
                break;
            traj.events.push_back({"sliding-exit", t, s.to_vector()});
            switch_mode(Mode::free_beta);
            continue;
        }

        double const rate = mode == Mode::free_beta ? policy.beta : policy.beta_bar;
        sir::ScalarModel const model(sir::RateFunction::constant(rate), gamma);
        std::vector<ode::EventSpec> const events{
            sir::peak_event(model),
            sir::extinction_event(options.extinction_threshold),
            {[k](double, std::span<double const> y) { return y[1] - k; },
             mode == Mode::free_beta ? ode::Direction::rising : ode::Direction::falling,
             true,
             "threshold-hit"}};

        auto segment = ode::integrate(
            sir::scalar_vector_field(model), s.to_vector(), t, horizon, control, events);
        double const t_begin = t;
        t = segment.times.back();
        s = sir::SirState::from_vector(segment.states.back());

        bool const hit = !segment.events.empty() && segment.events.back().label == "threshold-hit"
                         && segment.events.back().time == t;
        if (hit)
        {
            s = snap_to_threshold(s, k);
            segment.states.back() = s.to_vector();
        }
        traj.extend(segment);
        run.segments.push_back({mode, t_begin, t});
        if (!hit)
            break;
        switch_mode(mode_on_threshold(s.x, policy));
    }
    return run;
}

}  // namespace sirkit::filippov
