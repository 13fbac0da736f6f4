#include "sirkit/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace sirkit::ode
{
namespace
{
struct StepResult
{
    Vector y;
    double error = 0.0;  // scaled RMS norm, dopri5 only
};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

StepResult dopri5_step(VectorField const& rhs,
                       double t,
                       Vector const& y,
                       double h,
                       StepControl const* control)
{
    std::size_t const n = y.size();
    std::array<Vector, 7> k;
    for (auto& ki : k)
    {
        ki.assign(n, 0.0);
    }
    Vector tmp(n);

    rhs(t, y, k[0]);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * a21 * k[0][i];
    rhs(t + c2 * h, tmp, k[1]);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
    rhs(t + c3 * h, tmp, k[2]);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
    rhs(t + c4 * h, tmp, k[3]);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
    rhs(t + c5 * h, tmp, k[4]);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i]
                 + h
                       * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i]
                          + a65 * k[4][i]);
    rhs(t + h, tmp, k[5]);

    StepResult out;
    out.y.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.y[i] = y[i]
                   + h
                         * (b1 * k[0][i] + b3 * k[2][i] + b4 * k[3][i] + b5 * k[4][i]
                            + b6 * k[5][i]);

    if (control != nullptr)
    {
        rhs(t + h, out.y, k[6]);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            double const err = h
                               * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i]
                                  + e6 * k[5][i] + e7 * k[6][i]);
            double const scale = control->abs_tol
                                 + control->rel_tol
                                       * std::max(std::abs(y[i]), std::abs(out.y[i]));
            double const r = err / scale;
            sum += r * r;
        }
        out.error = n == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(n));
    }
    return out;
}

Vector rk4_step(VectorField const& rhs, double t, Vector const& y, double h)
{
    std::size_t const n = y.size();
    Vector k1(n), k2(n), k3(n), k4(n), tmp(n);
    rhs(t, y, k1);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * k3[i];
    rhs(t + h, tmp, k4);

    Vector out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

bool all_finite(Vector const& y)
{
    return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

std::string describe(char const* what, double t)
{
    std::ostringstream os;
    os.precision(17);
    os << what << " at t=" << t;
    return os.str();
}
}  // namespace

//---------------------------------------------------------------------------//

void StepControl::validate() const
{
    if (!(initial_step > 0))
        throw std::invalid_argument("control.initial_step must be > 0");
    if (!(max_step >= initial_step))
        throw std::invalid_argument("control.max_step must be >= initial_step");
    if (!(abs_tol >= 0) || !(rel_tol >= 0))
        throw std::invalid_argument("control.abs_tol and control.rel_tol must be >= 0");
    if (!(abs_tol + rel_tol > 0))
        throw std::invalid_argument("control.abs_tol + control.rel_tol must be > 0");
    if (max_steps == 0)
        throw std::invalid_argument("control.max_steps must be > 0");
}

StepControl StepControl::scaled_tolerances(double factor) const
{
    StepControl out = *this;
    out.abs_tol *= factor;
    out.rel_tol *= factor;
    return out;
}

std::vector<double> Trajectory::component(std::size_t index) const
{
    std::vector<double> out;
    out.reserve(states.size());
    for (auto const& s : states)
        out.push_back(s.at(index));
    return out;
}

std::vector<Event> Trajectory::events_labelled(std::string_view label) const
{
    std::vector<Event> out;
    std::copy_if(events.begin(), events.end(), std::back_inserter(out), [&](Event const& e) {
        return e.label == label;
    });
    return out;
}

void Trajectory::push(double t, Vector state)
{
    if (!times.empty() && !(t > times.back()))
        return;
    times.push_back(t);
    states.push_back(std::move(state));
}

void Trajectory::extend(Trajectory const& other)
{
    for (std::size_t i = 0; i < other.size(); ++i)
        push(other.times[i], other.states[i]);
    events.insert(events.end(), other.events.begin(), other.events.end());
}

char const* to_string(ErrorKind kind)
{
    switch (kind)
    {
        case ErrorKind::budget_exceeded: return "budget exceeded";
        case ErrorKind::divergence: return "divergence";
        case ErrorKind::no_event: return "no event";
        case ErrorKind::event_tolerance_unreachable: return "event tolerance unreachable";
    }
    return "unknown";
}

IntegrationError::IntegrationError(ErrorKind kind, std::string const& what, Trajectory partial)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what)
    , kind_(kind)
    , partial_(std::move(partial))
{
}

bool crosses(double g_a, double g_b, Direction direction)
{
    bool const up = g_a < 0.0 && g_b >= 0.0;
    bool const down = g_a > 0.0 && g_b <= 0.0;
    switch (direction)
    {
        case Direction::rising: return up;
        case Direction::falling: return down;
        case Direction::any: return up || down;
    }
    return false;
}

Vector advance(VectorField const& rhs, double t, Vector const& y, double h, Scheme scheme)
{
    if (h == 0.0)
        return y;
    if (scheme == Scheme::rk4)
        return rk4_step(rhs, t, y, h);
    return dopri5_step(rhs, t, y, h, nullptr).y;
}

EventHit locate_event(VectorField const& rhs,
                      double t_a,
                      Vector const& y_a,
                      double t_b,
                      Vector const& y_b,
                      EventSpec const& event,
                      StepControl const& control,
                      double event_tol)
{
    double g_lo = event.function(t_a, y_a);
    double const g_hi = event.function(t_b, y_b);
    if (!crosses(g_lo, g_hi, event.direction))
        throw IntegrationError(ErrorKind::no_event,
                               describe(("'" + event.label + "' has no sign change").c_str(), t_a));
    if (std::abs(g_hi) <= event_tol && g_hi == 0.0)
        return {t_b, y_b};

    double lo = t_a;
    double hi = t_b;
    EventHit best{t_b, y_b};
    double best_g = std::abs(g_hi);
    constexpr int max_iterations = 200;
    for (int it = 0; it < max_iterations; ++it)
    {
        double const mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi))
            break;
        Vector y_mid = advance(rhs, t_a, y_a, mid - t_a, control.scheme);
        double const g_mid = event.function(mid, y_mid);
        if (std::abs(g_mid) < best_g)
        {
            best_g = std::abs(g_mid);
            best = {mid, y_mid};
        }
        if (std::abs(g_mid) <= event_tol)
            return {mid, std::move(y_mid)};
        // Keep the bracket [lo, hi] with the sign change on it.
        if ((g_lo < 0.0) == (g_mid < 0.0) && g_mid != 0.0)
        {
            lo = mid;
            g_lo = g_mid;
        }
        else
        {
            hi = mid;
        }
    }
    if (best_g <= event_tol)
        return best;
    throw IntegrationError(ErrorKind::event_tolerance_unreachable,
                           describe(("'" + event.label + "' not resolved").c_str(), lo));
}

Trajectory integrate(VectorField const& rhs,
                     Vector y0,
                     double t0,
                     double t1,
                     StepControl const& control,
                     std::span<EventSpec const> events,
                     double event_tol)
{
    control.validate();
    if (!(t1 > t0))
        throw std::invalid_argument("integrate: t1 must exceed t0");

    Trajectory traj;
    if (!all_finite(y0))
        throw IntegrationError(ErrorKind::divergence, describe("non-finite initial state", t0));
    traj.push(t0, y0);

    std::vector<double> g_prev(events.size());
    for (std::size_t i = 0; i < events.size(); ++i)
        g_prev[i] = events[i].function(t0, y0);

    double t = t0;
    Vector y = std::move(y0);
    double h = std::min({control.initial_step, control.max_step, t1 - t0});
    std::size_t steps = 0;

    while (t < t1)
    {
        if (steps++ >= control.max_steps)
            throw IntegrationError(ErrorKind::budget_exceeded,
                                   describe("step budget exhausted", t),
                                   std::move(traj));
        h = std::min(h, control.max_step);
        bool const last = t + h >= t1;
        if (last)
            h = t1 - t;

        Vector y_new;
        double factor = 1.0;
        if (control.scheme == Scheme::rk4)
        {
            y_new = rk4_step(rhs, t, y, h);
        }
        else
        {
            auto step = dopri5_step(rhs, t, y, h, &control);
            if (!std::isfinite(step.error))
                step.error = std::numeric_limits<double>::max();
            if (step.error > 1.0)
            {
                h *= std::max(0.2, 0.9 * std::pow(step.error, -0.2));
                if (h < 1e-14 * std::max(1.0, std::abs(t)))
                    throw IntegrationError(ErrorKind::divergence,
                                           describe("step size underflow", t),
                                           std::move(traj));
                continue;
            }
            y_new = std::move(step.y);
            factor = step.error == 0.0 ? 5.0
                                       : std::clamp(0.9 * std::pow(step.error, -0.2), 0.2, 5.0);
        }
        double const t_new = last ? t1 : t + h;
        if (!all_finite(y_new))
            throw IntegrationError(ErrorKind::divergence,
                                   describe("non-finite state component", t_new),
                                   std::move(traj));

        // Events bracketed by this step, earliest first.
        std::vector<double> g_new(events.size());
        std::vector<std::pair<EventHit, std::size_t>> hits;
        for (std::size_t i = 0; i < events.size(); ++i)
        {
            g_new[i] = events[i].function(t_new, y_new);
            if (crosses(g_prev[i], g_new[i], events[i].direction))
            {
                hits.emplace_back(
                    locate_event(rhs, t, y, t_new, y_new, events[i], control, event_tol), i);
            }
        }
        std::stable_sort(hits.begin(), hits.end(), [](auto const& a, auto const& b) {
            return a.first.time < b.first.time;
        });
        for (auto& [hit, index] : hits)
        {
            auto const& spec = events[index];
            traj.events.push_back({spec.label, hit.time, hit.state});
            traj.push(hit.time, hit.state);
            if (spec.terminal)
                return traj;
        }

        traj.push(t_new, y_new);
        g_prev = std::move(g_new);
        t = t_new;
        y = std::move(y_new);
        if (control.scheme == Scheme::dopri5 && !last)
            h *= factor;
    }
    return traj;
}

}  // namespace sirkit::ode
