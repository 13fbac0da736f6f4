#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sirkit::ode
{

using Vector = std::vector<double>;

//! dydt = f(t, y). The output span has the same size as y.
using VectorField =
    std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

enum class Scheme
{
    rk4,    //!< classic fixed-step Runge-Kutta, step = initial_step
    dopri5  //!< embedded Dormand-Prince 5(4) with error control
};

struct StepControl
{
    double initial_step = 1e-3;
    double max_step = 0.5;
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    std::size_t max_steps = 2'000'000;
    Scheme scheme = Scheme::dopri5;

    //! Throws std::invalid_argument naming the offending field.
    void validate() const;

    //! Copy with abs_tol and rel_tol multiplied by factor.
    [[nodiscard]] StepControl scaled_tolerances(double factor) const;
};

enum class Direction
{
    rising,
    falling,
    any
};

struct EventSpec
{
    std::function<double(double, std::span<const double>)> function;
    Direction direction = Direction::any;
    bool terminal = false;
    std::string label;
};

struct Event
{
    std::string label;
    double time = 0.0;
    Vector state;
};

struct Trajectory
{
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<Event> events;

    [[nodiscard]] std::size_t size() const { return times.size(); }
    [[nodiscard]] bool empty() const { return times.empty(); }
    [[nodiscard]] std::size_t dimension() const
    {
        return states.empty() ? 0 : states.front().size();
    }

    //! Time series of one state component.
    [[nodiscard]] std::vector<double> component(std::size_t index) const;

    //! Events whose label matches exactly.
    [[nodiscard]] std::vector<Event> events_labelled(std::string_view label) const;

    //! Append a point; times must stay strictly increasing (equal time is ignored).
    void push(double t, Vector state);

    //! Append another trajectory, dropping its first point if it repeats our last time.
    void extend(Trajectory const& other);
};

enum class ErrorKind
{
    budget_exceeded,
    divergence,
    no_event,
    event_tolerance_unreachable
};

[[nodiscard]] char const* to_string(ErrorKind kind);

class IntegrationError : public std::runtime_error
{
  public:
    IntegrationError(ErrorKind kind, std::string const& what, Trajectory partial = {});

    [[nodiscard]] ErrorKind kind() const { return kind_; }
    [[nodiscard]] Trajectory const& partial() const { return partial_; }

  private:
    ErrorKind kind_;
    Trajectory partial_;
};

inline constexpr double default_event_tol = 1e-10;

//! Integrate from t0 to t1, stopping early at the first terminal event.
//!
//! Event states are found by re-integrating from the left end of the
//! bracketing step and are inserted into the stored grid.
Trajectory integrate(VectorField const& rhs,
                     Vector y0,
                     double t0,
                     double t1,
                     StepControl const& control,
                     std::span<EventSpec const> events = {},
                     double event_tol = default_event_tol);

struct EventHit
{
    double time = 0.0;
    Vector state;
};

//! Bisection on the event function over [t_a, t_b]; each probe integrates
//! one step of the configured scheme from (t_a, y_a).
EventHit locate_event(VectorField const& rhs,
                      double t_a,
                      Vector const& y_a,
                      double t_b,
                      Vector const& y_b,
                      EventSpec const& event,
                      StepControl const& control,
                      double event_tol = default_event_tol);

//! Single step of the given scheme (no error control).
Vector advance(VectorField const& rhs, double t, Vector const& y, double h, Scheme scheme);

//! True if g_a -> g_b is a sign change in the given direction.
[[nodiscard]] bool crosses(double g_a, double g_b, Direction direction);

}  // namespace sirkit::ode
