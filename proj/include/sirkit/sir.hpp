#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sirkit/ode.hpp"

namespace sirkit
{

//! Argument outside the mathematical domain of an analytic formula.
class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

namespace sir
{

//! One point of the scalar model on the unit simplex.
struct SirState
{
    double x = 1.0;
    double y = 0.0;
    double z = 0.0;

    //! (1 - eps, eps, 0): the initial condition used throughout the analytics.
    static SirState seeded(double eps) { return {1.0 - eps, eps, 0.0}; }
    static SirState from_vector(std::span<double const> v) { return {v[0], v[1], v[2]}; }
    [[nodiscard]] ode::Vector to_vector() const { return {x, y, z}; }

    //! Negative round-off is clamped to zero.
    [[nodiscard]] SirState clamped() const;
    [[nodiscard]] bool on_simplex(double tol = 1e-9) const;
};

struct Derivative
{
    double dx = 0.0;
    double dy = 0.0;
    double dz = 0.0;
};

enum class RateFamily
{
    constant,
    power
};

//! Contact rate f(x, y): beta, or beta * (1 - y)^p.
class RateFunction
{
  public:
    static RateFunction constant(double beta);
    static RateFunction power(double beta, double exponent);

    [[nodiscard]] double operator()(double x, double y) const;

    [[nodiscard]] RateFamily family() const { return family_; }
    [[nodiscard]] double beta() const { return beta_; }
    //! Absent for the constant family.
    [[nodiscard]] std::optional<double> exponent() const;

  private:
    RateFunction(RateFamily family, double beta, double exponent);

    RateFamily family_;
    double beta_;
    double exponent_;
};

class ScalarModel
{
  public:
    ScalarModel(RateFunction rate, double gamma);

    [[nodiscard]] RateFunction const& rate() const { return rate_; }
    [[nodiscard]] double gamma() const { return gamma_; }

    //! gamma / beta; only defined for a constant rate.
    [[nodiscard]] std::optional<double> rho() const;

  private:
    RateFunction rate_;
    double gamma_;
};

enum class Shape
{
    monotone_decreasing,
    single_peak,
    plateau_peak,
    multimodal
};

[[nodiscard]] char const* to_string(Shape shape);

struct ShapeReport
{
    Shape shape = Shape::monotone_decreasing;
    std::vector<double> peak_times;
    std::vector<double> peak_values;
};

inline constexpr double default_extinction_threshold = 1e-8;
inline constexpr double default_value_tol = 1e-9;
inline constexpr double default_plateau_tol = 1e-9;

Derivative scalar_rhs(SirState const& state, ScalarModel const& model);

//! R = x f(x, y) / gamma.
double reproduction_function(SirState const& state, ScalarModel const& model);

//! Vector field over (x, y, z) for the integrator.
ode::VectorField scalar_vector_field(ScalarModel const& model);

//! ydot falling through zero.
ode::EventSpec peak_event(ScalarModel const& model);

//! Terminal event: component `index` falls below `threshold`.
ode::EventSpec extinction_event(double threshold, std::size_t index = 1);

//! Run from (x0, y0, 1 - x0 - y0) with peak and extinction events.
ode::Trajectory simulate_scalar(ScalarModel const& model,
                                double x0,
                                double y0,
                                double horizon,
                                ode::StepControl const& control,
                                double extinction_threshold = default_extinction_threshold);

ode::Trajectory simulate_scalar(ScalarModel const& model,
                                SirState const& initial,
                                double horizon,
                                ode::StepControl const& control,
                                double extinction_threshold = default_extinction_threshold);

//! Gamma(x, y, z) = rho ln x + z. Throws DomainError for x <= 0.
double motion_invariant(SirState const& state, double rho);

//! y on the classical orbit through (1 - eps, eps, 0).
double orbit_infected(double x, double eps, double rho);

struct PeakEstimate
{
    double value = 0.0;
    //! rho >= 1 - eps: no outbreak, the maximum is the initial eps.
    bool at_start = false;
};

//! M(eps, rho) = 1 - rho + rho ln rho - rho ln(1 - eps).
PeakEstimate classical_peak(double eps, double rho);

//! Count local maxima after hysteresis suppression of moves smaller than
//! value_tol. A decreasing start counts as a maximum at times.front().
ShapeReport classify_shape(std::span<double const> times,
                           std::span<double const> values,
                           double value_tol = default_value_tol,
                           double plateau_tol = default_plateau_tol);

//! Shape of the infected component (index 1) of a scalar trajectory.
ShapeReport classify_shape(ode::Trajectory const& trajectory,
                           double value_tol = default_value_tol,
                           double plateau_tol = default_plateau_tol,
                           std::size_t component = 1);

}  // namespace sir
}  // namespace sirkit
