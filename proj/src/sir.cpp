#include "sirkit/sir.hpp"

#include <algorithm>
#include <cmath>

namespace sirkit::sir
{
namespace
{
double clamp0(double v)
{
    return v < 0.0 ? 0.0 : v;
}

bool is_flat(std::span<double const> values, double tol)
{
    auto const [lo, hi] = std::minmax_element(values.begin(), values.end());
    return *hi - *lo <= tol;
}

// Number of steps spanned by the run of points within tol of values[peak].
std::size_t plateau_steps(std::span<double const> values, std::size_t peak, double tol)
{
    double const level = values[peak];
    std::size_t lo = peak;
    std::size_t hi = peak;
    while (lo > 0 && std::abs(values[lo - 1] - level) <= tol)
        --lo;
    while (hi + 1 < values.size() && std::abs(values[hi + 1] - level) <= tol)
        ++hi;
    return hi - lo;
}
}  // namespace

SirState SirState::clamped() const
{
    return {clamp0(x), clamp0(y), clamp0(z)};
}

bool SirState::on_simplex(double tol) const
{
    return std::abs(x + y + z - 1.0) <= tol && x >= -1e-12 && y >= -1e-12 && z >= -1e-12;
}

RateFunction::RateFunction(RateFamily family, double beta, double exponent)
    : family_(family), beta_(beta), exponent_(exponent)
{
    if (!(beta > 0))
        throw std::invalid_argument("rate.beta must be > 0");
    if (!(exponent >= 0))
        throw std::invalid_argument("rate.exponent must be >= 0");
}

RateFunction RateFunction::constant(double beta)
{
    return {RateFamily::constant, beta, 0.0};
}

RateFunction RateFunction::power(double beta, double exponent)
{
    return {RateFamily::power, beta, exponent};
}

double RateFunction::operator()(double /*x*/, double y) const
{
    if (family_ == RateFamily::constant)
        return beta_;
    return beta_ * std::pow(clamp0(1.0 - y), exponent_);
}

std::optional<double> RateFunction::exponent() const
{
    if (family_ == RateFamily::constant)
        return std::nullopt;
    return exponent_;
}

ScalarModel::ScalarModel(RateFunction rate, double gamma) : rate_(rate), gamma_(gamma)
{
    if (!(gamma > 0))
        throw std::invalid_argument("gamma must be > 0");
}

std::optional<double> ScalarModel::rho() const
{
    if (rate_.family() != RateFamily::constant)
        return std::nullopt;
    return gamma_ / rate_.beta();
}

char const* to_string(Shape shape)
{
    switch (shape)
    {
        case Shape::monotone_decreasing: return "monotone-decreasing";
        case Shape::single_peak: return "single-peak";
        case Shape::plateau_peak: return "plateau-peak";
        case Shape::multimodal: return "multimodal";
    }
    return "unknown";
}

Derivative scalar_rhs(SirState const& state, ScalarModel const& model)
{
    auto const s = state.clamped();
    double const infection = s.x * s.y * model.rate()(s.x, s.y);
    double const recovery = model.gamma() * s.y;
    return {-infection, infection - recovery, recovery};
}

double reproduction_function(SirState const& state, ScalarModel const& model)
{
    auto const s = state.clamped();
    return s.x * model.rate()(s.x, s.y) / model.gamma();
}

ode::VectorField scalar_vector_field(ScalarModel const& model)
{
    return [model](double, std::span<double const> y, std::span<double> dydt) {
        auto const d = scalar_rhs(SirState::from_vector(y), model);
        dydt[0] = d.dx;
        dydt[1] = d.dy;
        dydt[2] = d.dz;
    };
}

ode::EventSpec peak_event(ScalarModel const& model)
{
    return {[model](double, std::span<double const> y) {
                return scalar_rhs(SirState::from_vector(y), model).dy;
            },
            ode::Direction::falling,
            false,
            "peak"};
}

ode::EventSpec extinction_event(double threshold, std::size_t index)
{
    return {[threshold, index](double, std::span<double const> y) { return y[index] - threshold; },
            ode::Direction::falling,
            true,
            "extinction"};
}

ode::Trajectory simulate_scalar(ScalarModel const& model,
                                double x0,
                                double y0,
                                double horizon,
                                ode::StepControl const& control,
                                double extinction_threshold)
{
    return simulate_scalar(model, SirState{x0, y0, 1.0 - x0 - y0}, horizon, control, extinction_threshold);
}

ode::Trajectory simulate_scalar(ScalarModel const& model,
                                SirState const& initial,
                                double horizon,
                                ode::StepControl const& control,
                                double extinction_threshold)
{
    if (!(initial.x >= 0 && initial.y >= 0) || !initial.on_simplex())
        throw std::invalid_argument("initial state must lie on the simplex");
    if (!(horizon > 0))
        throw std::invalid_argument("horizon must be > 0");

    std::vector<ode::EventSpec> const events{peak_event(model),
                                             extinction_event(extinction_threshold)};
    return ode::integrate(
        scalar_vector_field(model), initial.to_vector(), 0.0, horizon, control, events);
}

double motion_invariant(SirState const& state, double rho)
{
    if (!(state.x > 0))
        throw DomainError("invariant undefined at x=0");
    return rho * std::log(state.x) + state.z;
}

double orbit_infected(double x, double eps, double rho)
{
    if (!(x > 0))
        throw DomainError("orbit_infected: x must be > 0");
    return 1.0 - x + rho * std::log(x) - rho * std::log(1.0 - eps);
}

PeakEstimate classical_peak(double eps, double rho)
{
    if (!(rho > 0))
        throw DomainError("classical_peak: rho must be > 0");
    if (!(eps >= 0 && eps < 1))
        throw DomainError("classical_peak: eps must lie in [0, 1)");
    if (rho >= 1.0 - eps)
        return {eps, true};
    return {1.0 - rho + rho * std::log(rho) - rho * std::log(1.0 - eps), false};
}

ShapeReport classify_shape(std::span<double const> times,
                           std::span<double const> values,
                           double value_tol,
                           double plateau_tol)
{
    if (times.size() != values.size())
        throw std::invalid_argument("classify_shape: times and values differ in length");
    if (values.size() < 3)
        throw std::invalid_argument("classify_shape: insufficient data");

    ShapeReport report;
    if (is_flat(values, value_tol))
    {
        // Constant positive level is a plateau; identically zero is the
        // degenerate disease-free run.
        if (values.front() > value_tol && plateau_steps(values, 0, plateau_tol) > 2)
        {
            report.shape = Shape::plateau_peak;
            report.peak_times.push_back(times.front());
            report.peak_values.push_back(values.front());
        }
        return report;
    }

    enum class Trend
    {
        unknown,
        up,
        down
    };
    Trend trend = Trend::unknown;
    std::size_t max_i = 0;
    std::size_t min_i = 0;
    std::vector<std::size_t> peaks;

    for (std::size_t i = 1; i < values.size(); ++i)
    {
        double const v = values[i];
        switch (trend)
        {
            case Trend::unknown:
                if (v > values[max_i])
                    max_i = i;
                if (v < values[min_i])
                    min_i = i;
                if (v - values[min_i] > value_tol)
                {
                    trend = Trend::up;
                    max_i = i;
                }
                else if (values[max_i] - v > value_tol)
                {
                    trend = Trend::down;
                    peaks.push_back(max_i);
                    min_i = i;
                }
                break;
            case Trend::up:
                if (v > values[max_i])
                {
                    max_i = i;
                }
                else if (values[max_i] - v > value_tol)
                {
                    trend = Trend::down;
                    peaks.push_back(max_i);
                    min_i = i;
                }
                break;
            case Trend::down:
                if (v < values[min_i])
                {
                    min_i = i;
                }
                else if (v - values[min_i] > value_tol)
                {
                    trend = Trend::up;
                    max_i = i;
                }
                break;
        }
    }
    // Still rising at the end of the record: the last maximum is a peak.
    if (trend == Trend::up)
        peaks.push_back(max_i);

    for (auto const i : peaks)
    {
        report.peak_times.push_back(times[i]);
        report.peak_values.push_back(values[i]);
    }

    if (peaks.empty() || (peaks.size() == 1 && peaks.front() == 0))
        report.shape = Shape::monotone_decreasing;
    else if (peaks.size() >= 2)
        report.shape = Shape::multimodal;
    else if (plateau_steps(values, peaks.front(), plateau_tol) > 2)
        report.shape = Shape::plateau_peak;
    else
        report.shape = Shape::single_peak;
    return report;
}

ShapeReport classify_shape(ode::Trajectory const& trajectory,
                           double value_tol,
                           double plateau_tol,
                           std::size_t component)
{
    auto const values = trajectory.component(component);
    return classify_shape(trajectory.times, values, value_tol, plateau_tol);
}

}  // namespace sirkit::sir
