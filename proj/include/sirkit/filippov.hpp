#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "sirkit/ode.hpp"
#include "sirkit/sir.hpp"

namespace sirkit::filippov
{

//! Lockdown feedback: contact rate beta below the infection threshold k,
//! beta_bar < beta at or above it.
struct ThresholdPolicy
{
    double beta = 0.0;
    double beta_bar = 0.0;
    double k = 0.0;
    double gamma = 0.0;

    void validate() const;
    [[nodiscard]] double rho() const { return gamma / beta; }
    [[nodiscard]] double rho_bar() const { return gamma / beta_bar; }
};

//! The segment {(x, level) : x_low <= x <= x_high} where both vector
//! fields point at y = level.
struct SlidingManifold
{
    double x_low = 0.0;
    double x_high = 0.0;
    double level = 0.0;

    [[nodiscard]] bool contains(double x) const { return x >= x_low && x <= x_high; }
};

SlidingManifold sliding_manifold(ThresholdPolicy const& policy);

double threshold_rate(double y, ThresholdPolicy const& policy);

struct EntryLevel
{
    double value = 0.0;
    //! rho_bar == 1 - eps exactly; the eps branch was used.
    bool boundary = false;
};

//! Infected level of the beta-orbit at x = rho_bar, or eps when
//! rho_bar lies beyond the initial abscissa.
EntryLevel entry_level(double eps, double rho, double rho_bar);

enum class Regime
{
    A,  //!< threshold never reached
    B,  //!< sliding plateau at y = k
    C   //!< excursion above k under the controlled rate
};

[[nodiscard]] char const* to_string(Regime regime);

struct RegimeReport
{
    Regime regime = Regime::A;
    double predicted_peak = 0.0;
    std::optional<double> t_star;
    std::optional<double> t_star_star;
    std::optional<double> crossing_x;
    std::optional<double> sliding_duration;

    // Quantities the classification was decided on.
    double classical_peak = 0.0;
    double entry_level = 0.0;
};

//! k within 1e-12 of M(eps, rho) or m(eps, rho, rho_bar).
class BoundaryRegimeError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class NoSlidingError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class ModeChatterError : public std::runtime_error
{
  public:
    ModeChatterError(std::string const& what, ode::Trajectory partial);
    [[nodiscard]] ode::Trajectory const& partial() const { return partial_; }

  private:
    ode::Trajectory partial_;
};

RegimeReport classify_regime(double eps, ThresholdPolicy const& policy);

//! Abscissa where the beta-orbit from (1 - eps, eps) first reaches y = k,
//! on the branch x in (rho, 1 - eps].
double crossing_abscissa(double eps, double rho, double k);

//! Peak of the controlled run in regime C.
double controlled_peak(double eps, ThresholdPolicy const& policy);

//! Time spent on the sliding manifold in regime B.
double sliding_duration(double eps, ThresholdPolicy const& policy);

//! Time for the beta-orbit from (1 - eps, eps) to reach abscissa x_target,
//! by quadrature of dt = -dx / (beta x y(x)). Requires rho < x_target <= 1 - eps.
double orbit_travel_time(double eps, double beta, double gamma, double x_target);

enum class Mode
{
    free_beta,
    free_beta_bar,
    sliding
};

[[nodiscard]] char const* to_string(Mode mode);

struct Segment
{
    Mode mode = Mode::free_beta;
    double t_begin = 0.0;
    double t_end = 0.0;
};

struct ThresholdRun
{
    ode::Trajectory trajectory;
    std::vector<Segment> segments;

    [[nodiscard]] bool has_sliding() const;
    [[nodiscard]] bool exceeds_threshold(double k) const;
    [[nodiscard]] double max_infected() const;
};

struct ThresholdOptions
{
    double extinction_threshold = sir::default_extinction_threshold;
    int max_mode_switches = 16;
    //! Spacing of the stored points along a sliding segment.
    double sliding_sample_step = 0.05;
};

//! Regime read off a simulated run: A never touches y = k, C rises above it,
//! B slides without exceeding it.
Regime observed_regime(ThresholdRun const& run, double k);

//! Filippov solution from (1 - eps, eps, 0) by explicit mode switching.
ThresholdRun simulate_threshold(ThresholdPolicy const& policy,
                                double eps,
                                double horizon,
                                ode::StepControl const& control,
                                ThresholdOptions const& options = {});

//! Same, from an arbitrary simplex state.
ThresholdRun simulate_threshold(ThresholdPolicy const& policy,
                                sir::SirState const& initial,
                                double horizon,
                                ode::StepControl const& control,
                                ThresholdOptions const& options = {});

}  // namespace sirkit::filippov
