#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sirkit/filippov.hpp"
#include "sirkit/kernels.hpp"
#include "sirkit/ode.hpp"
#include "sirkit/sir.hpp"

namespace sirkit::scenario
{

inline constexpr std::string_view scenario_schema = "sirkit.scenario/1";
inline constexpr std::string_view grid_schema = "sirkit.grid/1";

//! Parse or validation failure; `field` is a JSON path such as
//! "parameters.beta" (empty for document-level problems).
class ScenarioError : public std::runtime_error
{
  public:
    ScenarioError(std::string field, std::string const& message);
    [[nodiscard]] std::string const& field() const { return field_; }

  private:
    std::string field_;
};

enum class ModelKind
{
    scalar,
    threshold,
    network
};

[[nodiscard]] char const* to_string(ModelKind kind);

struct ScalarParams
{
    double beta = 2.0;
    double gamma = 0.4;
    sir::RateFamily family = sir::RateFamily::constant;
    double exponent = 0.0;
    double x0 = 0.99;
    double y0 = 0.01;

    [[nodiscard]] sir::ScalarModel model() const;
};

struct ThresholdParams
{
    filippov::ThresholdPolicy policy{2.0, 0.38, 0.35, 0.4};
    double epsilon = 0.01;
};

struct NetworkParams
{
    double beta = 1.0;
    double gamma = 1.0;
    kernels::Matrix weights;
    std::vector<double> x0;
    std::vector<double> y0;
};

struct OutputOptions
{
    double value_tol = sir::default_value_tol;
    double plateau_tol = sir::default_plateau_tol;
};

struct Scenario
{
    ModelKind kind = ModelKind::scalar;
    std::variant<ScalarParams, ThresholdParams, NetworkParams> params;
    double horizon = 100.0;
    ode::StepControl control{};
    double extinction_threshold = sir::default_extinction_threshold;
    OutputOptions output{};

    //! Throws ScenarioError naming the offending field.
    void validate() const;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(std::filesystem::path const& path);
nlohmann::ordered_json to_json(Scenario const& scenario);

//! Cartesian parameter grid; the first axis varies slowest.
struct Grid
{
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    std::size_t max_cells = 10'000;

    [[nodiscard]] std::size_t cell_count() const;
    //! Axis values of cell `index`, one per axis.
    [[nodiscard]] std::vector<double> cell(std::size_t index) const;
};

Grid parse_grid(std::string_view text);
Grid load_grid(std::filesystem::path const& path);

//! Axis names accepted for a model kind.
std::vector<std::string> grid_axes(ModelKind kind);

//! Copy of base with the axis values applied.
Scenario apply_cell(Scenario const& base, Grid const& grid, std::vector<double> const& values);

std::string read_file(std::filesystem::path const& path);

}  // namespace sirkit::scenario
