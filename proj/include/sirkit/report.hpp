#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sirkit/kernels.hpp"
#include "sirkit/ode.hpp"
#include "sirkit/scenario.hpp"

namespace sirkit::report
{

inline constexpr std::string_view report_schema = "sirkit.report/1";

//! Exit codes shared by the library front end and the CLI.
enum ExitCode : int
{
    exit_ok = 0,
    exit_validation = 1,
    exit_simulation = 2,
    exit_verification = 3,
    exit_boundary = 4
};

//! Everything `simulate` produces, before anything touches the disk.
struct RunArtifacts
{
    nlohmann::ordered_json report;
    std::string trajectory_csv;
    std::string events_csv;
    int exit_code = exit_ok;
};

inline constexpr char const* trajectory_file = "trajectory.csv";
inline constexpr char const* events_file = "events.csv";
inline constexpr char const* report_file = "report.json";
inline constexpr char const* sweep_file = "sweep.csv";
inline constexpr char const* sweep_summary_file = "sweep_summary.json";

RunArtifacts run_scenario(scenario::Scenario const& scenario);

//! Regime analytics of a threshold scenario; throws
//! filippov::BoundaryRegimeError on the excluded boundaries.
nlohmann::ordered_json classify_scenario(scenario::Scenario const& scenario);

struct SweepRow
{
    std::vector<double> axis_values;
    std::string label;  //!< predicted regime or shape
    std::string structure;  //!< regime or shape read off the simulation
    std::optional<double> predicted_peak;
    std::optional<double> simulated_peak;
    std::size_t peak_count = 0;
    std::string status = "ok";

    [[nodiscard]] std::optional<double> discrepancy() const;
};

struct SweepResult
{
    std::vector<std::string> axis_names;
    std::vector<SweepRow> rows;
    nlohmann::ordered_json summary;
};

SweepResult run_sweep(scenario::Scenario const& base,
                      scenario::Grid const& grid,
                      kernels::Execution execution = kernels::Execution::parallel,
                      int workers = 0);

std::string sweep_csv(SweepResult const& result);

//! "%.17g"; NaN and infinities become empty cells.
std::string format_number(double v);

//! Write `contents` to a sibling temporary file, then rename over `path`.
void write_atomically(std::filesystem::path const& path, std::string const& contents);

}  // namespace sirkit::report
