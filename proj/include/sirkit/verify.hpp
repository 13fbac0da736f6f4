#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sirkit/kernels.hpp"
#include "sirkit/scenario.hpp"

namespace sirkit::verify
{

struct CheckResult
{
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct VerifyOptions
{
    //! Multiplies abs_tol and rel_tol of every integration, and the drift
    //! thresholds that scale with them.
    double tolerance_scale = 1.0;
    //! Replaces the computed fixed point in the epsilon-bar check.
    std::optional<double> epsilon_bar_override;
    kernels::Execution execution = kernels::Execution::parallel;
    int workers = 0;
};

//! Threshold template (beta 2, beta_bar 0.38, k 0.35, gamma 0.4, eps 0.01).
scenario::Scenario threshold_template();

//! eps x beta x beta_bar/beta x k grid used for the peak-consistency checks.
scenario::Grid threshold_consistency_grid();

std::vector<CheckResult> run_verification(VerifyOptions const& options = {});

[[nodiscard]] bool all_passed(std::vector<CheckResult> const& results);

}  // namespace sirkit::verify
