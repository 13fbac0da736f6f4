#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sirkit/filippov.hpp"
#include "sirkit/report.hpp"
#include "sirkit/scenario.hpp"
#include "sirkit/verify.hpp"

namespace fs = std::filesystem;
using namespace sirkit;

namespace
{
struct Common
{
    std::string scenario_path;
    std::string grid_path;
    std::string out_dir = ".";
    std::string format = "csv";
    int workers = 0;
    bool seedless = false;
    double tol_scale = 1.0;
};

void prepare(fs::path const& dir)
{
    fs::create_directories(dir);
}

int cmd_simulate(Common const& c)
{
    auto const s = scenario::load_scenario(c.scenario_path);
    auto const run = report::run_scenario(s);
    fs::path const dir = c.out_dir;
    prepare(dir);
    report::write_atomically(dir / report::trajectory_file, run.trajectory_csv);
    report::write_atomically(dir / report::events_file, run.events_csv);
    report::write_atomically(dir / report::report_file, run.report.dump(2) + "\n");
    if (run.exit_code != report::exit_ok)
        std::cerr << "simulation failed: " << run.report.value("error", std::string{})
                  << " (partial output written)\n";
    return run.exit_code;
}

int cmd_classify(Common const& c)
{
    auto const s = scenario::load_scenario(c.scenario_path);
    try
    {
        auto const out = report::classify_scenario(s);
        std::cout << out.dump(2) << "\n";
        return report::exit_ok;
    }
    catch (filippov::BoundaryRegimeError const& e)
    {
        std::cout << "{\n  \"regime\": \"boundary\"\n}\n";
        std::cerr << e.what() << "\n";
        return report::exit_boundary;
    }
}

int cmd_sweep(Common const& c)
{
    auto const base = scenario::load_scenario(c.scenario_path);
    auto const grid = scenario::load_grid(c.grid_path);
    auto const result = report::run_sweep(base, grid, kernels::Execution::parallel, c.workers);
    fs::path const dir = c.out_dir;
    prepare(dir);
    report::write_atomically(dir / report::sweep_file, report::sweep_csv(result));
    report::write_atomically(dir / report::sweep_summary_file, result.summary.dump(2) + "\n");
    std::cout << result.rows.size() << " cells written to " << (dir / report::sweep_file).string() << "\n";
    return report::exit_ok;
}

int cmd_verify(Common const& c)
{
    verify::VerifyOptions options;
    options.tolerance_scale = c.tol_scale;
    options.workers = c.workers;
    auto const results = verify::run_verification(options);
    for (auto const& r : results)
    {
        std::printf("[%s] %-38s measured=%-12.4g threshold=%-10.3g %s\n", r.passed ? "PASS" : "FAIL",
                    r.name.c_str(), r.measured, r.threshold, r.detail.c_str());
    }
    bool const ok = verify::all_passed(results);
    std::printf("%s\n", ok ? "all checks passed" : "verification FAILED");
    return ok ? report::exit_ok : report::exit_verification;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"SIR epidemic simulator with threshold control and metapopulation networks"};
    app.require_subcommand(1);
    Common c;
    app.add_option("--workers", c.workers, "worker threads for sweeps (0: OpenMP default)")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--seedless", c.seedless, "accepted for compatibility; runs are deterministic");

    auto* simulate = app.add_subcommand("simulate", "integrate one scenario");
    simulate->add_option("--scenario", c.scenario_path)->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", c.out_dir, "output directory");
    simulate->add_option("--format", c.format)->check(CLI::IsMember({"csv"}));

    auto* classify = app.add_subcommand("classify", "regime analytics of a threshold scenario");
    classify->add_option("--scenario", c.scenario_path)->required()->check(CLI::ExistingFile);

    auto* sweep = app.add_subcommand("sweep", "run a scenario over a parameter grid");
    sweep->add_option("--scenario", c.scenario_path)->required()->check(CLI::ExistingFile);
    sweep->add_option("--grid", c.grid_path)->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", c.out_dir, "output directory");
    sweep->add_option("--format", c.format)->check(CLI::IsMember({"csv"}));

    auto* verify = app.add_subcommand("verify", "run the invariant suite");
    verify->add_option("--tol-scale", c.tol_scale, "multiply integrator tolerances")
        ->check(CLI::PositiveNumber);

    for (auto* sub : {simulate, sweep, verify})
    {
        sub->add_option("--workers", c.workers)->check(CLI::NonNegativeNumber);
        sub->add_flag("--seedless", c.seedless);
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e);
        return code == 0 ? 0 : report::exit_validation;
    }

    try
    {
        if (*simulate)
            return cmd_simulate(c);
        if (*classify)
            return cmd_classify(c);
        if (*sweep)
            return cmd_sweep(c);
        return cmd_verify(c);
    }
    catch (scenario::ScenarioError const& e)
    {
        std::cerr << "invalid input: " << e.what() << "\n";
        return report::exit_validation;
    }
    catch (std::invalid_argument const& e)
    {
        std::cerr << "invalid input: " << e.what() << "\n";
        return report::exit_validation;
    }
    catch (DomainError const& e)
    {
        std::cerr << "invalid input: " << e.what() << "\n";
        return report::exit_validation;
    }
    catch (std::exception const& e)
    {
        std::cerr << "simulation failed: " << e.what() << "\n";
        return report::exit_simulation;
    }
}
