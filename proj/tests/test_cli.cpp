#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace
{
std::string const cli = SIRKIT_CLI;
std::string const scenarios = SIRKIT_SCENARIOS;

int run(std::string const& args)
{
    int const status = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(fs::path const& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(std::string const& name)
{
    auto const dir = fs::temp_directory_path() / ("sirkit_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

fs::path write(fs::path const& dir, std::string const& name, std::string const& text)
{
    fs::create_directories(dir);
    std::ofstream(dir / name) << text;
    return dir / name;
}
}  // namespace

TEST(Cli, SimulateWritesArtifactsDeterministically)
{
    auto const a = scratch("sim_a");
    auto const b = scratch("sim_b");
    ASSERT_EQ(run("simulate --scenario " + scenarios + "/threshold_sliding.json --out " + a.string()), 0);
    ASSERT_EQ(run("simulate --seedless --scenario " + scenarios + "/threshold_sliding.json --out " + b.string()), 0);
    for (auto const* f : {"trajectory.csv", "events.csv", "report.json"})
    {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    EXPECT_NE(slurp(a / "report.json").find("\"regime\": \"B\""), std::string::npos);
}

TEST(Cli, ClassifyExitCodes)
{
    EXPECT_EQ(run("classify --scenario " + scenarios + "/threshold_excursion.json"), 0);
    auto const dir = scratch("classify");
    auto const boundary = write(dir, "boundary.json", R"({"schema": "sirkit.scenario/1", "model": "threshold",
      "parameters": {"beta": 2, "beta_bar": 1, "gamma": 0.4, "k": 0.48012248468388025, "epsilon": 0.01}})");
    EXPECT_EQ(run("classify --scenario " + boundary.string()), 4);
    EXPECT_EQ(run("classify --scenario " + scenarios + "/classical.json"), 1);
}

TEST(Cli, ValidationErrors)
{
    auto const dir = scratch("invalid");
    auto const typo = write(dir, "typo.json", R"({"schema": "sirkit.scenario/1", "model": "scalar",
      "parameters": {"beta": 2, "gama": 0.4, "x0": 0.99, "y0": 0.01}})");
    EXPECT_EQ(run("simulate --scenario " + typo.string() + " --out " + dir.string()), 1);
    EXPECT_EQ(run("simulate --scenario " + (dir / "missing.json").string()), 1);
    EXPECT_EQ(run("simulate --scenario " + scenarios + "/classical.json --format parquet"), 1);
    EXPECT_EQ(run("bogus"), 1);
}

TEST(Cli, SimulationFailureExitCode)
{
    auto const dir = scratch("failure");
    auto const tiny = write(dir, "tiny.json", R"({"schema": "sirkit.scenario/1", "model": "scalar",
      "control": {"max_steps": 5, "max_step": 0.01},
      "parameters": {"beta": 2, "gamma": 0.4, "x0": 0.99, "y0": 0.01}})");
    EXPECT_EQ(run("simulate --scenario " + tiny.string() + " --out " + (dir / "out").string()), 2);
    EXPECT_NE(slurp(dir / "out" / "report.json").find("\"partial\": true"), std::string::npos);
}

TEST(Cli, SweepAndEmptyGrid)
{
    auto const dir = scratch("sweep");
    ASSERT_EQ(run("sweep --workers 2 --scenario " + scenarios + "/threshold_sliding.json --grid " + scenarios
                  + "/threshold_grid.json --out " + dir.string()),
              0);
    auto const table = slurp(dir / "sweep.csv");
    EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 37);
    EXPECT_TRUE(fs::exists(dir / "sweep_summary.json"));

    auto const empty = write(dir, "empty.json", R"({"schema": "sirkit.grid/1", "axes": []})");
    ASSERT_EQ(run("sweep --scenario " + scenarios + "/threshold_sliding.json --grid " + empty.string() + " --out "
                  + (dir / "empty").string()),
              0);
    auto const header = slurp(dir / "empty" / "sweep.csv");
    EXPECT_EQ(std::count(header.begin(), header.end(), '\n'), 1);
}

TEST(Cli, VerifyWithLooseTolerances)
{
    EXPECT_EQ(run("verify --tol-scale 100"), 0);
}
