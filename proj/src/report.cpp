#include "sirkit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "sirkit/filippov.hpp"
#include "sirkit/network.hpp"
#include "sirkit/sir.hpp"
#include "sirkit/sweep.hpp"

namespace sirkit::report
{
namespace
{
using json = nlohmann::ordered_json;
using scenario::ModelKind;
using scenario::Scenario;

std::string quote(std::string const& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
            out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

std::string csv_line(std::vector<std::string> const& cells)
{
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i)
    {
        if (i)
            out += ',';
        out += quote(cells[i]);
    }
    return out + "\n";
}

json optional_number(std::optional<double> v)
{
    return v ? json(*v) : json(nullptr);
}

std::vector<std::string> state_columns(ModelKind kind, std::size_t nodes)
{
    if (kind != ModelKind::network)
        return {"x", "y", "z"};
    std::vector<std::string> cols;
    for (char const* prefix : {"x", "y", "z"})
        for (std::size_t i = 0; i < nodes; ++i)
            cols.push_back(prefix + std::to_string(i));
    return cols;
}

std::string trajectory_csv(ode::Trajectory const& traj,
                           std::vector<std::string> const& columns,
                           std::vector<double> const& reproduction)
{
    std::vector<std::string> header{"t"};
    header.insert(header.end(), columns.begin(), columns.end());
    header.push_back("R");
    std::string out = csv_line(header);
    for (std::size_t i = 0; i < traj.size(); ++i)
    {
        std::vector<std::string> row{format_number(traj.times[i])};
        for (double v : traj.states[i])
            row.push_back(format_number(v));
        row.push_back(i < reproduction.size() ? format_number(reproduction[i]) : "");
        out += csv_line(row);
    }
    return out;
}

std::string events_csv(ode::Trajectory const& traj, std::vector<std::string> const& columns)
{
    std::vector<std::string> header{"label", "t"};
    header.insert(header.end(), columns.begin(), columns.end());
    std::string out = csv_line(header);
    auto events = traj.events;
    std::stable_sort(events.begin(), events.end(), [](auto const& a, auto const& b) {
        return a.time < b.time;
    });
    for (auto const& e : events)
    {
        std::vector<std::string> row{e.label, format_number(e.time)};
        for (double v : e.state)
            row.push_back(format_number(v));
        out += csv_line(row);
    }
    return out;
}

double max_component(ode::Trajectory const& traj, std::size_t index)
{
    double best = -std::numeric_limits<double>::infinity();
    for (auto const& s : traj.states)
        best = std::max(best, s[index]);
    return best;
}

// max over stored times and nodes of |x_i + y_i + z_i - 1|
double simplex_drift(ode::Trajectory const& traj, std::size_t nodes)
{
    double drift = 0.0;
    for (auto const& s : traj.states)
        for (std::size_t i = 0; i < nodes; ++i)
            drift = std::max(drift, std::abs(s[i] + s[nodes + i] + s[2 * nodes + i] - 1.0));
    return drift;
}

json shape_json(sir::ShapeReport const& shape)
{
    return {{"shape", sir::to_string(shape.shape)},
            {"peak_times", shape.peak_times},
            {"peak_values", shape.peak_values}};
}

json defaults_json(Scenario const& s)
{
    filippov::ThresholdOptions const threshold{};
    return {{"horizon", s.horizon},
            {"extinction_threshold", s.extinction_threshold},
            {"event_tol", ode::default_event_tol},
            {"value_tol", s.output.value_tol},
            {"plateau_tol", s.output.plateau_tol},
            {"control",
             {{"initial_step", s.control.initial_step},
              {"max_step", s.control.max_step},
              {"abs_tol", s.control.abs_tol},
              {"rel_tol", s.control.rel_tol},
              {"max_steps", s.control.max_steps},
              {"scheme", s.control.scheme == ode::Scheme::rk4 ? "rk4" : "dopri5"}}},
            {"max_mode_switches", threshold.max_mode_switches},
            {"sliding_sample_step", threshold.sliding_sample_step}};
}

json regime_json(filippov::RegimeReport const& r)
{
    return {{"regime", filippov::to_string(r.regime)},
            {"M", r.classical_peak},
            {"m", r.entry_level},
            {"predicted_peak", r.predicted_peak},
            {"crossing_x", optional_number(r.crossing_x)},
            {"t_star", optional_number(r.t_star)},
            {"t_star_star", optional_number(r.t_star_star)},
            {"sliding_duration", optional_number(r.sliding_duration)}};
}

std::optional<double> seeded_epsilon(double x0, double y0)
{
    if (std::abs(x0 + y0 - 1.0) <= 1e-12 && y0 > 0)
        return y0;
    return std::nullopt;
}

bool is_lemma_setup(scenario::NetworkParams const& p)
{
    return p.weights.rows() == 2 && (p.weights.array() == 1.0).all() && p.beta == 1.0
           && p.gamma == 1.0 && p.x0[1] == 1.0 && p.y0[1] == 0.0
           && std::abs(p.x0[0] + p.y0[0] - 1.0) <= 1e-12 && p.y0[0] > 0;
}

network::NetworkModel make_network(scenario::NetworkParams const& p)
{
    return {network::ContactGraph(p.weights), p.beta, p.gamma};
}

network::NetworkState network_initial(scenario::NetworkParams const& p)
{
    network::NetworkState s{p.x0, p.y0, std::vector<double>(p.x0.size())};
    for (std::size_t i = 0; i < s.x.size(); ++i)
        s.z[i] = 1.0 - s.x[i] - s.y[i];
    return s;
}

//---------------------------------------------------------------------------//

void run_scalar(Scenario const& s, RunArtifacts& out)
{
    auto const& p = std::get<scenario::ScalarParams>(s.params);
    auto const model = p.model();
    sir::SirState const initial{p.x0, p.y0, 1.0 - p.x0 - p.y0};
    auto& analytics = out.report["analytics"];
    analytics["R0"] = sir::reproduction_function(initial, model);
    analytics["rho"] = optional_number(model.rho());

    std::optional<double> predicted;
    auto const eps = seeded_epsilon(p.x0, p.y0);
    if (model.rho() && eps)
    {
        auto const peak = sir::classical_peak(*eps, *model.rho());
        analytics["M"] = peak.value;
        analytics["peak_at_start"] = peak.at_start;
        predicted = peak.value;
    }

    auto const traj = sir::simulate_scalar(model, p.x0, p.y0, s.horizon, s.control, s.extinction_threshold);
    std::vector<double> reproduction;
    for (auto const& st : traj.states)
        reproduction.push_back(sir::reproduction_function(sir::SirState::from_vector(st), model));

    double const simulated = max_component(traj, 1);
    analytics["simulated_peak"] = simulated;
    analytics["predicted_peak"] = optional_number(predicted);
    analytics["peak_discrepancy"] = predicted ? json(std::abs(*predicted - simulated)) : json(nullptr);
    out.report["shape"] = shape_json(sir::classify_shape(traj, s.output.value_tol, s.output.plateau_tol));

    json drift{{"simplex", simplex_drift(traj, 1)}};
    if (model.rho() && p.x0 > 0)
    {
        double const gamma0 = sir::motion_invariant(initial, *model.rho());
        double worst = 0.0;
        for (auto const& st : traj.states)
            worst = std::max(worst,
                             std::abs(sir::motion_invariant(sir::SirState::from_vector(st), *model.rho()) - gamma0));
        drift["motion_invariant"] = worst;
    }
    out.report["drift"] = drift;
    out.trajectory_csv = trajectory_csv(traj, state_columns(s.kind, 1), reproduction);
    out.events_csv = events_csv(traj, state_columns(s.kind, 1));
}

void run_threshold(Scenario const& s, RunArtifacts& out)
{
    auto const& p = std::get<scenario::ThresholdParams>(s.params);
    auto const& policy = p.policy;
    auto& analytics = out.report["analytics"];
    analytics["rho"] = policy.rho();
    analytics["rho_bar"] = policy.rho_bar();
    analytics["R0"] = (1.0 - p.epsilon) * policy.beta / policy.gamma;

    std::optional<filippov::RegimeReport> predicted;
    try
    {
        predicted = filippov::classify_regime(p.epsilon, policy);
        out.report["regime"] = regime_json(*predicted);
    }
    catch (filippov::BoundaryRegimeError const& e)
    {
        out.report["regime"] = {{"regime", "boundary"}, {"detail", e.what()}};
    }
    catch (DomainError const& e)
    {
        out.report["regime"] = {{"regime", "undefined"}, {"detail", e.what()}};
    }

    filippov::ThresholdOptions options;
    options.extinction_threshold = s.extinction_threshold;
    auto const run = filippov::simulate_threshold(policy, p.epsilon, s.horizon, s.control, options);

    // R = x f / gamma, with the Filippov rate gamma / x on sliding segments.
    std::vector<double> reproduction;
    std::size_t seg = 0;
    for (std::size_t i = 0; i < run.trajectory.size(); ++i)
    {
        double const t = run.trajectory.times[i];
        while (seg + 1 < run.segments.size() && t >= run.segments[seg + 1].t_begin)
            ++seg;
        auto const st = sir::SirState::from_vector(run.trajectory.states[i]);
        if (!run.segments.empty() && run.segments[seg].mode == filippov::Mode::sliding)
            reproduction.push_back(1.0);
        else if (!run.segments.empty() && run.segments[seg].mode == filippov::Mode::free_beta_bar)
            reproduction.push_back(st.x * policy.beta_bar / policy.gamma);
        else
            reproduction.push_back(st.x * policy.beta / policy.gamma);
    }

    double const simulated = run.max_infected();
    auto const observed = filippov::observed_regime(run, policy.k);
    analytics["simulated_peak"] = simulated;
    analytics["observed_regime"] = filippov::to_string(observed);
    if (predicted)
    {
        analytics["predicted_peak"] = predicted->predicted_peak;
        analytics["peak_discrepancy"] = std::abs(predicted->predicted_peak - simulated);
        analytics["regime_consistent"] = predicted->regime == observed;
    }
    json sliding = json::array();
    json segments = json::array();
    for (auto const& segment : run.segments)
    {
        segments.push_back({{"mode", filippov::to_string(segment.mode)},
                            {"t_begin", segment.t_begin},
                            {"t_end", segment.t_end}});
        if (segment.mode == filippov::Mode::sliding)
            sliding.push_back({{"t_begin", segment.t_begin},
                               {"t_end", segment.t_end},
                               {"duration", segment.t_end - segment.t_begin}});
    }
    analytics["segments"] = segments;
    analytics["sliding_intervals"] = sliding;
    out.report["shape"] = shape_json(sir::classify_shape(run.trajectory, s.output.value_tol, s.output.plateau_tol));
    out.report["drift"] = {{"simplex", simplex_drift(run.trajectory, 1)}};
    out.trajectory_csv = trajectory_csv(run.trajectory, state_columns(s.kind, 1), reproduction);
    out.events_csv = events_csv(run.trajectory, state_columns(s.kind, 1));
}

void run_network(Scenario const& s, RunArtifacts& out)
{
    auto const& p = std::get<scenario::NetworkParams>(s.params);
    auto const model = make_network(p);
    auto const initial = network_initial(p);
    std::size_t const n = initial.size();

    auto const spectrum = network::spectral_radius(initial.x, model.graph.weights(), model.beta / model.gamma);
    auto& analytics = out.report["analytics"];
    analytics["R0"] = spectrum.R;
    analytics["lambda_max0"] = spectrum.lambda_max;
    analytics["leading_eigenvector0"] = spectrum.v;
    analytics["strongly_connected"] = model.graph.strongly_connected();

    auto const run = network::simulate_network(model, initial, s.horizon, s.control, s.extinction_threshold);

    double max_increase = 0.0;
    for (std::size_t i = 1; i < run.reproduction.size(); ++i)
        max_increase = std::max(max_increase, run.reproduction[i] - run.reproduction[i - 1]);
    analytics["R_max_increase"] = max_increase;

    json nodes = json::array();
    for (std::size_t i = 0; i < n; ++i)
    {
        auto const mm = network::detect_multimodality(run.trajectory, n, i, s.output.value_tol);
        nodes.push_back({{"node", i},
                         {"peaks", mm.peak_count()},
                         {"multimodal", mm.multimodal()},
                         {"peak_times", mm.peak_times},
                         {"peak_values", mm.peak_values}});
    }
    out.report["nodes"] = nodes;

    // aggregate infected curve
    std::vector<double> total(run.trajectory.size(), 0.0);
    for (std::size_t k = 0; k < run.trajectory.size(); ++k)
        for (std::size_t i = 0; i < n; ++i)
            total[k] += run.trajectory.states[k][n + i];
    out.report["aggregate_shape"] =
        shape_json(sir::classify_shape(run.trajectory.times, total, s.output.value_tol, s.output.plateau_tol));

    json drift{{"simplex", simplex_drift(run.trajectory, n)}};
    if (is_lemma_setup(p))
    {
        double const eps = p.y0[0];
        auto const invariants = network::aggregate_invariants(run.trajectory, model);
        drift["constant_motion"] = invariants.constant_motion;
        drift["ratio"] = invariants.ratio;
        json lemma{{"epsilon", eps},
                   {"epsilon_bar", network::epsilon_bar()},
                   {"predicted_ybar_at_peak", 1.0 - std::log(2.0 - eps)},
                   {"predicted_x2_at_peak", 1.0 / (2.0 - eps)}};
        auto const peaks = run.trajectory.events_labelled("aggregate-peak");
        if (!peaks.empty())
        {
            auto const& st = peaks.front().state;
            lemma["aggregate_peak_time"] = peaks.front().time;
            lemma["ybar_at_peak"] = st[2] + st[3];
            lemma["x2_at_peak"] = st[1];
        }
        out.report["lemma"] = lemma;
    }
    out.report["drift"] = drift;
    out.trajectory_csv = trajectory_csv(run.trajectory, state_columns(s.kind, n), run.reproduction);
    out.events_csv = events_csv(run.trajectory, state_columns(s.kind, n));
}

//---------------------------------------------------------------------------//

SweepRow sweep_threshold(Scenario const& s)
{
    auto const& p = std::get<scenario::ThresholdParams>(s.params);
    SweepRow row;
    std::optional<filippov::RegimeReport> predicted;
    try
    {
        predicted = filippov::classify_regime(p.epsilon, p.policy);
        row.label = filippov::to_string(predicted->regime);
        row.predicted_peak = predicted->predicted_peak;
    }
    catch (filippov::BoundaryRegimeError const&)
    {
        row.label = "boundary";
    }
    catch (DomainError const&)
    {
        row.label = "undefined";
    }
    filippov::ThresholdOptions options;
    options.extinction_threshold = s.extinction_threshold;
    auto const run = filippov::simulate_threshold(p.policy, p.epsilon, s.horizon, s.control, options);
    row.structure = filippov::to_string(filippov::observed_regime(run, p.policy.k));
    row.simulated_peak = run.max_infected();
    row.peak_count = sir::classify_shape(run.trajectory, s.output.value_tol, s.output.plateau_tol).peak_times.size();
    return row;
}

SweepRow sweep_scalar(Scenario const& s)
{
    auto const& p = std::get<scenario::ScalarParams>(s.params);
    auto const model = p.model();
    SweepRow row;
    double const r0 = sir::reproduction_function({p.x0, p.y0, 1.0 - p.x0 - p.y0}, model);
    row.label = r0 > 1.0 && p.y0 > 0 ? "single-peak" : "monotone-decreasing";
    auto const eps = seeded_epsilon(p.x0, p.y0);
    if (model.rho() && eps)
        row.predicted_peak = sir::classical_peak(*eps, *model.rho()).value;
    auto const traj = sir::simulate_scalar(model, p.x0, p.y0, s.horizon, s.control, s.extinction_threshold);
    auto const shape = sir::classify_shape(traj, s.output.value_tol, s.output.plateau_tol);
    row.structure = sir::to_string(shape.shape);
    row.simulated_peak = max_component(traj, 1);
    row.peak_count = shape.peak_times.size();
    return row;
}

SweepRow sweep_network(Scenario const& s)
{
    auto const& p = std::get<scenario::NetworkParams>(s.params);
    auto const model = make_network(p);
    auto const initial = network_initial(p);
    std::size_t const n = initial.size();
    auto const run = network::simulate_network(model, initial, s.horizon, s.control, s.extinction_threshold);
    auto const mm = network::detect_multimodality(run.trajectory, n, 0, s.output.value_tol);
    SweepRow row;
    row.label = "node0";
    row.structure = mm.multimodal() ? "multimodal" : "unimodal";
    row.simulated_peak = max_component(run.trajectory, n);
    row.peak_count = mm.peak_count();
    return row;
}
}  // namespace

std::string format_number(double v)
{
    if (!std::isfinite(v))
        return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_atomically(std::filesystem::path const& path, std::string const& contents)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os)
            throw std::runtime_error("cannot write " + tmp.string());
        os << contents;
        if (!os)
            throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

RunArtifacts run_scenario(Scenario const& s)
{
    s.validate();
    RunArtifacts out;
    out.report["schema"] = report_schema;
    out.report["scenario"] = scenario::to_json(s);
    out.report["files"] = {{"trajectory", trajectory_file}, {"events", events_file}};
    out.report["defaults"] = defaults_json(s);
    out.report["status"] = "ok";

    auto const fail = [&](std::string const& what, ode::Trajectory const& partial) {
        out.exit_code = exit_simulation;
        out.report["status"] = "failed";
        out.report["error"] = what;
        out.report["partial"] = true;
        std::size_t const nodes = s.kind == ModelKind::network
                                      ? std::get<scenario::NetworkParams>(s.params).x0.size()
                                      : 1;
        out.trajectory_csv = trajectory_csv(partial, state_columns(s.kind, nodes), {});
        out.events_csv = events_csv(partial, state_columns(s.kind, nodes));
    };

    try
    {
        switch (s.kind)
        {
            case ModelKind::scalar: run_scalar(s, out); break;
            case ModelKind::threshold: run_threshold(s, out); break;
            case ModelKind::network: run_network(s, out); break;
        }
    }
    catch (ode::IntegrationError const& e)
    {
        fail(e.what(), e.partial());
    }
    catch (filippov::ModeChatterError const& e)
    {
        fail(e.what(), e.partial());
    }
    catch (network::SpectralError const& e)
    {
        fail(e.what(), {});
    }
    return out;
}

nlohmann::ordered_json classify_scenario(Scenario const& s)
{
    if (s.kind != ModelKind::threshold)
        throw scenario::ScenarioError("model", "classify needs a threshold scenario");
    auto const& p = std::get<scenario::ThresholdParams>(s.params);
    json out;
    out["schema"] = report_schema;
    out["scenario"] = scenario::to_json(s);
    out["rho"] = p.policy.rho();
    out["rho_bar"] = p.policy.rho_bar();
    auto const manifold = filippov::sliding_manifold(p.policy);
    out["sliding_manifold"] = {{"x_low", manifold.x_low}, {"x_high", manifold.x_high}, {"level", manifold.level}};
    out["regime"] = regime_json(filippov::classify_regime(p.epsilon, p.policy));
    return out;
}

std::optional<double> SweepRow::discrepancy() const
{
    if (predicted_peak && simulated_peak)
        return std::abs(*predicted_peak - *simulated_peak);
    return std::nullopt;
}

SweepResult run_sweep(Scenario const& base, scenario::Grid const& grid, kernels::Execution execution, int workers)
{
    SweepResult result;
    for (auto const& [name, values] : grid.axes)
        result.axis_names.push_back(name);

    std::size_t const count = grid.cell_count();
    auto outcomes = sweep::map_cells(
        count,
        [&](std::size_t i) {
            auto const values = grid.cell(i);
            auto const cell = scenario::apply_cell(base, grid, values);
            switch (cell.kind)
            {
                case ModelKind::scalar: return sweep_scalar(cell);
                case ModelKind::threshold: return sweep_threshold(cell);
                case ModelKind::network: return sweep_network(cell);
            }
            return SweepRow{};
        },
        execution,
        workers);

    double max_discrepancy = 0.0;
    std::size_t consistent = 0;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < count; ++i)
    {
        SweepRow row;
        if (outcomes[i].ok())
        {
            row = std::move(*outcomes[i].value);
        }
        else
        {
            row.status = "error: " + outcomes[i].error;
            ++failed;
        }
        row.axis_values = grid.cell(i);
        if (auto d = row.discrepancy())
            max_discrepancy = std::max(max_discrepancy, *d);
        if (row.status == "ok" && row.label == row.structure)
            ++consistent;
        result.rows.push_back(std::move(row));
    }

    json summary;
    summary["schema"] = "sirkit.sweep/1";
    summary["model"] = scenario::to_string(base.kind);
    summary["cells"] = count;
    summary["failed"] = failed;
    if (base.kind != ModelKind::network)
    {
        summary["max_peak_discrepancy"] = max_discrepancy;
        summary["label_matches_structure"] = consistent;
    }
    else
    {
        // multimodality persistence, per epsilon when epsilon is an axis
        auto const eps_axis = std::find(result.axis_names.begin(), result.axis_names.end(), "epsilon");
        json persistence = json::array();
        std::vector<double> keys;
        if (eps_axis != result.axis_names.end())
            keys = grid.axes[static_cast<std::size_t>(eps_axis - result.axis_names.begin())].second;
        else
            keys.push_back(std::numeric_limits<double>::quiet_NaN());
        for (double key : keys)
        {
            std::size_t total = 0;
            std::size_t hits = 0;
            for (auto const& row : result.rows)
            {
                if (eps_axis != result.axis_names.end()
                    && row.axis_values[static_cast<std::size_t>(eps_axis - result.axis_names.begin())] != key)
                    continue;
                if (row.status != "ok")
                    continue;
                ++total;
                hits += row.peak_count >= 2 ? 1 : 0;
            }
            persistence.push_back({{"epsilon", std::isnan(key) ? json(nullptr) : json(key)},
                                   {"cells", total},
                                   {"multimodal_fraction", total ? static_cast<double>(hits) / total : 0.0}});
        }
        summary["persistence"] = persistence;
    }
    result.summary = summary;
    return result;
}

std::string sweep_csv(SweepResult const& result)
{
    std::vector<std::string> header = result.axis_names;
    for (char const* col : {"label", "structure", "predicted_peak", "simulated_peak", "discrepancy",
                            "peak_count", "status"})
        header.emplace_back(col);
    std::string out = csv_line(header);
    for (auto const& row : result.rows)
    {
        std::vector<std::string> cells;
        for (double v : row.axis_values)
            cells.push_back(format_number(v));
        cells.push_back(row.label);
        cells.push_back(row.structure);
        cells.push_back(row.predicted_peak ? format_number(*row.predicted_peak) : "");
        cells.push_back(row.simulated_peak ? format_number(*row.simulated_peak) : "");
        auto const d = row.discrepancy();
        cells.push_back(d ? format_number(*d) : "");
        cells.push_back(std::to_string(row.peak_count));
        cells.push_back(row.status);
        out += csv_line(cells);
    }
    return out;
}

}  // namespace sirkit::report
