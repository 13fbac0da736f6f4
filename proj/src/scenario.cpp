#include "sirkit/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "sirkit/network.hpp"

namespace sirkit::scenario
{
namespace
{
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string join(std::string const& prefix, std::string const& key)
{
    return prefix.empty() ? key : prefix + "." + key;
}

//! Strict view of one JSON object: every key must be consumed.
class ObjectReader
{
  public:
    ObjectReader(json const& object, std::string path) : object_(object), path_(std::move(path))
    {
        if (!object_.is_object())
            throw ScenarioError(path_, "expected an object");
    }

    [[nodiscard]] bool has(std::string const& key) const { return object_.contains(key); }

    json const& at(std::string const& key)
    {
        if (!object_.contains(key))
            throw ScenarioError(join(path_, key), "required field is missing");
        used_.insert(key);
        return object_.at(key);
    }

    double number(std::string const& key)
    {
        auto const& v = at(key);
        if (!v.is_number())
            throw ScenarioError(join(path_, key), "expected a number");
        return v.get<double>();
    }

    double number_or(std::string const& key, double fallback)
    {
        return has(key) ? number(key) : fallback;
    }

    std::string string(std::string const& key)
    {
        auto const& v = at(key);
        if (!v.is_string())
            throw ScenarioError(join(path_, key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(std::string const& key)
    {
        auto const& v = at(key);
        if (!v.is_array())
            throw ScenarioError(join(path_, key), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i)
        {
            if (!v[i].is_number())
                throw ScenarioError(join(path_, key) + "[" + std::to_string(i) + "]",
                                    "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    [[nodiscard]] std::string path(std::string const& key) const { return join(path_, key); }

    void finish() const
    {
        for (auto it = object_.begin(); it != object_.end(); ++it)
            if (!used_.count(it.key()))
                throw ScenarioError(join(path_, it.key()), "unknown field");
    }

  private:
    json const& object_;
    std::string path_;
    std::set<std::string> used_;
};

ScalarParams read_scalar(ObjectReader& r)
{
    ScalarParams p;
    p.beta = r.number("beta");
    p.gamma = r.number("gamma");
    std::string const rate = r.has("rate") ? r.string("rate") : "constant";
    if (rate == "constant")
    {
        p.family = sir::RateFamily::constant;
        if (r.has("exponent"))
            throw ScenarioError(r.path("exponent"), "the constant rate has no exponent");
    }
    else if (rate == "power")
    {
        p.family = sir::RateFamily::power;
        p.exponent = r.number("exponent");
    }
    else
    {
        throw ScenarioError(r.path("rate"), "expected \"constant\" or \"power\"");
    }
    p.x0 = r.number("x0");
    p.y0 = r.number("y0");
    return p;
}

ThresholdParams read_threshold(ObjectReader& r)
{
    ThresholdParams p;
    p.policy.beta = r.number("beta");
    p.policy.beta_bar = r.number("beta_bar");
    p.policy.gamma = r.number("gamma");
    p.policy.k = r.number("k");
    p.epsilon = r.number("epsilon");
    return p;
}

NetworkParams read_network(ObjectReader& r)
{
    NetworkParams p;
    p.beta = r.number("beta");
    p.gamma = r.number("gamma");
    p.x0 = r.numbers("x0");
    p.y0 = r.numbers("y0");

    if (r.has("weights") == r.has("edges"))
        throw ScenarioError(r.path("weights"), "give exactly one of \"weights\" or \"edges\"");
    if (r.has("weights"))
    {
        auto const& rows = r.at("weights");
        if (!rows.is_array() || rows.empty())
            throw ScenarioError(r.path("weights"), "expected a non-empty square matrix");
        auto const n = static_cast<Eigen::Index>(rows.size());
        p.weights.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            auto const& row = rows[static_cast<std::size_t>(i)];
            std::string const where = r.path("weights") + "[" + std::to_string(i) + "]";
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
                throw ScenarioError(where, "expected a row of " + std::to_string(n) + " numbers");
            for (Eigen::Index j = 0; j < n; ++j)
            {
                auto const& v = row[static_cast<std::size_t>(j)];
                if (!v.is_number())
                    throw ScenarioError(where + "[" + std::to_string(j) + "]", "expected a number");
                p.weights(i, j) = v.get<double>();
            }
        }
    }
    else
    {
        auto const nodes = r.number("nodes");
        if (!(nodes >= 1) || nodes != std::floor(nodes))
            throw ScenarioError(r.path("nodes"), "expected a positive integer");
        auto const& edges = r.at("edges");
        if (!edges.is_array())
            throw ScenarioError(r.path("edges"), "expected an array of edges");
        auto const n = static_cast<Eigen::Index>(nodes);
        p.weights = kernels::Matrix::Zero(n, n);
        for (std::size_t e = 0; e < edges.size(); ++e)
        {
            ObjectReader er(edges[e], r.path("edges") + "[" + std::to_string(e) + "]");
            double const from = er.number("from");
            double const to = er.number("to");
            double const w = er.number("weight");
            er.finish();
            if (from < 0 || to < 0 || from >= nodes || to >= nodes || from != std::floor(from)
                || to != std::floor(to))
                throw ScenarioError(r.path("edges") + "[" + std::to_string(e) + "]",
                                    "edge endpoint out of range");
            p.weights(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) = w;
        }
    }
    return p;
}

ode::StepControl read_control(ObjectReader& r)
{
    ode::StepControl c;
    c.initial_step = r.number_or("initial_step", c.initial_step);
    c.max_step = r.number_or("max_step", c.max_step);
    c.abs_tol = r.number_or("abs_tol", c.abs_tol);
    c.rel_tol = r.number_or("rel_tol", c.rel_tol);
    if (r.has("max_steps"))
    {
        double const steps = r.number("max_steps");
        if (!(steps >= 1) || steps != std::floor(steps))
            throw ScenarioError(r.path("max_steps"), "expected a positive integer");
        c.max_steps = static_cast<std::size_t>(steps);
    }
    if (r.has("scheme"))
    {
        auto const scheme = r.string("scheme");
        if (scheme == "rk4")
            c.scheme = ode::Scheme::rk4;
        else if (scheme == "dopri5")
            c.scheme = ode::Scheme::dopri5;
        else
            throw ScenarioError(r.path("scheme"), "expected \"rk4\" or \"dopri5\"");
    }
    return c;
}

json parse_json(std::string_view text)
{
    try
    {
        return json::parse(text);
    }
    catch (json::parse_error const& e)
    {
        // byte offset -> line number for the diagnostic
        std::size_t const offset = std::min<std::size_t>(e.byte, text.size());
        auto const line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n');
        throw ScenarioError("", "line " + std::to_string(line) + ": " + e.what());
    }
}

void check_schema(ObjectReader& r, std::string_view expected)
{
    auto const schema = r.string("schema");
    if (schema != expected)
        throw ScenarioError("schema", "unsupported schema \"" + schema + "\" (expected \""
                                          + std::string(expected) + "\")");
}
}  // namespace

ScenarioError::ScenarioError(std::string field, std::string const& message)
    : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field))
{
}

char const* to_string(ModelKind kind)
{
    switch (kind)
    {
        case ModelKind::scalar: return "scalar";
        case ModelKind::threshold: return "threshold";
        case ModelKind::network: return "network";
    }
    return "?";
}

sir::ScalarModel ScalarParams::model() const
{
    auto const rate = family == sir::RateFamily::constant ? sir::RateFunction::constant(beta)
                                                          : sir::RateFunction::power(beta, exponent);
    return {rate, gamma};
}

void Scenario::validate() const
{
    auto wrap = [](char const* field, auto&& fn) {
        try
        {
            fn();
        }
        catch (ScenarioError const&)
        {
            throw;
        }
        catch (std::exception const& e)
        {
            throw ScenarioError(field, e.what());
        }
    };

    if (!(horizon > 0))
        throw ScenarioError("horizon", "must be > 0");
    if (!(extinction_threshold >= 0))
        throw ScenarioError("extinction_threshold", "must be >= 0");
    if (!(output.value_tol >= 0) || !(output.plateau_tol >= 0))
        throw ScenarioError("output", "tolerances must be >= 0");
    wrap("control", [&] { control.validate(); });

    switch (kind)
    {
        case ModelKind::scalar:
        {
            auto const& p = std::get<ScalarParams>(params);
            wrap("parameters", [&] { (void)p.model(); });
            if (!(p.x0 >= 0 && p.y0 >= 0 && p.x0 + p.y0 <= 1.0 + 1e-12))
                throw ScenarioError("parameters.x0", "x0, y0 >= 0 with x0 + y0 <= 1 required");
            break;
        }
        case ModelKind::threshold:
        {
            auto const& p = std::get<ThresholdParams>(params);
            wrap("parameters", [&] { p.policy.validate(); });
            if (!(p.epsilon > 0 && p.epsilon < 1))
                throw ScenarioError("parameters.epsilon", "must lie in (0, 1)");
            break;
        }
        case ModelKind::network:
        {
            auto const& p = std::get<NetworkParams>(params);
            wrap("parameters.weights", [&] { network::ContactGraph graph(p.weights); });
            wrap("parameters", [&] { network::NetworkModel(network::ContactGraph(p.weights), p.beta, p.gamma); });
            auto const n = static_cast<std::size_t>(p.weights.rows());
            if (p.x0.size() != n)
                throw ScenarioError("parameters.x0", "expected " + std::to_string(n) + " entries");
            if (p.y0.size() != n)
                throw ScenarioError("parameters.y0", "expected " + std::to_string(n) + " entries");
            for (std::size_t i = 0; i < n; ++i)
                if (!(p.x0[i] >= 0 && p.y0[i] >= 0 && p.x0[i] + p.y0[i] <= 1.0 + 1e-12))
                    throw ScenarioError("parameters.x0[" + std::to_string(i) + "]",
                                        "x0, y0 >= 0 with x0 + y0 <= 1 required");
            break;
        }
    }
}

Scenario parse_scenario(std::string_view text)
{
    auto const doc = parse_json(text);
    ObjectReader root(doc, "");
    check_schema(root, scenario_schema);

    Scenario s;
    auto const model = root.string("model");
    ObjectReader params(root.at("parameters"), "parameters");
    if (model == "scalar")
    {
        s.kind = ModelKind::scalar;
        s.params = read_scalar(params);
    }
    else if (model == "threshold")
    {
        s.kind = ModelKind::threshold;
        s.params = read_threshold(params);
    }
    else if (model == "network")
    {
        s.kind = ModelKind::network;
        s.params = read_network(params);
    }
    else
    {
        throw ScenarioError("model", "expected \"scalar\", \"threshold\" or \"network\"");
    }
    params.finish();

    s.horizon = root.number_or("horizon", s.horizon);
    s.extinction_threshold = root.number_or("extinction_threshold", s.extinction_threshold);
    if (root.has("control"))
    {
        ObjectReader control(root.at("control"), "control");
        s.control = read_control(control);
        control.finish();
    }
    if (root.has("output"))
    {
        ObjectReader output(root.at("output"), "output");
        s.output.value_tol = output.number_or("value_tol", s.output.value_tol);
        s.output.plateau_tol = output.number_or("plateau_tol", s.output.plateau_tol);
        output.finish();
    }
    root.finish();
    s.validate();
    return s;
}

std::string read_file(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ScenarioError("", "cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Scenario load_scenario(std::filesystem::path const& path)
{
    return parse_scenario(read_file(path));
}

nlohmann::ordered_json to_json(Scenario const& s)
{
    ordered_json out;
    out["schema"] = scenario_schema;
    out["model"] = to_string(s.kind);
    ordered_json p;
    switch (s.kind)
    {
        case ModelKind::scalar:
        {
            auto const& sp = std::get<ScalarParams>(s.params);
            p["beta"] = sp.beta;
            p["gamma"] = sp.gamma;
            p["rate"] = sp.family == sir::RateFamily::constant ? "constant" : "power";
            if (sp.family == sir::RateFamily::power)
                p["exponent"] = sp.exponent;
            p["x0"] = sp.x0;
            p["y0"] = sp.y0;
            break;
        }
        case ModelKind::threshold:
        {
            auto const& tp = std::get<ThresholdParams>(s.params);
            p["beta"] = tp.policy.beta;
            p["beta_bar"] = tp.policy.beta_bar;
            p["gamma"] = tp.policy.gamma;
            p["k"] = tp.policy.k;
            p["epsilon"] = tp.epsilon;
            break;
        }
        case ModelKind::network:
        {
            auto const& np = std::get<NetworkParams>(s.params);
            p["beta"] = np.beta;
            p["gamma"] = np.gamma;
            ordered_json rows = ordered_json::array();
            for (Eigen::Index i = 0; i < np.weights.rows(); ++i)
            {
                ordered_json row = ordered_json::array();
                for (Eigen::Index j = 0; j < np.weights.cols(); ++j)
                    row.push_back(np.weights(i, j));
                rows.push_back(row);
            }
            p["weights"] = rows;
            p["x0"] = np.x0;
            p["y0"] = np.y0;
            break;
        }
    }
    out["parameters"] = p;
    out["horizon"] = s.horizon;
    out["control"] = {{"initial_step", s.control.initial_step},
                      {"max_step", s.control.max_step},
                      {"abs_tol", s.control.abs_tol},
                      {"rel_tol", s.control.rel_tol},
                      {"max_steps", s.control.max_steps},
                      {"scheme", s.control.scheme == ode::Scheme::rk4 ? "rk4" : "dopri5"}};
    out["extinction_threshold"] = s.extinction_threshold;
    out["output"] = {{"value_tol", s.output.value_tol}, {"plateau_tol", s.output.plateau_tol}};
    return out;
}

//---------------------------------------------------------------------------//

std::size_t Grid::cell_count() const
{
    if (axes.empty())
        return 0;
    std::size_t count = 1;
    for (auto const& [name, values] : axes)
        count *= values.size();
    return count;
}

std::vector<double> Grid::cell(std::size_t index) const
{
    std::vector<double> out(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;)
    {
        auto const& values = axes[a].second;
        out[a] = values[index % values.size()];
        index /= values.size();
    }
    return out;
}

Grid parse_grid(std::string_view text)
{
    auto const doc = parse_json(text);
    ObjectReader root(doc, "");
    check_schema(root, grid_schema);

    Grid grid;
    if (root.has("max_cells"))
    {
        double const cap = root.number("max_cells");
        if (!(cap >= 0) || cap != std::floor(cap))
            throw ScenarioError("max_cells", "expected a non-negative integer");
        grid.max_cells = static_cast<std::size_t>(cap);
    }
    auto const& axes = root.at("axes");
    if (!axes.is_array())
        throw ScenarioError("axes", "expected an array of {name, values}");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < axes.size(); ++i)
    {
        ObjectReader axis(axes[i], "axes[" + std::to_string(i) + "]");
        auto name = axis.string("name");
        auto values = axis.numbers("values");
        axis.finish();
        if (!seen.insert(name).second)
            throw ScenarioError(axis.path("name"), "duplicate axis \"" + name + "\"");
        grid.axes.emplace_back(std::move(name), std::move(values));
    }
    root.finish();
    if (grid.cell_count() > grid.max_cells)
        throw ScenarioError("axes", "grid has " + std::to_string(grid.cell_count())
                                        + " cells, above max_cells=" + std::to_string(grid.max_cells));
    return grid;
}

Grid load_grid(std::filesystem::path const& path)
{
    return parse_grid(read_file(path));
}

std::vector<std::string> grid_axes(ModelKind kind)
{
    switch (kind)
    {
        case ModelKind::scalar: return {"beta", "gamma", "exponent", "epsilon"};
        case ModelKind::threshold:
            return {"beta", "beta_bar", "beta_bar_ratio", "gamma", "k", "epsilon"};
        case ModelKind::network: return {"beta", "gamma", "epsilon", "weight_offset"};
    }
    return {};
}

Scenario apply_cell(Scenario const& base, Grid const& grid, std::vector<double> const& values)
{
    Scenario s = base;
    auto const allowed = grid_axes(s.kind);
    std::optional<double> ratio;
    for (std::size_t a = 0; a < grid.axes.size(); ++a)
    {
        auto const& name = grid.axes[a].first;
        double const v = values.at(a);
        if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
            throw ScenarioError("axes[" + std::to_string(a) + "].name",
                                "axis \"" + name + "\" does not apply to a "
                                    + to_string(s.kind) + " scenario");
        switch (s.kind)
        {
            case ModelKind::scalar:
            {
                auto& p = std::get<ScalarParams>(s.params);
                if (name == "beta")
                    p.beta = v;
                else if (name == "gamma")
                    p.gamma = v;
                else if (name == "exponent")
                {
                    p.family = sir::RateFamily::power;
                    p.exponent = v;
                }
                else if (name == "epsilon")
                {
                    p.x0 = 1.0 - v;
                    p.y0 = v;
                }
                break;
            }
            case ModelKind::threshold:
            {
                auto& p = std::get<ThresholdParams>(s.params);
                if (name == "beta")
                    p.policy.beta = v;
                else if (name == "beta_bar")
                    p.policy.beta_bar = v;
                else if (name == "beta_bar_ratio")
                    ratio = v;
                else if (name == "gamma")
                    p.policy.gamma = v;
                else if (name == "k")
                    p.policy.k = v;
                else if (name == "epsilon")
                    p.epsilon = v;
                break;
            }
            case ModelKind::network:
            {
                auto& p = std::get<NetworkParams>(s.params);
                if (name == "beta")
                    p.beta = v;
                else if (name == "gamma")
                    p.gamma = v;
                else if (name == "epsilon")
                {
                    p.x0.at(0) = 1.0 - v;
                    p.y0.at(0) = v;
                }
                else if (name == "weight_offset")
                {
                    // checkerboard: +v on the diagonal, -v elsewhere
                    for (Eigen::Index i = 0; i < p.weights.rows(); ++i)
                        for (Eigen::Index j = 0; j < p.weights.cols(); ++j)
                            p.weights(i, j) += i == j ? v : -v;
                }
                break;
            }
        }
    }
    if (ratio)
    {
        auto& p = std::get<ThresholdParams>(s.params);
        p.policy.beta_bar = *ratio * p.policy.beta;
    }
    s.validate();
    return s;
}

}  // namespace sirkit::scenario
