#include "sirkit/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include <Eigen/Eigenvalues>

#include "sirkit/sweep.hpp"

namespace sirkit::network
{
namespace
{
bool reaches_all(Matrix const& w, bool transpose)
{
    std::size_t const n = static_cast<std::size_t>(w.rows());
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> open;
    open.push(0);
    seen[0] = true;
    while (!open.empty())
    {
        std::size_t const i = open.front();
        open.pop();
        for (std::size_t j = 0; j < n; ++j)
        {
            double const w_ij = transpose ? w(j, i) : w(i, j);
            if (w_ij > 0 && !seen[j])
            {
                seen[j] = true;
                open.push(j);
            }
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

SpectralReport dense_spectrum(std::span<double const> x, Matrix const& weights)
{
    std::size_t const n = x.size();
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(i, j) = x[i] * weights(i, j);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success)
        throw SpectralError("spectral iteration failed: dense eigensolve did not converge");

    // The Perron root is real and has the largest real part.
    Eigen::Index best = 0;
    auto const values = solver.eigenvalues();
    for (Eigen::Index i = 1; i < values.size(); ++i)
        if (values[i].real() > values[best].real())
            best = i;

    SpectralReport report;
    report.lambda_max = std::max(0.0, values[best].real());
    report.dense_fallback = true;
    auto const vec = solver.eigenvectors().col(best);
    report.v.resize(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        report.v[i] = std::abs(vec[static_cast<Eigen::Index>(i)].real());
        sum += report.v[i];
    }
    for (auto& vi : report.v)
        vi = sum > 0 ? vi / sum : 1.0 / static_cast<double>(n);
    return report;
}
}  // namespace

ContactGraph::ContactGraph(Matrix weights) : weights_(std::move(weights))
{
    if (weights_.rows() == 0 || weights_.rows() != weights_.cols())
        throw std::invalid_argument("contact graph: weight matrix must be square and non-empty");
    for (Eigen::Index i = 0; i < weights_.rows(); ++i)
    {
        for (Eigen::Index j = 0; j < weights_.cols(); ++j)
        {
            if (!std::isfinite(weights_(i, j)) || weights_(i, j) < 0)
                throw std::invalid_argument("contact graph: weights must be finite and >= 0");
        }
        if (!(weights_(i, i) > 0))
            throw std::invalid_argument("contact graph: diagonal weights must be > 0");
    }
}

ContactGraph ContactGraph::complete(std::size_t n, double weight)
{
    auto const size = static_cast<Eigen::Index>(n);
    return ContactGraph(Matrix::Constant(size, size, weight));
}

ContactGraph ContactGraph::from_edges(std::size_t n, std::span<Edge const> edges)
{
    auto const size = static_cast<Eigen::Index>(n);
    Matrix w = Matrix::Zero(size, size);
    for (auto const& e : edges)
    {
        if (e.from >= n || e.to >= n)
            throw std::invalid_argument("contact graph: edge endpoint out of range");
        w(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to)) = e.weight;
    }
    return ContactGraph(std::move(w));
}

bool ContactGraph::strongly_connected() const
{
    return reaches_all(weights_, false) && reaches_all(weights_, true);
}

NetworkModel::NetworkModel(ContactGraph graph_, double beta_, double gamma_)
    : graph(std::move(graph_)), beta(beta_), gamma(gamma_)
{
    if (!(beta > 0))
        throw std::invalid_argument("network: beta must be > 0");
    if (!(gamma > 0))
        throw std::invalid_argument("network: gamma must be > 0");
}

void NetworkState::validate(double tol) const
{
    if (x.empty() || y.size() != x.size() || z.size() != x.size())
        throw std::invalid_argument("network state: x, y, z must be non-empty and equal length");
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        for (double v : {x[i], y[i], z[i]})
            if (!(v >= -1e-12 && v <= 1.0 + 1e-12))
                throw std::invalid_argument("network state: entries must lie in [0, 1]");
        if (std::abs(x[i] + y[i] + z[i] - 1.0) > tol)
            throw std::invalid_argument("network state: node " + std::to_string(i)
                                        + " is off the simplex");
    }
}

ode::Vector NetworkState::to_vector() const
{
    ode::Vector out;
    out.reserve(3 * x.size());
    out.insert(out.end(), x.begin(), x.end());
    out.insert(out.end(), y.begin(), y.end());
    out.insert(out.end(), z.begin(), z.end());
    return out;
}

NetworkState NetworkState::from_vector(std::span<double const> v, std::size_t n)
{
    return {{v.begin(), v.begin() + n}, {v.begin() + n, v.begin() + 2 * n}, {v.begin() + 2 * n, v.begin() + 3 * n}};
}

NetworkDerivative network_rhs(NetworkState const& state, NetworkModel const& model, Execution execution)
{
    std::size_t const n = state.size();
    NetworkDerivative d{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    kernels::network_rhs(model.graph.weights(), model.beta, model.gamma, state.x, state.y, d.dx, d.dy, d.dz,
                         execution);
    return d;
}

ode::VectorField network_vector_field(NetworkModel const& model, Execution execution)
{
    return [model, execution](double, std::span<double const> s, std::span<double> ds) {
        std::size_t const n = model.graph.size();
        kernels::network_rhs(model.graph.weights(),
                             model.beta,
                             model.gamma,
                             s.subspan(0, n),
                             s.subspan(n, n),
                             ds.subspan(0, n),
                             ds.subspan(n, n),
                             ds.subspan(2 * n, n),
                             execution);
    };
}

SpectralReport spectral_radius(std::span<double const> x,
                               Matrix const& weights,
                               double beta_over_gamma,
                               SpectralOptions const& options)
{
    std::size_t const n = x.size();
    if (n == 0 || static_cast<std::size_t>(weights.rows()) != n
        || static_cast<std::size_t>(weights.cols()) != n)
        throw std::invalid_argument("spectral_radius: dimension mismatch");
    if (std::any_of(x.begin(), x.end(), [](double v) { return !(v >= 0); }))
        throw std::invalid_argument("spectral_radius: x must be >= 0");

    SpectralReport report;
    report.v.assign(n, 1.0 / static_cast<double>(n));
    if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; }))
        return report;

    std::vector<double> w(n);
    kernels::scaled_matvec(x, weights, report.v, w, options.execution);
    double lambda = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t it = 1; it <= options.max_iterations; ++it)
    {
        if (!(lambda > 0))
            break;
        for (std::size_t i = 0; i < n; ++i)
            report.v[i] = w[i] / lambda;
        kernels::scaled_matvec(x, weights, report.v, w, options.execution);
        double const next = std::accumulate(w.begin(), w.end(), 0.0);

        double residual = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            residual = std::max(residual, std::abs(w[i] - next * report.v[i]));

        bool const settled = std::abs(next - lambda) <= options.tolerance * next;
        lambda = next;
        if (settled && residual <= options.residual_tol * lambda)
        {
            report.lambda_max = lambda;
            report.iterations = it;
            report.R = beta_over_gamma * lambda;
            return report;
        }
    }
    if (!options.dense_fallback)
        throw SpectralError("spectral iteration failed to converge");
    report = dense_spectrum(x, weights);
    report.iterations = options.max_iterations;
    report.R = beta_over_gamma * report.lambda_max;
    return report;
}

double network_R(NetworkState const& state, NetworkModel const& model)
{
    std::vector<double> x(state.x);
    for (auto& v : x)
        v = std::max(v, 0.0);
    return spectral_radius(x, model.graph.weights(), model.beta / model.gamma).R;
}

NetworkState NetworkRun::state(std::size_t index) const
{
    return NetworkState::from_vector(trajectory.states.at(index), nodes);
}

std::vector<double> NetworkRun::infected(std::size_t node) const
{
    return trajectory.component(nodes + node);
}

NetworkRun simulate_network(NetworkModel const& model,
                            NetworkState const& initial,
                            double horizon,
                            ode::StepControl const& control,
                            double extinction_threshold)
{
    initial.validate();
    std::size_t const n = initial.size();
    if (n != model.graph.size())
        throw std::invalid_argument("network state size does not match the graph");
    if (!(horizon > 0))
        throw std::invalid_argument("horizon must be > 0");

    auto field = network_vector_field(model);
    std::vector<ode::EventSpec> const events{
        {[field, n](double t, std::span<double const> s) {
             std::vector<double> ds(3 * n);
             field(t, s, ds);
             return std::accumulate(ds.begin() + static_cast<std::ptrdiff_t>(n),
                                    ds.begin() + static_cast<std::ptrdiff_t>(2 * n),
                                    0.0);
         },
         ode::Direction::falling,
         false,
         "aggregate-peak"},
        {[n, extinction_threshold](double, std::span<double const> s) {
             auto const ys = s.subspan(n, n);
             return *std::max_element(ys.begin(), ys.end()) - extinction_threshold;
         },
         ode::Direction::falling,
         true,
         "extinction"}};

    NetworkRun run;
    run.nodes = n;
    run.trajectory = ode::integrate(field, initial.to_vector(), 0.0, horizon, control, events);
    run.reproduction.reserve(run.trajectory.size());
    for (std::size_t i = 0; i < run.trajectory.size(); ++i)
        run.reproduction.push_back(network_R(run.state(i), model));
    return run;
}

LemmaSetup lemma_setup(double eps)
{
    if (!(eps > 0 && eps < 1))
        throw std::invalid_argument("lemma_setup: eps must lie in (0, 1)");
    return {NetworkModel(ContactGraph::complete(2), 1.0, 1.0),
            NetworkState{{1.0 - eps, 1.0}, {eps, 0.0}, {0.0, 0.0}}};
}

DriftReport aggregate_invariants(ode::Trajectory const& trajectory, NetworkModel const& model)
{
    auto const& w = model.graph.weights();
    bool const rank_one = model.graph.size() == 2 && (w.array() == 1.0).all();
    if (!rank_one || model.beta != 1.0 || model.gamma != 1.0)
        throw std::invalid_argument(
            "invariants valid only for the rank-one, beta=gamma=1 case");
    if (trajectory.empty())
        return {};

    auto const& s0 = trajectory.states.front();
    double const xbar0 = s0[0] + s0[1];
    double const motion0 = xbar0 + s0[2] + s0[3] - std::log(xbar0);

    DriftReport drift;
    for (auto const& s : trajectory.states)
    {
        double const xbar = s[0] + s[1];
        double const ybar = s[2] + s[3];
        drift.constant_motion = std::max(drift.constant_motion,
                                         std::abs(xbar + ybar - std::log(xbar) - motion0));
        for (std::size_t i = 0; i < 2; ++i)
            drift.ratio = std::max(drift.ratio, std::abs(s[i] * xbar0 - s0[i] * xbar));
    }
    return drift;
}

double bimodality_map(double eps)
{
    return (1.0 - eps) * (1.0 - std::log(2.0 - eps)) / (2.0 - eps);
}

double epsilon_bar()
{
    // g(0) = -h(0) < 0 and g(1) = 1 > 0.
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-15)
    {
        double const mid = 0.5 * (lo + hi);
        if (mid - bimodality_map(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double epsilon_bar_fixed_point(double start, double tol)
{
    double eps = start;
    for (int it = 0; it < 10'000; ++it)
    {
        double const next = bimodality_map(eps);
        if (std::abs(next - eps) <= tol)
            return next;
        eps = next;
    }
    return eps;
}

MultimodalityReport detect_multimodality(ode::Trajectory const& trajectory,
                                         std::size_t nodes,
                                         std::size_t node,
                                         double value_tol)
{
    if (node >= nodes)
        throw std::invalid_argument("detect_multimodality: node out of range");
    auto const shape = sir::classify_shape(trajectory, value_tol, sir::default_plateau_tol, nodes + node);
    return {node, shape.peak_times, shape.peak_values};
}

std::vector<double> symmetric_offsets(double radius, std::size_t points)
{
    if (radius == 0.0 || points <= 1)
        return {0.0};
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i)
        out[i] = -radius + 2.0 * radius * static_cast<double>(i) / static_cast<double>(points - 1);
    return out;
}

PerturbationSweep perturbation_sweep(PerturbationOptions const& options)
{
    auto const betas = symmetric_offsets(options.beta_radius, options.points_per_axis);
    auto const gammas = symmetric_offsets(options.gamma_radius, options.points_per_axis);
    auto const weights = symmetric_offsets(options.weight_radius, options.points_per_axis);

    struct Cell
    {
        double eps, beta, gamma, weight_offset;
    };
    std::vector<Cell> cells;
    for (double eps : options.epsilons)
        for (double db : betas)
            for (double dg : gammas)
                for (double dw : weights)
                    cells.push_back({eps, 1.0 + db, 1.0 + dg, dw});

    auto const outcomes = sweep::map_cells(
        cells.size(),
        [&](std::size_t i) {
            auto const& c = cells[i];
            Matrix w(2, 2);
            w << 1.0 + c.weight_offset, 1.0 - c.weight_offset, 1.0 - c.weight_offset,
                1.0 + c.weight_offset;
            NetworkModel const model(ContactGraph(w), c.beta, c.gamma);
            auto const initial = lemma_setup(c.eps).initial;
            auto const run = simulate_network(model, initial, options.horizon, options.control);
            return detect_multimodality(run.trajectory, 2, 0, options.value_tol).peak_count();
        },
        options.execution,
        options.workers);

    PerturbationSweep result;
    for (std::size_t i = 0; i < cells.size(); ++i)
    {
        auto const& c = cells[i];
        PerturbationRow row{c.eps, c.beta, c.gamma, c.weight_offset, 0, false, {}};
        if (outcomes[i].ok())
        {
            row.peaks = *outcomes[i].value;
            row.multimodal = row.peaks >= 2;
        }
        else
        {
            row.error = outcomes[i].error;
        }
        result.rows.push_back(std::move(row));
    }
    for (double eps : options.epsilons)
    {
        std::size_t total = 0;
        std::size_t hits = 0;
        for (auto const& row : result.rows)
        {
            if (row.eps != eps)
                continue;
            ++total;
            hits += row.multimodal ? 1 : 0;
        }
        result.persistence.emplace_back(eps, total ? static_cast<double>(hits) / total : 0.0);
    }
    return result;
}

}  // namespace sirkit::network
