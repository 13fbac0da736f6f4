#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sirkit/kernels.hpp"
#include "sirkit/ode.hpp"
#include "sirkit/sir.hpp"

namespace sirkit::network
{

using kernels::Execution;
using kernels::Matrix;

//! Weighted contact digraph; A(i, j) is the contact frequency of
//! subpopulation i with subpopulation j.
class ContactGraph
{
  public:
    struct Edge
    {
        std::size_t from = 0;
        std::size_t to = 0;
        double weight = 0.0;
    };

    //! Requires a square nonnegative matrix with strictly positive diagonal.
    explicit ContactGraph(Matrix weights);

    //! n x n matrix of `weight` (the complete graph 1 1').
    static ContactGraph complete(std::size_t n, double weight = 1.0);
    static ContactGraph from_edges(std::size_t n, std::span<Edge const> edges);

    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(weights_.rows()); }
    [[nodiscard]] Matrix const& weights() const { return weights_; }
    [[nodiscard]] bool strongly_connected() const;

  private:
    Matrix weights_;
};

struct NetworkModel
{
    NetworkModel(ContactGraph graph, double beta, double gamma);

    ContactGraph graph;
    double beta;
    double gamma;
};

struct NetworkState
{
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> z;

    [[nodiscard]] std::size_t size() const { return x.size(); }
    //! Throws std::invalid_argument unless every node lies on its simplex.
    void validate(double tol = 1e-9) const;

    //! Layout [x..., y..., z...].
    [[nodiscard]] ode::Vector to_vector() const;
    static NetworkState from_vector(std::span<double const> v, std::size_t n);
};

struct NetworkDerivative
{
    std::vector<double> dx;
    std::vector<double> dy;
    std::vector<double> dz;
};

NetworkDerivative network_rhs(NetworkState const& state,
                              NetworkModel const& model,
                              Execution execution = Execution::automatic);

ode::VectorField network_vector_field(NetworkModel const& model,
                                      Execution execution = Execution::automatic);

struct SpectralOptions
{
    std::size_t max_iterations = 200'000;
    double tolerance = 1e-12;  //!< successive eigenvalue estimates, relative
    double residual_tol = 1e-12;  //!< |Mv - lambda v|_inf / lambda
    bool dense_fallback = true;
    Execution execution = Execution::automatic;
};

struct SpectralReport
{
    double lambda_max = 0.0;
    std::vector<double> v;  //!< nonnegative, unit sum
    double R = 0.0;  //!< beta_over_gamma * lambda_max
    std::size_t iterations = 0;
    bool dense_fallback = false;
};

class SpectralError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Perron root of diag(x) A by power iteration.
SpectralReport spectral_radius(std::span<double const> x,
                               Matrix const& weights,
                               double beta_over_gamma = 1.0,
                               SpectralOptions const& options = {});

//! (beta / gamma) lambda_max(diag(x) A)
double network_R(NetworkState const& state, NetworkModel const& model);

struct NetworkRun
{
    ode::Trajectory trajectory;
    std::vector<double> reproduction;  //!< R at every stored time
    std::size_t nodes = 0;

    [[nodiscard]] NetworkState state(std::size_t index) const;
    [[nodiscard]] std::vector<double> infected(std::size_t node) const;
};

NetworkRun simulate_network(NetworkModel const& model,
                            NetworkState const& initial,
                            double horizon,
                            ode::StepControl const& control,
                            double extinction_threshold = sir::default_extinction_threshold);

//! Two subpopulations, A = 1 1', beta = gamma = 1, node 0 seeded with eps.
struct LemmaSetup
{
    NetworkModel model;
    NetworkState initial;
};

LemmaSetup lemma_setup(double eps);

struct DriftReport
{
    double constant_motion = 0.0;  //!< xbar + ybar - ln xbar
    double ratio = 0.0;  //!< x_i(t) xbar(0) - x_i(0) xbar(t)
};

//! Drift of the aggregate invariants; only valid for the rank-one,
//! beta = gamma = 1, two-node model.
DriftReport aggregate_invariants(ode::Trajectory const& trajectory, NetworkModel const& model);

//! h(eps) = (1 - eps)(1 - ln(2 - eps)) / (2 - eps)
double bimodality_map(double eps);

//! Least positive fixed point of bimodality_map, by bisection on eps - h(eps).
double epsilon_bar();

//! Same fixed point by direct iteration eps <- h(eps).
double epsilon_bar_fixed_point(double start = 0.1, double tol = 1e-15);

struct MultimodalityReport
{
    std::size_t node = 0;
    std::vector<double> peak_times;
    std::vector<double> peak_values;

    [[nodiscard]] std::size_t peak_count() const { return peak_times.size(); }
    [[nodiscard]] bool multimodal() const { return peak_times.size() >= 2; }
};

MultimodalityReport detect_multimodality(ode::Trajectory const& trajectory,
                                         std::size_t nodes,
                                         std::size_t node,
                                         double value_tol = sir::default_value_tol);

struct PerturbationOptions
{
    std::vector<double> epsilons{0.01};
    double beta_radius = 0.02;
    double gamma_radius = 0.02;
    //! Checkerboard offset on A: +r on the diagonal, -r off it.
    double weight_radius = 0.02;
    std::size_t points_per_axis = 3;
    double horizon = 200.0;
    double value_tol = sir::default_value_tol;
    ode::StepControl control{};
    Execution execution = Execution::parallel;
    int workers = 0;
};

struct PerturbationRow
{
    double eps = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double weight_offset = 0.0;
    std::size_t peaks = 0;
    bool multimodal = false;
    std::string error;
};

struct PerturbationSweep
{
    std::vector<PerturbationRow> rows;
    //! (eps, fraction of its cells where node 0 stays multimodal)
    std::vector<std::pair<double, double>> persistence;
};

PerturbationSweep perturbation_sweep(PerturbationOptions const& options);

//! Offsets -r .. r on `points` equally spaced values (just 0 when r == 0).
std::vector<double> symmetric_offsets(double radius, std::size_t points);

}  // namespace sirkit::network
