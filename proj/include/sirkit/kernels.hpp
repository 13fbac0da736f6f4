#pragma once

// Data-parallel inner loops of the network model. Every kernel has a
// serial reference that the tests compare against bit for bit.

#include <cstddef>
#include <span>

#include <Eigen/Core>

namespace sirkit::kernels
{

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Execution
{
    serial,
    parallel,
    automatic  //!< parallel once the node count reaches parallel_min_nodes
};

inline constexpr std::size_t parallel_min_nodes = 64;

//! Network SIR field: s_i = sum_j A_ij y_j,
//!   dx_i = -beta x_i s_i, dy_i = beta x_i s_i - gamma y_i, dz_i = gamma y_i.
//! Negative round-off in x and y is read as zero.
void network_rhs_serial(Matrix const& weights,
                        double beta,
                        double gamma,
                        std::span<double const> x,
                        std::span<double const> y,
                        std::span<double> dx,
                        std::span<double> dy,
                        std::span<double> dz);

void network_rhs_parallel(Matrix const& weights,
                          double beta,
                          double gamma,
                          std::span<double const> x,
                          std::span<double const> y,
                          std::span<double> dx,
                          std::span<double> dy,
                          std::span<double> dz);

void network_rhs(Matrix const& weights,
                 double beta,
                 double gamma,
                 std::span<double const> x,
                 std::span<double const> y,
                 std::span<double> dx,
                 std::span<double> dy,
                 std::span<double> dz,
                 Execution execution = Execution::automatic);

//! out = diag(x) A v
void scaled_matvec_serial(std::span<double const> x,
                          Matrix const& weights,
                          std::span<double const> v,
                          std::span<double> out);

void scaled_matvec_parallel(std::span<double const> x,
                            Matrix const& weights,
                            std::span<double const> v,
                            std::span<double> out);

void scaled_matvec(std::span<double const> x,
                   Matrix const& weights,
                   std::span<double const> v,
                   std::span<double> out,
                   Execution execution = Execution::automatic);

//! Worker count OpenMP would use for a parallel region (1 without OpenMP).
int max_workers();

}  // namespace sirkit::kernels
