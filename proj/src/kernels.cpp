#include "sirkit/kernels.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sirkit::kernels
{
namespace
{
inline double nonneg(double v)
{
    return v < 0.0 ? 0.0 : v;
}

inline void rhs_row(Matrix const& weights,
                    double beta,
                    double gamma,
                    std::span<double const> x,
                    std::span<double const> y,
                    std::span<double> dx,
                    std::span<double> dy,
                    std::span<double> dz,
                    std::size_t i)
{
    std::size_t const n = x.size();
    double pressure = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        pressure += weights(i, j) * nonneg(y[j]);
    double const xi = nonneg(x[i]);
    double const yi = nonneg(y[i]);
    double const infection = xi * pressure * beta;
    double const recovery = gamma * yi;
    dx[i] = -infection;
    dy[i] = infection - recovery;
    dz[i] = recovery;
}

inline double matvec_row(std::span<double const> x,
                         Matrix const& weights,
                         std::span<double const> v,
                         std::size_t i)
{
    double acc = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j)
        acc += weights(i, j) * v[j];
    return x[i] * acc;
}

bool use_parallel(Execution execution, std::size_t n)
{
    return execution == Execution::parallel
           || (execution == Execution::automatic && n >= parallel_min_nodes);
}
}  // namespace

void network_rhs_serial(Matrix const& weights,
                        double beta,
                        double gamma,
                        std::span<double const> x,
                        std::span<double const> y,
                        std::span<double> dx,
                        std::span<double> dy,
                        std::span<double> dz)
{
    for (std::size_t i = 0; i < x.size(); ++i)
        rhs_row(weights, beta, gamma, x, y, dx, dy, dz, i);
}

void network_rhs_parallel(Matrix const& weights,
                          double beta,
                          double gamma,
                          std::span<double const> x,
                          std::span<double const> y,
                          std::span<double> dx,
                          std::span<double> dy,
                          std::span<double> dz)
{
    auto const n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        rhs_row(weights, beta, gamma, x, y, dx, dy, dz, static_cast<std::size_t>(i));
}

void network_rhs(Matrix const& weights,
                 double beta,
                 double gamma,
                 std::span<double const> x,
                 std::span<double const> y,
                 std::span<double> dx,
                 std::span<double> dy,
                 std::span<double> dz,
                 Execution execution)
{
    if (use_parallel(execution, x.size()))
        network_rhs_parallel(weights, beta, gamma, x, y, dx, dy, dz);
    else
        network_rhs_serial(weights, beta, gamma, x, y, dx, dy, dz);
}

void scaled_matvec_serial(std::span<double const> x,
                          Matrix const& weights,
                          std::span<double const> v,
                          std::span<double> out)
{
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = matvec_row(x, weights, v, i);
}

void scaled_matvec_parallel(std::span<double const> x,
                            Matrix const& weights,
                            std::span<double const> v,
                            std::span<double> out)
{
    auto const n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = matvec_row(x, weights, v, static_cast<std::size_t>(i));
}

void scaled_matvec(std::span<double const> x,
                   Matrix const& weights,
                   std::span<double const> v,
                   std::span<double> out,
                   Execution execution)
{
    if (use_parallel(execution, x.size()))
        scaled_matvec_parallel(x, weights, v, out);
    else
        scaled_matvec_serial(x, weights, v, out);
}

int max_workers()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace sirkit::kernels
