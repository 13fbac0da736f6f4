#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "sirkit/kernels.hpp"

namespace sirkit::sweep
{

using kernels::Execution;

template<class R>
struct CellOutcome
{
    std::optional<R> value;
    std::string error;  //!< empty when value is set

    [[nodiscard]] bool ok() const { return value.has_value(); }
};

/*!
 * Evaluate fn(0), ..., fn(count - 1) as independent jobs.
 *
 * Results land at their cell index, so the output order never depends on
 * scheduling. A throwing cell records its message and the sweep continues.
 * workers <= 0 means the OpenMP default.
 */
template<class Fn>
auto map_cells(std::size_t count, Fn&& fn, Execution execution = Execution::parallel, int workers = 0)
    -> std::vector<CellOutcome<std::invoke_result_t<Fn&, std::size_t>>>
{
    using R = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<CellOutcome<R>> out(count);

    auto run_one = [&](std::size_t i) {
        try
        {
            out[i].value.emplace(fn(i));
        }
        catch (std::exception const& e)
        {
            out[i].error = e.what();
        }
        catch (...)
        {
            out[i].error = "unknown error";
        }
    };

    if (execution == Execution::serial)
    {
        for (std::size_t i = 0; i < count; ++i)
            run_one(i);
        return out;
    }

    int const threads = workers > 0 ? workers : kernels::max_workers();
    auto const n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i)
        run_one(static_cast<std::size_t>(i));
    return out;
}

}  // namespace sirkit::sweep
