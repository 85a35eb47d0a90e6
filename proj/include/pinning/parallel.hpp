#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#include <omp.h>

namespace pinning {

// threads == 1 selects the serial reference path; 0 leaves OpenMP's default.
struct Execution {
    int threads = 0;
};

inline int resolved_threads(const Execution& ex)
{
    return ex.threads > 0 ? ex.threads : omp_get_max_threads();
}

template <class F>
void for_each_index_serial(std::size_t count, F&& f)
{
    for (std::size_t i = 0; i < count; ++i)
        f(i);
}

// Each index writes only its own slot; callers reduce afterwards in index order,
// so results do not depend on the thread count or schedule.
template <class F>
void for_each_index_parallel(std::size_t count, int threads, F&& f)
{
    std::exception_ptr err;
    std::mutex m;
    const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long long i = 0; i < n; ++i) {
        try {
            f(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(m);
            if (!err)
                err = std::current_exception();
        }
    }
    if (err)
        std::rethrow_exception(err);
}

template <class F>
void for_each_index(std::size_t count, const Execution& ex, F&& f)
{
    const int t = resolved_threads(ex);
    if (t <= 1 || count <= 1)
        for_each_index_serial(count, f);
    else
        for_each_index_parallel(count, t, f);
}

} // namespace pinning
