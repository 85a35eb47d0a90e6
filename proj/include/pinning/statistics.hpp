#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace pinning {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

// Sequential pass in index order, so the result is independent of how the values were produced.
inline McEstimate summarize(std::span<const double> v)
{
    McEstimate e;
    e.samples = v.size();
    if (v.empty())
        return e;
    double s = 0.0;
    for (double x : v)
        s += x;
    e.mean = s / static_cast<double>(v.size());
    if (v.size() < 2)
        return e;
    double ss = 0.0;
    for (double x : v)
        ss += (x - e.mean) * (x - e.mean);
    e.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    return e;
}

} // namespace pinning
