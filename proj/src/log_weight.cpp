#include "pinning/log_weight.hpp"

#include <algorithm>

#include "pinning/errors.hpp"

namespace pinning {

LogWeight LogWeight::from_linear(double x)
{
    if (x < 0.0 || std::isnan(x))
        throw DomainError("LogWeight needs a nonnegative value");
    return LogWeight(std::log(x));
}

double log_add_exp(double a, double b)
{
    if (a < b)
        std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity())
        return a;
    return a + std::log1p(std::exp(b - a));
}

LogWeight& LogWeight::operator+=(LogWeight o)
{
    log_value = log_add_exp(log_value, o.log_value);
    return *this;
}

double log_sum_exp(std::span<const double> log_values)
{
    if (log_values.empty())
        throw UsageError("log_sum_exp of an empty list");
    const double m = *std::max_element(log_values.begin(), log_values.end());
    if (m == -std::numeric_limits<double>::infinity())
        return m;
    if (std::isinf(m))
        return m;
    double s = 0.0;
    for (double v : log_values)
        s += std::exp(v - m);
    return m + std::log(s);
}

LogWeight log_sum_exp(std::span<const LogWeight> values)
{
    if (values.empty())
        throw UsageError("log_sum_exp of an empty list");
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& v : values)
        m = std::max(m, v.log_value);
    if (std::isinf(m))
        return LogWeight(m);
    double s = 0.0;
    for (const auto& v : values)
        s += std::exp(v.log_value - m);
    return LogWeight(m + std::log(s));
}

} // namespace pinning
