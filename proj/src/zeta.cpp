#include "pinning/zeta.hpp"

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "pinning/errors.hpp"

namespace pinning {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

void NeumaierSum::add(double x)
{
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x))
        comp += (sum - t) + x;
    else
        comp += (x - t) + sum;
    sum = t;
}

Bracket power_sum_tail(double s, std::uint64_t n)
{
    if (!(s > 1.0))
        throw DomainError("power_sum_tail needs s > 1");
    const double a = static_cast<double>(n) + 1.0;
    const double lo = std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
    const double hi = std::pow(a - 0.5, 1.0 - s) / (s - 1.0);
    // a few ulps of slack for pow
    return {lo * (1.0 - 8 * kEps), hi * (1.0 + 8 * kEps)};
}

double upper_incomplete_gamma(double a, double z)
{
    if (!(z > 0.0))
        throw DomainError("upper_incomplete_gamma needs z > 0");
    if (a > 0.0)
        return boost::math::tgamma(a, z);
    if (a == 0.0)
        return boost::math::expint(1, z);
    // Gamma(a,z) = (Gamma(a+1,z) - z^a e^{-z}) / a
    const double up = upper_incomplete_gamma(a + 1.0, z);
    const double v = (up - std::pow(z, a) * std::exp(-z)) / a;
    return std::max(v, 0.0);
}

double power_sum_tail_upper(double s, std::uint64_t n, double x)
{
    if (!(x > 0.0) || x > 1.0)
        throw DomainError("power_sum_tail_upper needs 0 < x <= 1");
    if (x == 1.0) {
        if (s <= 1.0)
            return std::numeric_limits<double>::infinity();
        return power_sum_tail(s, n).upper;
    }
    const double a = static_cast<double>(n) + 1.0;
    const double mu = -std::log(x);
    // geometric domination: k^{-s} <= a^{-s} for s >= 0
    double best = std::pow(a, -s) * std::exp(-mu * a) / (-std::expm1(-mu));
    if (s < 0.0)
        best = std::numeric_limits<double>::infinity();
    const double z = mu * (a - 0.5);
    if (z < 50.0) {
        // int_{n+1/2}^inf t^{-s} e^{-mu t} dt = mu^{s-1} Gamma(1-s, z); loses ~log10(z) digits in the recurrence
        const double integral = std::pow(mu, s - 1.0) * upper_incomplete_gamma(1.0 - s, z) * (1.0 + 1e-9);
        if (integral > 0.0)
            best = std::min(best, integral);
    }
    if (s > 1.0)
        best = std::min(best, power_sum_tail(s, n).upper);
    return best;
}

Bracket power_series_tail(double s, std::uint64_t n, double x)
{
    if (!(x > 0.0) || x > 1.0)
        throw DomainError("power_series_tail needs 0 < x <= 1");
    if (s < 0.0)
        throw DomainError("power_series_tail needs s >= 0");
    if (x == 1.0) {
        if (s <= 1.0)
            return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        return power_sum_tail(s, n);
    }
    const double a = static_cast<double>(n) + 1.0;
    const double mu = -std::log(x);
    auto integral = [&](double from) {
        const double z = mu * from;
        if (z > 600.0)
            return 0.0;
        return std::pow(mu, s - 1.0) * upper_incomplete_gamma(1.0 - s, z);
    };
    const double first = std::pow(a, -s) * std::exp(-mu * a);
    const double lo = (integral(a) + 0.5 * first) * (1.0 - 1e-9);
    double hi = integral(a - 0.5) * (1.0 + 1e-9);
    // the integral form loses digits deep in the tail; the geometric bound takes over there
    hi = std::min(hi, power_sum_tail_upper(s, n, x));
    return {std::min(lo, hi), hi};
}

ZetaValue riemann_zeta(double s, double tol)
{
    if (!(s > 1.0))
        throw DomainError("riemann_zeta needs s > 1");
    if (!(tol > 0.0))
        throw UsageError("riemann_zeta needs tol > 0");
    NeumaierSum partial;
    std::uint64_t n = 0;
    std::uint64_t target = 1024;
    constexpr std::uint64_t kCap = std::uint64_t(1) << 27;
    for (;;) {
        for (; n < target; ++n)
            partial.add(std::pow(static_cast<double>(n + 1), -s));
        const Bracket tail = power_sum_tail(s, n);
        const double p = partial.value();
        const double round = 4 * kEps * p;
        ZetaValue z;
        z.n_max = n;
        z.partial_sum = p;
        z.bracket = {p + tail.lower - round, p + tail.upper + round};
        z.value = p + tail.mid();
        if (z.bracket.width() * 0.5 <= tol || target >= kCap)
            return z;
        target *= 2;
    }
}

} // namespace pinning
