#include "pinning/generating.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "pinning/errors.hpp"

namespace pinning {

Bracket GeneratingRoot::free_energy_bracket() const
{
    if (!has_root())
        return {0.0, 0.0};
    return {-std::log(x_bracket.upper), -std::log(x_bracket.lower)};
}

double generating_series(std::span<const double> coeff, double mu)
{
    if (mu == 0.0) {
        NeumaierSum s;
        for (double c : coeff)
            s.add(c);
        return s.value();
    }
    // powers re-anchored every 32 terms to keep the drift at a few ulps
    double acc = 0.0;
    const std::size_t n = coeff.size();
    const double r = std::exp(-mu);
    for (std::size_t base = 0; base < n; base += 32) {
        double p = std::exp(-mu * static_cast<double>(base + 1));
        if (p == 0.0)
            break;
        const std::size_t end = std::min(n, base + 32);
        for (std::size_t i = base; i < end; ++i) {
            acc += coeff[i] * p;
            p *= r;
        }
    }
    return acc;
}

namespace {

// Smallest mu >= 0 with f(mu) <= 1, f decreasing with f(0) > 1.
double bisect_mu(const std::function<double(double)>& f)
{
    double hi = 1.0;
    int guard = 0;
    while (f(hi) > 1.0) {
        hi *= 2.0;
        if (++guard > 200)
            throw Inconsistency("generating series does not decay");
    }
    double lo = 0.0;
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (f(mid) > 1.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 2e-16 * hi)
            break;
    }
    return 0.5 * (lo + hi);
}

} // namespace

GeneratingRoot solve_generating_equation(std::span<const double> coeff, const TailModel& tail, double tol)
{
    if (!(tol > 0.0))
        throw UsageError("tolerance must be positive");
    for (double c : coeff)
        if (!(c >= 0.0))
            throw DomainError("generating coefficients must be nonnegative");
    auto with = [&](const TailBound& t) {
        return [&coeff, t](double mu) { return generating_series(coeff, mu) + (t ? t(std::exp(-mu)) : 0.0); };
    };
    const auto g_lo = with(tail.lower);
    const auto g_hi = with(tail.upper);
    const auto g_mid = with(tail.estimate);
    GeneratingRoot out;
    out.n_max = coeff.size();
    if (g_hi(0.0) < 1.0) {
        out.status = RootStatus::NoRoot;
        out.residual = g_mid(0.0) - 1.0;
        return out;
    }
    out.status = RootStatus::Root;
    const double mu_hi = bisect_mu(g_hi);
    const double mu_lo = g_lo(0.0) > 1.0 ? bisect_mu(g_lo) : 0.0;
    const double mu = g_mid(0.0) > 1.0 ? bisect_mu(g_mid) : 0.0;
    out.x = std::exp(-mu);
    out.x_bracket = {std::exp(-mu_hi), std::exp(-mu_lo)};
    out.residual = g_mid(mu) - 1.0;
    // long series cannot be summed more precisely than a few ulps per term
    const double floor = tol + 2.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(coeff.size());
    if (std::fabs(out.residual) > floor && g_mid(0.0) > 1.0)
    {
        char buf[128];
        std::snprintf(buf, sizeof buf, "generating-equation bisection missed tolerance (residual %.3e at mu %.6e)",
                      out.residual, mu);
        throw Inconsistency(buf);
    }
    return out;
}

GeneratingRoot solve_generating_equation(const std::function<double(std::size_t)>& coeff,
                                         const SeriesTruncation& truncation, double tol)
{
    if (truncation.tail_bound < 0.0)
        throw UsageError("tail bound must be nonnegative");
    std::vector<double> c(truncation.n_max);
    for (std::size_t n = 1; n <= truncation.n_max; ++n)
        c[n - 1] = coeff(n);
    const double tb = truncation.tail_bound;
    const double nm = static_cast<double>(truncation.n_max);
    // each omitted term carries x^n <= x^{n_max+1}
    TailModel tail;
    tail.upper = [tb, nm](double x) { return tb * std::pow(x, nm + 1.0); };
    return solve_generating_equation(c, tail, tol);
}

} // namespace pinning
