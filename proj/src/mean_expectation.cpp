#include "pinning/mean_expectation.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "pinning/disorder.hpp"
#include "pinning/errors.hpp"

namespace pinning::disorder {

double MeanFunction::operator()(double x) const
{
    if (kind == Kind::InversePower)
        return std::pow(1.0 - x, -p);
    return -std::log1p(-x);
}

double MeanFunction::coefficient(int k) const
{
    if (k < 0)
        return 0.0;
    if (kind == Kind::NegLog)
        return k == 0 ? 0.0 : 1.0 / k;
    // (p)_k / k!
    return std::exp(std::lgamma(p + k) - std::lgamma(p) - std::lgamma(k + 1.0));
}

double MeanFunction::coefficient_ratio(int k) const
{
    if (kind == Kind::NegLog)
        return static_cast<double>(k) / (k + 2);
    return (p + k) * (p + k + 1) / ((k + 1.0) * (k + 2.0));
}

namespace {

void check_beta(double beta)
{
    if (!(beta >= 0.0) || !(beta < 1.0))
        throw DomainError("Rademacher mean expectation needs 0 <= beta < 1");
}

// sup over k' >= k of coefficient_ratio(k')
double ratio_sup(const MeanFunction& f, int k)
{
    if (f.kind == MeanFunction::Kind::NegLog)
        return 1.0;
    return std::max(1.0, f.coefficient_ratio(k));
}

} // namespace

MeanExpectation rademacher_mean_expectation(const MeanFunction& f, double beta, std::int64_t n, std::int64_t exact_limit)
{
    check_beta(beta);
    if (n <= 0)
        throw UsageError("window length must be positive");
    MeanExpectation out;
    if (n <= exact_limit) {
        const int ni = static_cast<int>(n);
        const auto w = binomial_weights(ni);
        double acc = 0.0;
        for (int k = 0; k <= ni; ++k)
            if (w[k] > 0.0)
                acc += w[k] * f(beta * (2.0 * k - ni) / ni);
        out.value = acc;
        out.error = 1e-15 * static_cast<double>(n + 1) * std::fabs(acc);
        out.exact = true;
        return out;
    }
    const double nd = static_cast<double>(n);
    const double b2 = beta * beta;
    const double m2 = 1.0 / nd;
    const double m4 = (3.0 * nd - 2.0) / (nd * nd * nd);
    const double m6 = (15.0 * nd * nd - 30.0 * nd + 16.0) / (nd * nd * nd * nd * nd);
    const double head = f.coefficient(0) + f.coefficient(2) * b2 * m2 + f.coefficient(4) * b2 * b2 * m4
                        + f.coefficient(6) * b2 * b2 * b2 * m6;
    double rem = 0.0;
    double mj = 15.0 / (nd * nd * nd); // (2j-1)!!/n^j at j = 3
    double cb = f.coefficient(6) * b2 * b2 * b2;
    for (int j = 4; j < 200000; ++j) {
        mj = std::min(1.0, mj * (2.0 * j - 1.0) / nd);
        cb *= f.coefficient_ratio(2 * j - 2) * b2;
        rem += cb * mj;
        // crude bound on everything after j, using min(...) <= 1
        const double q = b2 * ratio_sup(f, 2 * j);
        if (q < 1.0) {
            const double crude = cb * f.coefficient_ratio(2 * j) * b2 / (1.0 - q);
            if (crude <= 1e-17 * std::fabs(head) || crude < 1e-300) {
                rem += crude;
                break;
            }
        }
    }
    out.value = head + 0.5 * rem;
    out.error = 0.5 * rem + 4 * std::numeric_limits<double>::epsilon() * std::fabs(head);
    out.exact = false;
    return out;
}

MeanAsymptotics rademacher_mean_asymptotics(const MeanFunction& f, double beta)
{
    check_beta(beta);
    MeanAsymptotics a;
    const double b2 = beta * beta;
    a.f0 = f.coefficient(0);
    a.c2_beta2 = f.coefficient(2) * b2;
    // min(1, (2j-1)!!/n^j) <= ((2j-1)!!)^{2/j} / n^2 for j >= 2
    double cb = f.coefficient(2) * b2;
    double b = 0.0;
    for (int j = 2; j < 200000; ++j) {
        cb *= f.coefficient_ratio(2 * j - 2) * b2;
        const double ldf = std::lgamma(2.0 * j + 1.0) - j * std::log(2.0) - std::lgamma(j + 1.0);
        b += cb * std::exp(2.0 * ldf / j);
        // later terms: ((2j-1)!!)^{2/j} <= 4 j^2
        const double jj = j + 1.0;
        const double q = b2 * ratio_sup(f, 2 * j) * ((jj + 1) / jj) * ((jj + 1) / jj);
        if (q < 1.0) {
            const double next = cb * f.coefficient_ratio(2 * j) * b2 * 4.0 * jj * jj;
            const double crude = next / (1.0 - q);
            if (crude <= 1e-15 * b || crude < 1e-300) {
                b += crude;
                break;
            }
        }
    }
    a.b = b * (1.0 + 1e-12);
    return a;
}

Bracket weighted_mean_tail(const MeanFunction& f, double beta, double s, std::uint64_t m)
{
    const auto a = rademacher_mean_asymptotics(f, beta);
    const Bracket t0 = power_sum_tail(s, m);
    const Bracket t1 = power_sum_tail(s + 1.0, m);
    const Bracket t2 = power_sum_tail(s + 2.0, m);
    Bracket out = a.f0 * t0 + a.c2_beta2 * t1;
    out.upper += a.b * t2.upper;
    return out;
}

} // namespace pinning::disorder
