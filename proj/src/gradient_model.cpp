#include "pinning/gradient_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pinning/errors.hpp"
#include "pinning/zeta.hpp"

namespace pinning::gradient {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void GradientParams::validate() const
{
    if (d < 1)
        throw UsageError("d must be a positive integer");
    if (!(beta >= 0.0) || !(beta < 1.0))
        throw DomainError("gradient model needs 0 <= beta < 1");
    if (!(eps >= 0.0) || std::isinf(eps))
        throw DomainError("eps must be finite and nonnegative");
    if (n < 1)
        throw UsageError("N must be at least 1");
}

InverseWeightPrefix InverseWeightPrefix::build(std::span<const double> omega, double beta, int n)
{
    if (static_cast<int>(omega.size()) < n)
        throw UsageError("disorder sequence shorter than N");
    InverseWeightPrefix p;
    p.s.resize(static_cast<std::size_t>(n) + 1);
    p.s[0] = 0.0;
    for (int i = 0; i < n; ++i)
        p.s[i + 1] = p.s[i] + 1.0 / (1.0 + beta * omega[i]);
    return p;
}

double det_gradient(std::span<const double> a)
{
    if (a.empty())
        throw UsageError("det_gradient needs a nonempty sequence");
    double prod = 1.0, inv = 0.0;
    for (double x : a) {
        if (!(x > 0.0))
            throw DomainError("det_gradient needs positive entries");
        prod *= x;
        inv += 1.0 / x;
    }
    return prod * inv;
}

DenseMatrix gradient_matrix(std::span<const double> a)
{
    const int n = static_cast<int>(a.size()) - 1;
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = a[i] + a[i + 1];
        if (i + 1 < n) {
            m(i, i + 1) = -a[i + 1];
            m(i + 1, i) = -a[i + 1];
        }
    }
    return m;
}

double segment_weight(double s, int d)
{
    return std::pow(kTwoPi * s, -0.5 * d);
}

LogWeight raw_partition_eps0(const disorder::DisorderSequence& omega, const GradientParams& p)
{
    p.validate();
    if (static_cast<int>(omega.size()) < p.n)
        throw UsageError("disorder sequence shorter than N");
    double log_prod = 0.0, inv = 0.0;
    for (int i = 0; i < p.n; ++i) {
        const double a = 1.0 + p.beta * omega[i];
        log_prod += std::log(a);
        inv += 1.0 / a;
    }
    if (p.endpoint == Endpoint::Free)
        return LogWeight(-0.5 * p.d * log_prod);
    // (sqrt(2 pi) sqrt(det G))^{-d}
    return LogWeight(-0.5 * p.d * (std::log(kTwoPi) + log_prod + std::log(inv)));
}

namespace {

template <int D>
inline double inv_pow_half(double x)
{
    const double r = 1.0 / x;
    double v = (D & 1) ? std::sqrt(r) : 1.0;
    for (int k = 0; k < D / 2; ++k)
        v *= r;
    return v;
}

template <int D>
double inner_sum(const double* z, const double* u, double un, int count)
{
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (int m = 1; m < count; ++m)
        acc += z[m] * inv_pow_half<D>(un - u[m]);
    return acc;
}

double inner_sum_generic(const double* z, const double* u, double un, int count, int d)
{
    double acc = 0.0;
    for (int m = 1; m < count; ++m)
        acc += z[m] * std::pow(un - u[m], -0.5 * d);
    return acc;
}

double inner(const double* z, const double* u, double un, int count, int d)
{
    switch (d) {
    case 1: return inner_sum<1>(z, u, un, count);
    case 2: return inner_sum<2>(z, u, un, count);
    case 3: return inner_sum<3>(z, u, un, count);
    case 4: return inner_sum<4>(z, u, un, count);
    case 5: return inner_sum<5>(z, u, un, count);
    case 6: return inner_sum<6>(z, u, un, count);
    case 7: return inner_sum<7>(z, u, un, count);
    case 8: return inner_sum<8>(z, u, un, count);
    default: return inner_sum_generic(z, u, un, count, d);
    }
}

} // namespace

std::vector<double> pinned_recursion(std::span<const double> u, int d, double eps)
{
    const int n = static_cast<int>(u.size()) - 1;
    std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
    // z[m] = Zcal_m e^{-sigma}, rescaled whenever z leaves [1e-100, 1e100]
    std::vector<double> z(static_cast<std::size_t>(n) + 1, 0.0);
    double sigma = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double log_w0 = -0.5 * d * std::log(u[k] - u[0]);
        double zk = std::exp(log_w0 - sigma);
        if (eps > 0.0 && k > 1)
            zk += eps * inner(z.data(), u.data(), u[k], k, d);
        if (zk == 0.0 || !std::isfinite(zk)) {
            // only reachable when the rescale lags a huge jump; recompute in log space
            throw Inconsistency("partition recursion left the representable range");
        }
        z[k] = zk;
        out[k] = std::log(zk) + sigma;
        if (zk > 1e100 || zk < 1e-100) {
            const double inv = 1.0 / zk;
            for (int m = 1; m <= k; ++m)
                z[m] *= inv;
            sigma += std::log(zk);
        }
    }
    return out;
}

std::vector<double> adjusted_partition_prefix(std::span<const double> omega, const GradientParams& p)
{
    p.validate();
    const auto pre = InverseWeightPrefix::build(omega, p.beta, p.n);
    std::vector<double> u(pre.s.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = kTwoPi * pre.s[i];
    return pinned_recursion(u, p.d, p.eps);
}

std::vector<double> renewal_partition_prefix(std::span<const double> omega, int d, double beta, double eps, int n)
{
    if (!(eps > 0.0))
        throw DomainError("renewal convention needs eps > 0");
    GradientParams p{d, beta, eps, n, Endpoint::Pinned};
    auto out = adjusted_partition_prefix(omega, p);
    const double le = std::log(eps);
    out[0] = 0.0;
    for (int k = 1; k <= n; ++k)
        out[k] += le;
    return out;
}

std::vector<double> renewal_tail_masses(int d, int n_max)
{
    if (d < 3)
        throw Unsupported("the renewal kernel is normalizable only for d >= 3");
    const double s = 0.5 * d;
    const auto zeta = riemann_zeta(s, 1e-15);
    // backward accumulation from a far anchor keeps relative accuracy for small tails
    const std::uint64_t anchor = std::max<std::uint64_t>(static_cast<std::uint64_t>(n_max) * 4, 1u << 20);
    double t = power_sum_tail(s, anchor).mid();
    for (std::uint64_t m = anchor; m > static_cast<std::uint64_t>(n_max); --m)
        t += std::pow(static_cast<double>(m), -s);
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
    out[n_max] = t;
    for (int m = n_max; m >= 1; --m) {
        t += std::pow(static_cast<double>(m), -s);
        out[m - 1] = t;
    }
    for (double& x : out)
        x /= zeta.value;
    return out;
}

LogWeight adjusted_partition(const disorder::DisorderSequence& omega, const GradientParams& p)
{
    p.validate();
    if (p.endpoint == Endpoint::Pinned) {
        const auto pre = adjusted_partition_prefix(omega.values, p);
        return LogWeight(pre[p.n]);
    }
    if (p.d < 3)
        throw Unsupported("free endpoint uses the renewal kernel, which needs d >= 3");
    if (!(p.eps > 0.0))
        throw DomainError("free endpoint uses the eps^l convention and needs eps > 0");
    // Zf_N = Y_N + sum_{n=1}^N Y_{N-n} sum_{m>n} K(m)
    const auto y = renewal_partition_prefix(omega.values, p.d, p.beta, p.eps, p.n);
    const auto tail = renewal_tail_masses(p.d, p.n);
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(p.n) + 1);
    terms.push_back(y[p.n]);
    for (int n = 1; n <= p.n; ++n)
        terms.push_back(y[p.n - n] + std::log(tail[n]));
    return LogWeight(log_sum_exp(std::span<const double>(terms)));
}

double free_endpoint_log_gap_bound(const GradientParams& p)
{
    if (p.d < 3)
        throw Unsupported("free endpoint bound needs d >= 3");
    const double s = 0.5 * p.d;
    const double c = 1.0 / (s - 1.0);
    const double epsc0 = std::pow(kTwoPi, s) / riemann_zeta(s).value;
    return std::log1p(c * p.n * epsc0 / (p.eps * std::pow(1.0 - p.beta, s)));
}

LogWeight enumerate_configuration(const disorder::DisorderSequence& omega, const GradientParams& p,
                                  const PinningConfiguration& c)
{
    const auto& s = c.sites;
    if (s.size() < 2 || s.front() != 0 || s.back() != p.n)
        throw UsageError("configuration must run from 0 to N");
    const int l = static_cast<int>(s.size()) - 1;
    if (l > 1 && p.eps == 0.0)
        return LogWeight::zero();
    double lv = (l - 1) * (l > 1 ? std::log(p.eps) : 0.0) - 0.5 * p.d * l * std::log(kTwoPi);
    for (int j = 1; j <= l; ++j) {
        if (s[j] <= s[j - 1])
            throw UsageError("configuration sites must increase");
        double seg = 0.0;
        for (int i = s[j - 1]; i < s[j]; ++i)
            seg += 1.0 / (1.0 + p.beta * omega[i]);
        lv -= 0.5 * p.d * std::log(seg);
    }
    return LogWeight(lv);
}

LogWeight enumerate_partition_oracle(const disorder::DisorderSequence& omega, const GradientParams& p)
{
    p.validate();
    if (p.n > 20)
        throw Unsupported("enumeration oracle is limited to N <= 20");
    if (p.endpoint != Endpoint::Pinned)
        throw Unsupported("enumeration oracle covers the pinned endpoint");
    if (static_cast<int>(omega.size()) < p.n)
        throw UsageError("disorder sequence shorter than N");
    const std::uint32_t interior = static_cast<std::uint32_t>(p.n - 1);
    std::vector<double> terms;
    terms.reserve(std::size_t(1) << interior);
    PinningConfiguration c;
    for (std::uint32_t mask = 0; mask < (1u << interior); ++mask) {
        c.sites.clear();
        c.sites.push_back(0);
        for (std::uint32_t b = 0; b < interior; ++b)
            if (mask & (1u << b))
                c.sites.push_back(static_cast<int>(b) + 1);
        c.sites.push_back(p.n);
        terms.push_back(enumerate_configuration(omega, p, c).log_value);
    }
    return LogWeight(log_sum_exp(std::span<const double>(terms)));
}

McEstimate quenched_free_energy_mc(const GradientParams& p, std::size_t samples, std::uint64_t seed,
                                   FreeEnergyNormalization norm, const Execution& ex)
{
    p.validate();
    if (samples < 2)
        throw UsageError("Monte Carlo needs at least two samples");
    if (p.endpoint == Endpoint::Free && norm == FreeEnergyNormalization::Ratio)
        throw Unsupported("the ratio normalization is defined for the pinned endpoint");
    std::vector<double> values(samples);
    for_each_index(samples, ex, [&](std::size_t i) {
        const auto omega = disorder::sample(disorder::DisorderLaw::Rademacher, static_cast<std::size_t>(p.n), seed, i);
        double lz;
        double lw0;
        if (p.endpoint == Endpoint::Pinned) {
            const auto pre = InverseWeightPrefix::build(omega.values, p.beta, p.n);
            std::vector<double> u(pre.s.size());
            for (std::size_t k = 0; k < u.size(); ++k)
                u[k] = kTwoPi * pre.s[k];
            lz = pinned_recursion(u, p.d, p.eps)[p.n];
            lw0 = -0.5 * p.d * std::log(u[p.n]);
        } else {
            lz = adjusted_partition(omega, p).log_value;
            lw0 = 0.0;
        }
        const double num = (norm == FreeEnergyNormalization::Ratio) ? lz - lw0 : lz;
        values[i] = num / p.n;
    });
    return summarize(values);
}

double raw_free_energy_limit_eps0(double beta, int d)
{
    if (!(beta >= 0.0) || !(beta < 1.0))
        throw DomainError("needs 0 <= beta < 1");
    return -0.25 * d * std::log1p(-beta * beta);
}

} // namespace pinning::gradient
