#include "pinning/gradient_annealed.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <numbers>

#include "pinning/errors.hpp"
#include "pinning/gradient_model.hpp"

namespace pinning::gradient {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_beta(double beta)
{
    if (!(beta >= 0.0) || !(beta < 1.0))
        throw DomainError("gradient model needs 0 <= beta < 1");
}

void check_dim(int d)
{
    if (d < 1)
        throw DomainError("dimension must be positive");
}

// R_n = E (1 - beta wbar_n)^{-d/2}, n = 1..m (entry 0 unused)
std::vector<disorder::MeanExpectation> r_table(double beta, int d, std::int64_t m, std::int64_t exact_limit)
{
    std::vector<disorder::MeanExpectation> r(static_cast<std::size_t>(m) + 1);
    const auto f = disorder::MeanFunction::inverse_power(0.5 * d);
    for_each_index(static_cast<std::size_t>(m), Execution{}, [&](std::size_t i) {
        r[i + 1] = disorder::rademacher_mean_expectation(f, beta, static_cast<std::int64_t>(i) + 1, exact_limit);
    });
    return r;
}

double pow_neg(std::int64_t n, double s) { return std::pow(static_cast<double>(n), -s); }

// Bracket for sum_{n>m} c n^{-s} R_n x^n, using 1 <= R_n <= r_m_upper (R_n is nonincreasing in n).
TailModel renewal_tail_model(double c, double s, std::uint64_t m, double r_m_upper, double r_est)
{
    TailModel t;
    t.lower = [=](double x) { return c * power_series_tail(s, m, x).lower; };
    t.upper = [=](double x) { return c * r_m_upper * power_series_tail(s, m, x).upper; };
    t.estimate = [=](double x) {
        const Bracket b = power_series_tail(s, m, x);
        const double hi = std::isfinite(b.upper) ? b.upper : b.lower;
        return c * r_est * 0.5 * (b.lower + hi);
    };
    return t;
}

FreeEnergyValue to_free_energy(const GeneratingRoot& g)
{
    FreeEnergyValue out;
    out.localized = g.has_root();
    out.value = g.free_energy();
    out.bracket = g.has_root() ? g.free_energy_bracket() : Bracket{0.0, 0.0};
    return out;
}

} // namespace

double psi(double x, int d)
{
    if (!(x < 1.0))
        throw DomainError("psi needs x < 1");
    return -0.5 * d * std::log1p(-x);
}

double psi_cubic_lower_bound(double x, int d) { return 0.5 * d * (x + x * x / 2.0 + x * x * x / 3.0); }

double epsilon_c0(int d)
{
    if (d < 3)
        throw DomainError("eps_c(0) is finite only for d >= 3");
    return std::pow(kTwoPi, 0.5 * d) / riemann_zeta(0.5 * d).value;
}

RenewalKernel renewal_kernel(int d, std::int64_t n_max)
{
    if (d < 3)
        throw DomainError("the renewal kernel is normalizable only for d >= 3");
    RenewalKernel k;
    k.d = d;
    k.zeta = riemann_zeta(0.5 * d);
    k.n_max = n_max;
    const Bracket t = power_sum_tail(0.5 * d, static_cast<std::uint64_t>(n_max));
    k.tail = {t.lower / k.zeta.bracket.upper, t.upper / k.zeta.bracket.lower};
    return k;
}

disorder::MeanExpectation expected_segment_weight(std::int64_t n, double beta, int d, std::int64_t exact_limit)
{
    check_beta(beta);
    check_dim(d);
    if (n <= 0)
        throw UsageError("segment length must be positive");
    const double s = 0.5 * d;
    disorder::MeanExpectation out;
    if (n <= exact_limit) {
        const int ni = static_cast<int>(n);
        const double up = 1.0 / (1.0 + beta), dn = 1.0 / (1.0 - beta);
        out.value = disorder::rademacher_window_expectation(
            [&](int k) { return std::pow(kTwoPi * (k * up + (ni - k) * dn), -s); }, ni);
        out.error = 1e-15 * static_cast<double>(n + 1) * out.value;
        return out;
    }
    const auto r = disorder::rademacher_mean_expectation(disorder::MeanFunction::inverse_power(s), beta, n, exact_limit);
    const double pre = std::pow(kTwoPi * static_cast<double>(n), -s) * std::pow(1.0 - beta * beta, s);
    out.value = pre * r.value;
    out.error = pre * r.error;
    out.exact = false;
    return out;
}

disorder::MeanExpectation annealed_coefficient(std::int64_t n, double beta, double eps, int d, std::int64_t exact_limit)
{
    if (!(eps >= 0.0))
        throw DomainError("eps must be nonnegative");
    auto e = expected_segment_weight(n, beta, d, exact_limit);
    e.value *= eps;
    e.error *= eps;
    return e;
}

CriticalPoint annealed_critical_point(double beta, int d, const AnnealedOptions& opt)
{
    check_beta(beta);
    check_dim(d);
    if (d <= 2)
        return {};
    const double s = 0.5 * d;
    const std::int64_t m = opt.n_max;
    std::vector<disorder::MeanExpectation> w(static_cast<std::size_t>(m) + 1);
    for_each_index(static_cast<std::size_t>(m), Execution{}, [&](std::size_t i) {
        w[i + 1] = expected_segment_weight(static_cast<std::int64_t>(i) + 1, beta, d, opt.exact_limit);
    });
    NeumaierSum sum;
    double err = 0.0;
    for (std::int64_t n = 1; n <= m; ++n) {
        sum.add(w[n].value);
        err += w[n].error;
    }
    err += 4.0 * m * std::numeric_limits<double>::epsilon() * sum.value();
    // sum_{n>m} E (2 pi S_n)^{-s} = (2 pi)^{-s} (1 - beta^2)^s sum n^{-s} R_n
    const double c = std::pow(kTwoPi, -s) * std::pow(1.0 - beta * beta, s);
    const Bracket tail = c * disorder::weighted_mean_tail(disorder::MeanFunction::inverse_power(s), beta, s,
                                                          static_cast<std::uint64_t>(m));
    const Bracket total{sum.value() - err + tail.lower, sum.value() + err + tail.upper};
    CriticalPoint out;
    out.bracket = {1.0 / total.upper, 1.0 / total.lower};
    out.value = 1.0 / total.mid();
    return out;
}

CriticalPoint annealed_critical_point_tilted_form(double beta, int d, const AnnealedOptions& opt)
{
    if (d < 3)
        throw DomainError("the tilted form needs d >= 3");
    const auto b = tilted_bundle(beta, d, opt.n_max, opt.exact_limit);
    const double s = 0.5 * d;
    const double pre = std::pow(kTwoPi, s) / b.zeta.value * std::pow(1.0 - beta * beta, -s);
    const double z_lo = b.zeta.bracket.lower / b.zeta.value, z_hi = b.zeta.bracket.upper / b.zeta.value;
    CriticalPoint out;
    out.value = pre / b.r.mid();
    out.bracket = {pre / (b.r.upper * z_hi), pre / (b.r.lower * z_lo)};
    return out;
}

FreeEnergyValue annealed_free_energy(double beta, double eps, int d, const AnnealedOptions& opt)
{
    check_beta(beta);
    check_dim(d);
    if (!(eps >= 0.0))
        throw DomainError("eps must be nonnegative");
    if (eps == 0.0)
        return {};
    const double s = 0.5 * d;
    const std::int64_t m = opt.n_max;
    const auto r = r_table(beta, d, m, opt.exact_limit);
    const double a = eps * std::pow(kTwoPi, -s) * std::pow(1.0 - beta * beta, s);
    std::vector<double> coeff(static_cast<std::size_t>(m));
    double err = 0.0;
    for (std::int64_t n = 1; n <= m; ++n) {
        coeff[n - 1] = a * pow_neg(n, s) * r[n].value;
        err += a * pow_neg(n, s) * r[n].error;
    }
    const double r_est = 1.0 + 0.5 * d * (0.5 * d + 1.0) * beta * beta / (2.0 * static_cast<double>(m));
    TailModel tail = renewal_tail_model(a, s, static_cast<std::uint64_t>(m), r[m].value + r[m].error, r_est);
    // coefficient errors go into the upper side
    auto up = tail.upper;
    tail.upper = [up, err](double x) { return up(x) + err; };
    return to_free_energy(solve_generating_equation(coeff, tail));
}

FreeEnergyValue homogeneous_free_energy(double kappa, double eps, int d, std::int64_t n_max)
{
    check_dim(d);
    if (!(kappa > 0.0) || !(eps >= 0.0))
        throw DomainError("need kappa > 0 and eps >= 0");
    if (eps == 0.0)
        return {};
    const double s = 0.5 * d;
    const double a = eps * std::pow(kTwoPi * kappa, -s);
    std::vector<double> coeff(static_cast<std::size_t>(n_max));
    for (std::int64_t n = 1; n <= n_max; ++n)
        coeff[n - 1] = a * pow_neg(n, s);
    return to_free_energy(solve_generating_equation(coeff, renewal_tail_model(a, s, n_max, 1.0, 1.0)));
}

TiltedKernelBundle tilted_bundle(double beta, int d, std::int64_t n_max, std::int64_t exact_limit)
{
    check_beta(beta);
    if (d < 3)
        throw DomainError("the tilted kernel needs d >= 3");
    TiltedKernelBundle b;
    b.beta = beta;
    b.d = d;
    b.n_max = n_max;
    const double s = 0.5 * d;
    b.zeta = riemann_zeta(s);
    const auto r = r_table(beta, d, n_max, exact_limit);
    b.r_n.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    b.r_n_err.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    NeumaierSum sum, msum;
    double err = 0.0, merr = 0.0;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        b.r_n[n] = r[n].value;
        b.r_n_err[n] = r[n].error;
        const double w = pow_neg(n, s);
        sum.add(w * r[n].value);
        err += w * r[n].error;
        msum.add(n * w * r[n].value);
        merr += n * w * r[n].error;
    }
    const double round = 4.0 * n_max * std::numeric_limits<double>::epsilon();
    err += round * sum.value();
    merr += round * msum.value();
    b.r_sum = {sum.value() - err, sum.value() + err};
    const auto f = disorder::MeanFunction::inverse_power(s);
    b.r_tail = disorder::weighted_mean_tail(f, beta, s, static_cast<std::uint64_t>(n_max));
    const Bracket tot = b.r_sum + b.r_tail;
    b.r = {tot.lower / b.zeta.bracket.upper, tot.upper / b.zeta.bracket.lower};
    const double norm = b.zeta.value * b.r.mid();
    b.kbar.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (std::int64_t n = 1; n <= n_max; ++n)
        b.kbar[n] = b.r_n[n] * pow_neg(n, s) / norm;
    b.kbar_tail = (1.0 / norm) * b.r_tail;
    if (d >= 5) {
        const Bracket mt = disorder::weighted_mean_tail(f, beta, s - 1.0, static_cast<std::uint64_t>(n_max));
        // both numerator and R carry brackets; combine conservatively
        const double num_lo = msum.value() - merr + mt.lower, num_hi = msum.value() + merr + mt.upper;
        const double z_r_lo = b.zeta.bracket.lower * b.r.lower, z_r_hi = b.zeta.bracket.upper * b.r.upper;
        b.mean = {num_lo / z_r_hi, num_hi / z_r_lo};
        b.c_beta = {1.0 / b.mean.upper, 1.0 / b.mean.lower};
    } else {
        const double inf = std::numeric_limits<double>::infinity();
        b.mean = {inf, inf};
        b.c_beta = {0.0, 0.0};
    }
    return b;
}

FreeEnergyValue tilted_free_energy(const TiltedKernelBundle& b, double delta)
{
    if (!(delta >= 0.0))
        throw DomainError("Delta must be nonnegative");
    if (delta == 0.0)
        return {};
    const double s = 0.5 * b.d;
    const double ed = std::exp(delta);
    std::vector<double> coeff(static_cast<std::size_t>(b.n_max));
    for (std::int64_t n = 1; n <= b.n_max; ++n)
        coeff[n - 1] = ed * b.kbar[n];
    const double c = ed / (b.zeta.value * b.r.mid());
    const double r_m = b.r_n[b.n_max] + b.r_n_err[b.n_max];
    const double r_est = 1.0 + s * (s + 1.0) * b.beta * b.beta / (2.0 * static_cast<double>(b.n_max));
    return to_free_energy(
        solve_generating_equation(coeff, renewal_tail_model(c, s, static_cast<std::uint64_t>(b.n_max), r_m, r_est)));
}

std::pair<LogWeight, LogWeight> renewal_representation_check(std::span<const double> omega, double beta, double eps,
                                                             int d, int n)
{
    check_beta(beta);
    if (n < 1 || n > 14)
        throw UsageError("renewal representation check is exhaustive; needs 1 <= N <= 14");
    if (static_cast<int>(omega.size()) < n)
        throw UsageError("disorder sequence shorter than N");
    if (!(eps > 0.0))
        throw DomainError("the renewal form needs eps > 0");
    GradientParams p;
    p.d = d;
    p.beta = beta;
    p.eps = eps;
    p.n = n;
    const auto pre = adjusted_partition_prefix(omega, p);
    const LogWeight direct = LogWeight(pre[n]) * LogWeight(std::log(eps));

    const double s = 0.5 * d;
    const double zeta = riemann_zeta(s).value;
    const double epsc0 = std::pow(kTwoPi, s) / zeta;
    const double log_step = std::log(eps) + s * std::log1p(-beta * beta) - std::log(epsc0);
    std::vector<double> sum(static_cast<std::size_t>(n) + 1, 0.0);
    sum[0] = 0.0;
    for (int i = 0; i < n; ++i)
        sum[i + 1] = sum[i] + omega[i];
    // log of one segment's factor [...] K(len) e^{psi(beta wbar)}
    auto seg = [&](int i, int j) {
        const int len = j - i;
        const double wbar = (sum[j] - sum[i]) / len;
        return log_step - std::log(zeta) - s * std::log(static_cast<double>(len)) + psi(beta * wbar, d);
    };
    std::vector<double> terms;
    const unsigned interior = static_cast<unsigned>(n - 1);
    for (unsigned mask = 0; mask < (1u << interior); ++mask) {
        double acc = 0.0;
        int last = 0;
        for (int site = 1; site < n; ++site)
            if (mask & (1u << (site - 1))) {
                acc += seg(last, site);
                last = site;
            }
        acc += seg(last, n);
        terms.push_back(acc);
    }
    return {direct, LogWeight(log_sum_exp(std::span<const double>(terms)))};
}

std::vector<double> annealed_partition_expectation(double beta, double eps, int d, int n)
{
    if (n < 1)
        throw UsageError("N must be positive");
    std::vector<double> b(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 1; k <= n; ++k)
        b[k] = expected_segment_weight(k, beta, d).value;
    std::vector<double> z(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
        double acc = b[k];
        for (int m = 1; m < k; ++m)
            acc += eps * z[m] * b[k - m];
        z[k] = acc;
    }
    return z;
}

AnnealedIdentity annealed_identity_check(double beta, double delta, int d, int n, std::size_t mc_samples,
                                         std::uint64_t seed, const TiltedKernelBundle& bundle, const Execution& ex)
{
    if (n < 1 || n > 64)
        throw UsageError("identity check needs 1 <= N <= 64");
    if (bundle.d != d || bundle.beta != beta || bundle.n_max < n)
        throw UsageError("bundle does not match (beta, d, N)");
    if (!(delta >= 0.0))
        throw DomainError("Delta must be nonnegative");
    AnnealedIdentity out;
    const double s = 0.5 * d;
    out.eps = std::pow(kTwoPi, s) / bundle.zeta.value * std::pow(1.0 - beta * beta, -s) / bundle.r.mid()
              * std::exp(delta);
    out.exact = annealed_partition_expectation(beta, out.eps, d, n)[n];

    const double fbar = tilted_free_energy(bundle, delta).value;
    std::vector<double> q(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 1; k <= n; ++k)
        q[k] = std::exp(delta - fbar * k) * bundle.kbar[k];
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    u[0] = 1.0;
    for (int k = 1; k <= n; ++k) {
        double acc = 0.0;
        for (int j = 1; j <= k; ++j)
            acc += q[j] * u[k - j];
        u[k] = acc;
    }
    out.renewal = std::exp(fbar * n) * u[n] / out.eps;

    if (mc_samples > 0) {
        std::vector<double> vals(mc_samples);
        GradientParams p;
        p.d = d;
        p.beta = beta;
        p.eps = out.eps;
        p.n = n;
        for_each_index(mc_samples, ex, [&](std::size_t i) {
            const auto om = disorder::sample(disorder::DisorderLaw::Rademacher, static_cast<std::size_t>(n), seed, i);
            vals[i] = std::exp(adjusted_partition_prefix(om.values, p)[n]);
        });
        out.mc = summarize(vals);
        out.mc_stratified = stratified_partition_mc(beta, out.eps, d, n, mc_samples, seed, ex);
    }
    return out;
}

McEstimate stratified_partition_mc(double beta, double eps, int d, int n, std::size_t samples, std::uint64_t seed,
                                   const Execution& ex)
{
    if (n < 1)
        throw UsageError("N must be at least 1");
    const std::size_t strata = static_cast<std::size_t>(n) + 1;
    if (samples < 2 * strata)
        throw UsageError("stratified estimator needs at least two samples per plus-count");
    const auto w = disorder::binomial_weights(n);
    const std::size_t per = samples / strata;
    GradientParams p;
    p.d = d;
    p.beta = beta;
    p.eps = eps;
    p.n = n;
    // k = 0 and k = n hold one arrangement each, evaluated once
    auto count = [&](std::size_t k) { return (k == 0 || k == strata - 1) ? std::size_t{1} : per; };
    std::vector<std::size_t> offset(strata + 1, 0);
    for (std::size_t k = 0; k < strata; ++k)
        offset[k + 1] = offset[k] + count(k);
    std::vector<double> vals(offset[strata]);
    for_each_index(vals.size(), ex, [&](std::size_t idx) {
        const std::size_t k = static_cast<std::size_t>(std::upper_bound(offset.begin(), offset.end(), idx) - offset.begin()) - 1;
        auto eng = disorder::make_engine(seed, (static_cast<std::uint64_t>(k) << 32) + (idx - offset[k]));
        std::vector<double> om(static_cast<std::size_t>(n), -1.0);
        std::fill(om.begin(), om.begin() + static_cast<std::ptrdiff_t>(k), 1.0);
        std::shuffle(om.begin(), om.end(), eng);
        vals[idx] = std::exp(adjusted_partition_prefix(om, p)[n]);
    });
    McEstimate out;
    out.samples = vals.size();
    double var = 0.0;
    for (std::size_t k = 0; k < strata; ++k) {
        const auto e = summarize(std::span<const double>(vals).subspan(offset[k], count(k)));
        out.mean += w[k] * e.mean;
        var += w[k] * w[k] * e.std_error * e.std_error;
    }
    out.std_error = std::sqrt(var);
    return out;
}

JensenBoundCheck jensen_bound_check(double beta, int d, std::int64_t n_max)
{
    check_beta(beta);
    if (d < 5)
        throw Unsupported("the mean-renewal-time argument needs d >= 5");
    const double s = 0.5 * d;
    const auto f = disorder::MeanFunction::neg_log();
    std::vector<disorder::MeanExpectation> e(static_cast<std::size_t>(n_max) + 1);
    for_each_index(static_cast<std::size_t>(n_max), Execution{}, [&](std::size_t i) {
        e[i + 1] = disorder::rademacher_mean_expectation(f, beta, static_cast<std::int64_t>(i) + 1);
    });
    NeumaierSum sum;
    double err = 0.0;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        const double w = pow_neg(n, s);
        sum.add(w * e[n].value);
        err += w * e[n].error;
    }
    err += 4.0 * n_max * std::numeric_limits<double>::epsilon() * sum.value();
    const Bracket tail = disorder::weighted_mean_tail(f, beta, s, static_cast<std::uint64_t>(n_max));
    const auto z1 = riemann_zeta(s - 1.0);
    const auto z2 = riemann_zeta(s + 1.0);
    // L = m_K^{-1} sum E psi K(n) = (d/2) sum E[-log(1 - beta wbar)] n^{-d/2} / zeta(d/2 - 1)
    JensenBoundCheck out;
    const double lo = std::max(0.0, sum.value() - err) + tail.lower;
    const double hi = sum.value() + err + tail.upper;
    out.lower_bound_bracket = {s * lo / z1.bracket.upper, s * hi / z1.bracket.lower};
    out.lower_bound = s * (sum.value() + tail.mid()) / z1.value;
    out.analytic_bound = d * z2.value * beta * beta / (4.0 * z1.value);
    return out;
}

} // namespace pinning::gradient
