#include "pinning/fractional_moment.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "pinning/disorder.hpp"
#include "pinning/errors.hpp"
#include "pinning/gradient_model.hpp"

namespace pinning::fm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// log Y_0..log Y_n for charges omega (Y_0 = 1)
std::vector<double> log_renewal_prefix(std::span<const double> omega, double beta, int d, double eps)
{
    const int n = static_cast<int>(omega.size());
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s += 1.0 / (1.0 + beta * omega[i]);
        u[i + 1] = kTwoPi * s;
    }
    auto out = gradient::pinned_recursion(u, d, eps);
    const double le = std::log(eps);
    out[0] = 0.0;
    for (int i = 1; i <= n; ++i)
        out[i] += le;
    return out;
}

void check_gamma(double gamma)
{
    if (!(gamma > 0.0) || !(gamma <= 1.0))
        throw DomainError("gamma must lie in (0, 1]");
}

} // namespace

const char* to_string(Verdict v) { return v == Verdict::Certified ? "Certified" : "NotCertified"; }
const char* to_string(AMode m) { return m == AMode::Exact ? "exact" : "mc"; }

double default_gamma(int d, bool experimental)
{
    if (d >= 5)
        return (2.0 + 0.5 * d) / d;
    if (!experimental || d < 3)
        throw Unsupported("fractional moment parameters are given for d >= 5 only");
    return (1.0 + 0.5 * d) / d * 1.1;
}

Parameters choose_parameters(double beta, double c, int d, const gradient::TiltedKernelBundle& bundle, bool experimental)
{
    Parameters p;
    p.gamma = default_gamma(d, experimental);
    if (!(beta > 0.0) || !(beta < 1.0))
        throw DomainError("choose_parameters needs 0 < beta < 1");
    if (!(c > 0.0) || !(c <= 1.0))
        throw DomainError("choose_parameters needs 0 < c <= 1");
    if (bundle.d != d || bundle.beta != beta)
        throw UsageError("bundle does not match (beta, d)");
    p.delta = c * beta * beta;
    p.fbar = gradient::tilted_free_energy(bundle, p.delta).value;
    if (!(p.fbar > 0.0))
        throw Inconsistency("tilted free energy vanished for positive Delta");
    p.k = static_cast<std::int64_t>(std::floor(1.0 / p.fbar));
    if (p.k < 1)
        p.k = 1;
    return p;
}

double certificate_eps(const gradient::TiltedKernelBundle& b, double delta)
{
    const double s = 0.5 * b.d;
    return std::pow(kTwoPi, s) / b.zeta.value * std::pow(1.0 - b.beta * b.beta, -s) / b.r.mid() * std::exp(delta);
}

std::vector<double> fractional_moment_table_exact(int n, double beta, int d, double eps, double gamma, const Execution& ex)
{
    check_gamma(gamma);
    if (n < 0 || n > 20)
        throw UsageError("exact fractional moments enumerate 2^s vectors; s must be <= 20");
    if (!(eps > 0.0))
        throw DomainError("eps must be positive");
    std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
    out[0] = 1.0;
    if (n == 0)
        return out;
    const int block_bits = std::min(n, 8);
    const std::size_t blocks = std::size_t{1} << block_bits;
    const std::size_t per_block = std::size_t{1} << (n - block_bits);
    std::vector<std::vector<double>> partial(blocks, std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    for_each_index(blocks, ex, [&](std::size_t b) {
        std::vector<double> omega(static_cast<std::size_t>(n));
        auto& acc = partial[b];
        for (std::size_t j = 0; j < per_block; ++j) {
            const std::size_t mask = (b * per_block) | j;
            for (int i = 0; i < n; ++i)
                omega[i] = (mask >> i) & 1u ? 1.0 : -1.0;
            const auto ly = log_renewal_prefix(omega, beta, d, eps);
            for (int s = 1; s <= n; ++s)
                acc[s] += std::exp(gamma * ly[s]);
        }
    });
    const double scale = std::ldexp(1.0, -n);
    for (int s = 1; s <= n; ++s) {
        NeumaierSum sum;
        for (std::size_t b = 0; b < blocks; ++b)
            sum.add(partial[b][s]);
        out[s] = sum.value() * scale;
    }
    return out;
}

AEntry fractional_moment_A(int s, double beta, int d, double eps, double gamma, AMode mode, std::size_t samples,
                           std::uint64_t seed, const Execution& ex)
{
    check_gamma(gamma);
    if (s < 0)
        throw UsageError("s must be nonnegative");
    if (s == 0)
        return {1.0, 0.0, mode};
    if (mode == AMode::Exact) {
        if (s > 20)
            throw UsageError("exact fractional moments enumerate 2^s vectors; s must be <= 20");
        return {fractional_moment_table_exact(s, beta, d, eps, gamma, ex)[s], 0.0, AMode::Exact};
    }
    if (samples < 2)
        throw UsageError("Monte Carlo needs at least two samples");
    std::vector<double> v(samples);
    for_each_index(samples, ex, [&](std::size_t i) {
        const auto om = disorder::sample(disorder::DisorderLaw::Rademacher, static_cast<std::size_t>(s), seed, i);
        v[i] = std::exp(gamma * log_renewal_prefix(om.values, beta, d, eps)[s]);
    });
    const auto e = summarize(v);
    return {e.mean, e.std_error, AMode::MonteCarlo};
}

double importance_cost(std::int64_t k, std::int64_t s_min, const ImportanceOptions& opt)
{
    double cost = 0.0;
    for (std::int64_t top = k; top > s_min; top -= opt.window)
        cost += 0.5 * static_cast<double>(top) * static_cast<double>(top);
    return cost * static_cast<double>(opt.samples);
}

std::vector<AEntry> fractional_moment_table_is(std::int64_t k, std::int64_t s_min, double delta, double gamma,
                                               const gradient::TiltedKernelBundle& bundle,
                                               const ImportanceOptions& opt, const Execution& ex)
{
    check_gamma(gamma);
    if (k < 1 || k > bundle.n_max)
        throw UsageError("k must lie in [1, bundle n_max]");
    if (opt.window < 1 || opt.samples < 2)
        throw UsageError("window >= 1 and samples >= 2 required");
    const int d = bundle.d;
    const double beta = bundle.beta;
    const double s_half = 0.5 * d;
    const double eps = certificate_eps(bundle, delta);
    // annealed renewal: E Y_n = u_n with steps q(l) = e^delta Kbar(l)
    std::vector<double> q(static_cast<std::size_t>(k) + 1, 0.0), u(static_cast<std::size_t>(k) + 1, 0.0);
    for (std::int64_t l = 1; l <= k; ++l)
        q[l] = std::exp(delta) * bundle.kbar[l];
    u[0] = 1.0;
    for (std::int64_t n = 1; n <= k; ++n) {
        double acc = 0.0;
        for (std::int64_t l = 1; l <= n; ++l)
            acc += q[l] * u[n - l];
        u[n] = acc;
    }

    std::vector<AEntry> out(static_cast<std::size_t>(k) + 1);
    out[0] = {1.0, 0.0, AMode::Exact};
    std::uint64_t window_index = 0;
    for (std::int64_t top = k; top > s_min; top -= opt.window, ++window_index) {
        const std::int64_t lo = std::max(s_min, top - opt.window);
        const std::size_t width = static_cast<std::size_t>(top - lo);
        std::vector<std::vector<double>> rows(opt.samples);
        for_each_index(opt.samples, ex, [&](std::size_t t) {
            auto eng = disorder::make_engine(opt.seed, (window_index << 32) + t);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            std::vector<double> omega(static_cast<std::size_t>(top));
            std::int64_t pos = top;
            while (pos > 0) {
                // last excursion length, P(l) = q(l) u(pos - l) / u(pos)
                const double r = unif(eng) * u[pos];
                double acc = 0.0;
                std::int64_t l = 1;
                for (;; ++l) {
                    acc += q[l] * u[pos - l];
                    if (acc >= r || l == pos)
                        break;
                }
                // charges on the excursion, tilted by (1 - beta wbar)^{-d/2}: uniform signs, then accept
                for (;;) {
                    int plus = 0;
                    for (std::int64_t i = 0; i < l; i += 64) {
                        const int take = static_cast<int>(std::min<std::int64_t>(64, l - i));
                        std::uint64_t bits = eng();
                        for (int b = 0; b < take; ++b) {
                            const bool up = (bits >> b) & 1u;
                            omega[pos - l + i + b] = up ? 1.0 : -1.0;
                            plus += up;
                        }
                    }
                    const double wbar = (2.0 * plus - static_cast<double>(l)) / static_cast<double>(l);
                    const double accept = std::pow((1.0 - beta) / (1.0 - beta * wbar), s_half);
                    if (unif(eng) < accept)
                        break;
                }
                pos -= l;
            }
            const auto ly = log_renewal_prefix(omega, beta, d, eps);
            auto& row = rows[t];
            row.resize(width);
            const double base = std::log(u[top]) - ly[top];
            for (std::size_t j = 0; j < width; ++j)
                row[j] = std::exp(gamma * ly[lo + 1 + static_cast<std::int64_t>(j)] + base);
        });
        std::vector<double> col(opt.samples);
        for (std::size_t j = 0; j < width; ++j) {
            for (std::size_t t = 0; t < opt.samples; ++t)
                col[t] = rows[t][j];
            const auto e = summarize(col);
            out[lo + 1 + static_cast<std::int64_t>(j)] = {e.mean, e.std_error, AMode::MonteCarlo};
        }
    }
    return out;
}

bool subadditivity_inequality_check(std::span<const double> values, double gamma)
{
    if (values.size() < 2)
        throw UsageError("need at least two values");
    if (!(gamma > 0.0) || !(gamma < 1.0))
        throw DomainError("gamma must lie in (0, 1)");
    double sum = 0.0, sum_pow = 0.0;
    for (double v : values) {
        if (!(v > 0.0))
            throw DomainError("values must be positive");
        sum += v;
        sum_pow += std::pow(v, gamma);
    }
    return std::pow(sum, gamma) < sum_pow;
}

FractionalWeights fractional_weights(double beta, int d, double gamma, std::int64_t n)
{
    check_gamma(gamma);
    FractionalWeights w;
    w.e.assign(static_cast<std::size_t>(n) + 1, 0.0);
    w.e_err.assign(static_cast<std::size_t>(n) + 1, 0.0);
    const auto f = disorder::MeanFunction::inverse_power(gamma * 0.5 * d);
    for_each_index(static_cast<std::size_t>(n), Execution{}, [&](std::size_t i) {
        const auto e = disorder::rademacher_mean_expectation(f, beta, static_cast<std::int64_t>(i) + 1);
        w.e[i + 1] = e.value;
        w.e_err[i + 1] = e.error;
    });
    return w;
}

RhoValue rho(const gradient::TiltedKernelBundle& bundle, double delta, double gamma, std::int64_t k,
             std::span<const AEntry> a, std::int64_t n_truncation)
{
    return rho(bundle, delta, gamma, k, a, n_truncation, fractional_weights(bundle.beta, bundle.d, gamma, n_truncation));
}

RhoValue rho(const gradient::TiltedKernelBundle& bundle, double delta, double gamma, std::int64_t k,
             std::span<const AEntry> a, std::int64_t n_truncation, const FractionalWeights& w)
{
    check_gamma(gamma);
    const double p = gamma * 0.5 * bundle.d;
    if (!(p > 1.0))
        throw DomainError("gamma d/2 must exceed 1 for a convergent rho");
    if (k < 0 || static_cast<std::int64_t>(a.size()) < k + 1)
        throw UsageError("A table must cover s = 0..k");
    if (n_truncation <= 2 * k || static_cast<std::int64_t>(w.e.size()) < n_truncation + 1)
        throw UsageError("n_truncation must exceed 2k and be covered by the weight table");
    const double zeta = bundle.zeta.value;
    const double pref = std::pow(std::exp(delta) / bundle.r.mid(), gamma);
    const std::int64_t m_max = n_truncation;
    // suffix sums of K(m)^gamma E_m, accumulated from the small end
    std::vector<double> suf(static_cast<std::size_t>(m_max) + 2, 0.0), suf_err(static_cast<std::size_t>(m_max) + 2, 0.0);
    for (std::int64_t m = m_max; m >= 1; --m) {
        const double kg = std::pow(std::pow(static_cast<double>(m), -0.5 * bundle.d) / zeta, gamma);
        suf[m] = suf[m + 1] + kg * w.e[m];
        suf_err[m] = suf_err[m + 1] + kg * w.e_err[m];
    }
    // sum over m > M of K(m)^gamma E_m <= zeta^{-gamma} (1-beta)^{-p} M^{1-p}/(p-1)
    const double tail_c = std::pow(zeta, -gamma) * std::pow(1.0 - bundle.beta, -p) / (p - 1.0);
    RhoValue out;
    double val = 0.0, tail = 0.0, infl = 0.0;
    for (std::int64_t s = 0; s <= k; ++s) {
        const double t = suf[k - s + 1] - suf[m_max - s + 1];
        const double terr = suf_err[k - s + 1] - suf_err[m_max - s + 1];
        const double tl = tail_c * std::pow(static_cast<double>(m_max - s), 1.0 - p);
        const double infl_s = a[s].mode == AMode::MonteCarlo ? 3.0 * a[s].std_error : 0.0;
        val += a[s].value * t;
        infl += infl_s * t;
        tail += (a[s].value + infl_s) * (tl + terr);
    }
    out.value = pref * val;
    out.mc_inflation = pref * infl;
    out.tail_bound = pref * tail + 1e-14 * static_cast<double>(k + 1) * out.value;
    return out;
}

GapCertificate certify_gap(double beta, int d, double c, const CertifyOptions& opt, const Execution& ex)
{
    if (d < 5 && !opt.experimental)
        throw Unsupported("gap certificate is defined for d >= 5");
    const auto bundle = gradient::tilted_bundle(beta, d);
    return certify_gap(beta, d, c, bundle, opt, ex);
}

GapCertificate certify_gap(double beta, int d, double c, const gradient::TiltedKernelBundle& bundle,
                           const CertifyOptions& opt, const Execution& ex)
{
    if (d < 5 && !opt.experimental)
        throw Unsupported("gap certificate is defined for d >= 5");
    if (opt.exact_s_cutoff < 0 || opt.exact_s_cutoff > 20)
        throw UsageError("exact_s_cutoff must lie in [0, 20]");
    GapCertificate g;
    g.beta = beta;
    g.d = d;
    g.c = c;
    g.n_truncation = opt.n_truncation;
    g.exact_s_cutoff = opt.exact_s_cutoff;
    g.mc_samples = opt.mc_samples;
    g.window = opt.window;
    g.seed = opt.seed;
    g.budget = opt.budget;
    g.experimental = d < 5;
    g.eps_annealed = certificate_eps(bundle, 0.0);
    if (beta == 0.0) {
        g.gamma = default_gamma(d, opt.experimental);
        g.delta = 0.0;
        g.k = std::max(1, opt.exact_s_cutoff);
        g.vacuous = true;
        g.diagnostic = "beta = 0: Delta = 0, k set to the exact cutoff; no gap is claimed";
    } else {
        const auto p = choose_parameters(beta, c, d, bundle, opt.experimental);
        g.gamma = p.gamma;
        g.delta = p.delta;
        g.k = p.k;
        g.fbar = p.fbar;
    }
    g.eps = certificate_eps(bundle, g.delta);
    if (g.k > bundle.n_max || 2 * g.k >= opt.n_truncation) {
        g.verdict = Verdict::NotCertified;
        g.diagnostic = "k exceeds the kernel table or truncation range";
        return g;
    }
    const std::int64_t exact_n = std::min<std::int64_t>(g.k, opt.exact_s_cutoff);
    ImportanceOptions io{opt.window, opt.mc_samples, opt.seed};
    g.estimated_cost = g.k > exact_n ? importance_cost(g.k, exact_n, io) : 0.0;
    if (g.estimated_cost > opt.budget) {
        g.verdict = Verdict::NotCertified;
        g.diagnostic = "estimated sampler cost exceeds the budget; A table not computed";
        return g;
    }
    std::vector<AEntry> a(static_cast<std::size_t>(g.k) + 1);
    if (g.k > exact_n)
        a = fractional_moment_table_is(g.k, exact_n, g.delta, g.gamma, bundle, io, ex);
    const auto ex_tab = fractional_moment_table_exact(static_cast<int>(exact_n), beta, d, g.eps, g.gamma, ex);
    for (std::int64_t s = 0; s <= exact_n; ++s)
        a[s] = {ex_tab[s], 0.0, AMode::Exact};
    const auto r = rho(bundle, g.delta, g.gamma, g.k, a, opt.n_truncation);
    g.a = std::move(a);
    g.rho_value = r.value;
    g.rho_tail_bound = r.tail_bound;
    g.mc_inflation = r.mc_inflation;
    g.verdict = g.rho_upper() <= 1.0 ? Verdict::Certified : Verdict::NotCertified;
    if (g.diagnostic.empty())
        g.diagnostic = g.verdict == Verdict::Certified ? "rho + tail + 3 SE inflation <= 1"
                                                       : "rho + tail + 3 SE inflation > 1";
    return g;
}

} // namespace pinning::fm
