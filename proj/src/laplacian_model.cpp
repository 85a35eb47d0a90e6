#include "pinning/laplacian_model.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "pinning/disorder.hpp"
#include "pinning/errors.hpp"

namespace pinning::laplacian {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxExactN = 22;

void check_charges(std::span<const double> b)
{
    if (b.size() < 2)
        throw UsageError("need at least two charges b_0, b_1");
    for (double x : b)
        if (!(x > 0.0))
            throw DomainError("charges b_i must be positive");
}

// band of the full matrix, site-indexed 1..N-1
struct FullBand {
    std::vector<double> d, o1, o2;
};

FullBand full_band(std::span<const double> b)
{
    const int n = static_cast<int>(b.size()) - 1;
    FullBand f;
    f.d.assign(static_cast<std::size_t>(n) + 1, 0.0);
    f.o1.assign(static_cast<std::size_t>(n) + 1, 0.0);
    f.o2.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 1; i <= n - 1; ++i) {
        f.d[i] = b[i - 1] + 4.0 * b[i] + b[i + 1];
        f.o1[i] = -2.0 * b[i] - 2.0 * b[i + 1];
        f.o2[i] = b[i + 1];
    }
    return f;
}

// coupling between sites s < t of the full matrix
double coupling(const FullBand& f, int s, int t)
{
    if (t - s == 1)
        return f.o1[s];
    if (t - s == 2)
        return f.o2[s];
    return 0.0;
}

double log_norm(int l, Normalization norm)
{
    const double k = norm == Normalization::PerReturn ? l : l + 1;
    return -0.5 * k * std::log(kTwoPi);
}

} // namespace

void LaplacianParams::validate() const
{
    if (!(beta >= 0.0))
        throw DomainError("beta must be nonnegative");
    if (!(eps >= 0.0))
        throw DomainError("eps must be nonnegative");
    if (n < 2)
        throw DomainError("Laplacian model needs N >= 2");
}

DenseMatrix laplacian_matrix(std::span<const double> b) { return laplacian_pinned_matrix(b, {}); }

DenseMatrix laplacian_pinned_matrix(std::span<const double> b, const std::vector<int>& pinned)
{
    check_charges(b);
    const int n = static_cast<int>(b.size()) - 1;
    std::vector<bool> pin(static_cast<std::size_t>(n) + 1, false);
    for (int s : pinned) {
        if (s < 1 || s > n - 1)
            throw UsageError("pinned sites must lie in 1..N-1");
        pin[s] = true;
    }
    std::vector<int> sites;
    for (int s = 1; s <= n - 1; ++s)
        if (!pin[s])
            sites.push_back(s);
    const auto f = full_band(b);
    const int m = static_cast<int>(sites.size());
    DenseMatrix a(m, m);
    for (int i = 0; i < m; ++i) {
        a(i, i) = f.d[sites[i]];
        for (int j = i + 1; j < m; ++j) {
            const double c = coupling(f, sites[i], sites[j]);
            a(i, j) = c;
            a(j, i) = c;
        }
    }
    return a;
}

double weighted_pair_sum(std::span<const double> b)
{
    check_charges(b);
    const int n = static_cast<int>(b.size()) - 1;
    double acc = 0.0;
    for (int k = 1; k <= n; ++k)
        for (int i = 0; i + k <= n; ++i)
            acc += static_cast<double>(k) * k / (b[i] * b[i + k]);
    return acc;
}

double pair_sum_bracket(std::span<const double> b)
{
    check_charges(b);
    double acc = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = i + 1; j < b.size(); ++j)
            acc += 1.0 / (b[i] * b[j]);
    return acc;
}

double det_laplacian_full(std::span<const double> b)
{
    double prod = 1.0;
    for (double x : b)
        prod *= x;
    return prod * weighted_pair_sum(b);
}

double log_det_laplacian_pinned(std::span<const double> b, const std::vector<int>& pinned)
{
    check_charges(b);
    const int n = static_cast<int>(b.size()) - 1;
    std::vector<bool> pin(static_cast<std::size_t>(n) + 1, false);
    for (int s : pinned) {
        if (s < 1 || s > n - 1)
            throw UsageError("pinned sites must lie in 1..N-1");
        pin[s] = true;
    }
    const auto f = full_band(b);
    std::vector<int> sites;
    for (int s = 1; s <= n - 1; ++s)
        if (!pin[s])
            sites.push_back(s);
    const std::size_t m = sites.size();
    std::vector<double> d(m), o1(m > 0 ? m - 1 : 0), o2(m > 1 ? m - 2 : 0);
    for (std::size_t i = 0; i < m; ++i) {
        d[i] = f.d[sites[i]];
        if (i + 1 < m)
            o1[i] = coupling(f, sites[i], sites[i + 1]);
        if (i + 2 < m)
            o2[i] = coupling(f, sites[i], sites[i + 2]);
    }
    return pentadiagonal_log_det(d, o1, o2);
}

double det_laplacian_pinned(std::span<const double> b, const std::vector<int>& pinned)
{
    return std::exp(log_det_laplacian_pinned(b, pinned));
}

std::int64_t det_laplacian_homogeneous_exact(int n)
{
    if (n < 2)
        throw DomainError("needs N >= 2");
    const int m = n - 1;
    std::vector<std::vector<std::int64_t>> a(m, std::vector<std::int64_t>(m, 0));
    for (int i = 0; i < m; ++i) {
        a[i][i] = 6;
        if (i + 1 < m)
            a[i][i + 1] = a[i + 1][i] = -4;
        if (i + 2 < m)
            a[i][i + 2] = a[i + 2][i] = 1;
    }
    return exact_integer_determinant(a);
}

double MonomialPolynomial::evaluate(std::span<const double> x) const
{
    if (static_cast<int>(x.size()) < n_vars)
        throw UsageError("too few variables");
    double acc = 0.0;
    for (const auto& [key, c] : terms) {
        double t = static_cast<double>(c);
        for (int v = 0; v < n_vars; ++v)
            for (int e = exponent(key, v); e > 0; --e)
                t *= x[v];
        acc += t;
    }
    return acc;
}

std::int64_t MonomialPolynomial::coefficient_sum() const
{
    std::int64_t s = 0;
    for (const auto& kv : terms)
        s += kv.second;
    return s;
}

int MonomialPolynomial::uniform_degree() const
{
    int deg = -2;
    for (const auto& kv : terms) {
        int d = 0;
        for (int v = 0; v < n_vars; ++v)
            d += exponent(kv.first, v);
        if (deg == -2)
            deg = d;
        else if (d != deg)
            return -1;
    }
    return deg == -2 ? 0 : deg;
}

bool MonomialPolynomial::square_free() const
{
    for (const auto& kv : terms)
        for (int v = 0; v < n_vars; ++v)
            if (exponent(kv.first, v) > 1)
                return false;
    return true;
}

bool MonomialPolynomial::positive_coefficients() const
{
    for (const auto& kv : terms)
        if (kv.second <= 0)
            return false;
    return true;
}

MonomialPolynomial monomial_determinant(int n, const std::vector<int>& pinned)
{
    if (n < 2 || n > 10)
        throw UsageError("symbolic determinant is limited to 2 <= N <= 10");
    std::vector<bool> pin(static_cast<std::size_t>(n) + 1, false);
    for (int s : pinned) {
        if (s < 1 || s > n - 1)
            throw UsageError("pinned sites must lie in 1..N-1");
        pin[s] = true;
    }
    std::vector<int> sites;
    for (int s = 1; s <= n - 1; ++s)
        if (!pin[s])
            sites.push_back(s);
    // entry (i, j) of the reduced matrix as a linear form sum c * b_var
    struct Term {
        int var;
        std::int64_t c;
    };
    const int m = static_cast<int>(sites.size());
    auto entry = [&](int i, int j) {
        const int s = std::min(sites[i], sites[j]), t = std::max(sites[i], sites[j]);
        std::vector<Term> out;
        if (s == t)
            out = {{s - 1, 1}, {s, 4}, {s + 1, 1}};
        else if (t - s == 1)
            out = {{s, -2}, {t, -2}};
        else if (t - s == 2)
            out = {{s + 1, 1}};
        return out;
    };
    std::vector<std::vector<std::vector<Term>>> e(m, std::vector<std::vector<Term>>(m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            e[i][j] = entry(i, j);

    MonomialPolynomial poly;
    poly.n_vars = n + 1;
    std::vector<int> perm(m);
    std::vector<bool> used(m, false);
    auto sign_of = [&]() {
        std::vector<bool> seen(m, false);
        int s = 1;
        for (int i = 0; i < m; ++i) {
            if (seen[i])
                continue;
            int len = 0;
            for (int j = i; !seen[j]; j = perm[j]) {
                seen[j] = true;
                ++len;
            }
            if (len % 2 == 0)
                s = -s;
        }
        return s;
    };
    // rows first, then the term inside each chosen entry
    auto expand = [&](auto&& self, int row, std::uint64_t key, std::int64_t coef, int sign) -> void {
        if (row == m) {
            poly.terms[key] += sign * coef;
            return;
        }
        for (const auto& t : e[row][perm[row]])
            self(self, row + 1, key + (std::uint64_t{1} << (4 * t.var)), coef * t.c, sign);
    };
    auto permute = [&](auto&& self, int row) -> void {
        if (row == m) {
            expand(expand, 0, 0, 1, sign_of());
            return;
        }
        for (int j = std::max(0, row - 2); j <= std::min(m - 1, row + 2); ++j) {
            if (used[j] || e[row][j].empty())
                continue;
            used[j] = true;
            perm[row] = j;
            self(self, row + 1);
            used[j] = false;
        }
    };
    permute(permute, 0);
    for (auto it = poly.terms.begin(); it != poly.terms.end();)
        it = it->second == 0 ? poly.terms.erase(it) : std::next(it);
    return poly;
}

namespace {

// Pivot product of the reduced band for one pinned mask; 0 when not positive definite.
double masked_det(const FullBand& f, int m, std::uint64_t mask, std::vector<int>& sites)
{
    sites.clear();
    for (int s = 1; s <= m; ++s)
        if (!((mask >> (s - 1)) & 1u))
            sites.push_back(s);
    const std::size_t k = sites.size();
    double det = 1.0;
    double dm1 = 0.0, dm2 = 0.0, l1m1 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double a2 = i >= 2 ? coupling(f, sites[i - 2], sites[i]) : 0.0;
        const double a1 = i >= 1 ? coupling(f, sites[i - 1], sites[i]) : 0.0;
        const double l2 = i >= 2 ? a2 / dm2 : 0.0;
        const double l1 = i >= 1 ? (a1 - l2 * dm2 * l1m1) / dm1 : 0.0;
        const double d = f.d[sites[i]] - l1 * l1 * dm1 - l2 * l2 * dm2;
        if (!(d > 0.0))
            return 0.0;
        det *= d;
        dm2 = dm1;
        dm1 = d;
        l1m1 = l1;
    }
    return det;
}

} // namespace

std::vector<double> log_subset_coefficients(std::span<const double> b, const Execution& ex)
{
    check_charges(b);
    const int n = static_cast<int>(b.size()) - 1;
    if (n > kMaxExactN)
        throw UsageError("exact enumeration is limited to N <= 22");
    const int m = n - 1; // interior sites
    double log_prod = 0.0;
    for (double x : b)
        log_prod += std::log(x);
    const auto f = full_band(b);
    // terms are sqrt(prod b / det P); factor out sqrt(prod b) and sum 1/sqrt(det P) in linear scale
    const int block_bits = std::min(m, 10);
    const std::size_t blocks = std::size_t{1} << block_bits;
    const std::size_t per_block = std::size_t{1} << (m - block_bits);
    std::vector<std::vector<double>> partial(blocks, std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0));
    for_each_index(blocks, ex, [&](std::size_t blk) {
        std::vector<int> sites;
        sites.reserve(m);
        auto& acc = partial[blk];
        for (std::size_t j = 0; j < per_block; ++j) {
            // bit i set: site i+1 pinned
            const std::uint64_t mask = (static_cast<std::uint64_t>(blk) << (m - block_bits)) | j;
            const double det = masked_det(f, m, mask, sites);
            if (!(det > 0.0) || !std::isfinite(det))
                throw NotPositiveDefinite("pinned Laplacian matrix lost positive definiteness or range");
            acc[std::popcount(mask)] += 1.0 / std::sqrt(det);
        }
    });
    std::vector<double> out(static_cast<std::size_t>(m) + 1);
    for (int l = 0; l <= m; ++l) {
        NeumaierSum s;
        for (std::size_t blk = 0; blk < blocks; ++blk)
            s.add(partial[blk][l]);
        out[l] = std::log(s.value()) + 0.5 * log_prod;
    }
    return out;
}

LogWeight partition_from_coefficients(std::span<const double> log_coeff, double eps, Normalization norm)
{
    if (!(eps >= 0.0))
        throw DomainError("eps must be nonnegative");
    std::vector<double> terms;
    for (std::size_t l = 0; l < log_coeff.size(); ++l) {
        if (l > 0 && eps == 0.0)
            break;
        const double le = l == 0 ? 0.0 : static_cast<double>(l) * std::log(eps);
        terms.push_back(log_coeff[l] + le + log_norm(static_cast<int>(l), norm));
    }
    return LogWeight(log_sum_exp(std::span<const double>(terms)));
}

LogWeight laplacian_partition_exact(std::span<const double> omega, const LaplacianParams& p, const Execution& ex)
{
    p.validate();
    if (p.n > kMaxExactN)
        throw UsageError("exact enumeration is limited to N <= 22");
    if (static_cast<int>(omega.size()) < p.n + 1)
        throw UsageError("need N+1 charges");
    std::vector<double> b(static_cast<std::size_t>(p.n) + 1);
    for (int i = 0; i <= p.n; ++i)
        b[i] = std::exp(p.beta * omega[i]);
    const auto c = log_subset_coefficients(b, ex);
    return partition_from_coefficients(c, p.eps, p.normalization);
}

LogWeight HomogeneousTable::partition(int n, double eps, Normalization norm) const
{
    if (n < 1 || n > n_max())
        throw UsageError("N outside the homogeneous table");
    return partition_from_coefficients(log_coeff[n], eps, norm);
}

HomogeneousTable homogeneous_table(int n_max, const Execution& ex)
{
    if (n_max < 1 || n_max > kMaxExactN)
        throw UsageError("homogeneous table needs 1 <= n_max <= 22");
    HomogeneousTable t;
    t.log_coeff.resize(static_cast<std::size_t>(n_max) + 1);
    t.log_coeff[1] = {0.0};
    for (int n = 2; n <= n_max; ++n) {
        const std::vector<double> ones(static_cast<std::size_t>(n) + 1, 1.0);
        t.log_coeff[n] = log_subset_coefficients(ones, ex);
    }
    return t;
}

std::vector<double> renewal_partition_sequence(const HomogeneousTable& t, double eps)
{
    const int top = t.n_max() + 1;
    std::vector<double> z(static_cast<std::size_t>(top) + 1, 0.0);
    const double inv = 1.0 / std::sqrt(kTwoPi);
    z[1] = inv;
    for (int n = 2; n <= top; ++n)
        z[n] = inv * t.partition(n - 1, eps, Normalization::PerReturnPlusOne).linear();
    return z;
}

std::vector<double> no_double_return_deconvolve(std::span<const double> z, double eps)
{
    if (!(eps > 0.0))
        throw DomainError("deconvolution needs eps > 0");
    const int top = static_cast<int>(z.size()) - 1;
    if (top < 1)
        throw UsageError("need Z_1 at least");
    std::vector<double> zh(static_cast<std::size_t>(top) + 1, 0.0);
    zh[1] = z[1];
    for (int n = 3; n <= top; ++n) {
        double s = zh[1] * eps * z[n - 1] + zh[n - 1] * eps * z[1];
        for (int c = 3; c <= n - 2; ++c)
            s += zh[c] * eps * eps * z[n - c];
        zh[n] = z[n] - s;
        if (zh[n] < -1e-10 * z[n])
            throw Inconsistency("negative no-double-return weight at n = " + std::to_string(n)
                                + "; the length convention of the input is off");
        zh[n] = std::max(zh[n], 0.0);
    }
    return zh;
}

std::vector<double> no_double_return_convolve(std::span<const double> zh, double eps)
{
    const int top = static_cast<int>(zh.size()) - 1;
    std::vector<double> z(static_cast<std::size_t>(top) + 1, 0.0);
    if (top >= 1)
        z[1] = zh[1];
    if (top >= 2)
        z[2] = 1.0 / kTwoPi; // base case, not determined by Zh
    for (int n = 3; n <= top; ++n) {
        double s = zh[n] + zh[1] * eps * z[n - 1] + zh[n - 1] * eps * z[1];
        for (int c = 3; c <= n - 2; ++c)
            s += zh[c] * eps * eps * z[n - c];
        z[n] = s;
    }
    return z;
}

namespace {

struct NonRandomSeries {
    std::vector<double> coeff; // a_1..a_top as coeff[0..top-1]
    std::size_t top = 0;
    double c_mid = 0.0, c_lo = 0.0, c_hi = 0.0;
};

NonRandomSeries nonrandom_series(const HomogeneousTable& t, double eps)
{
    const auto z = renewal_partition_sequence(t, eps);
    const auto zh = no_double_return_deconvolve(z, eps);
    NonRandomSeries s;
    s.top = zh.size() - 1;
    s.coeff.assign(s.top, 0.0);
    s.coeff[0] = eps * zh[1];
    for (std::size_t n = 3; n <= s.top; ++n)
        s.coeff[n - 1] = eps * eps * zh[n];
    // a_n ~ C / n^2 over the last decade
    const std::size_t lo = s.top >= 12 ? s.top - 9 : 3;
    double sum = 0.0;
    s.c_lo = std::numeric_limits<double>::infinity();
    s.c_hi = 0.0;
    for (std::size_t n = lo; n <= s.top; ++n) {
        const double v = s.coeff[n - 1] * static_cast<double>(n) * static_cast<double>(n);
        sum += v;
        s.c_lo = std::min(s.c_lo, v);
        s.c_hi = std::max(s.c_hi, v);
    }
    s.c_mid = sum / static_cast<double>(s.top - lo + 1);
    return s;
}

TailModel fitted_tail(const NonRandomSeries& s)
{
    const std::uint64_t top = s.top;
    TailModel t;
    t.lower = [c = s.c_lo, top](double x) { return c * power_series_tail(2.0, top, x).lower; };
    t.upper = [c = s.c_hi, top](double x) { return c * power_series_tail(2.0, top, x).upper; };
    t.estimate = [c = s.c_mid, top](double x) { return c * power_series_tail(2.0, top, x).mid(); };
    return t;
}

} // namespace

NonRandomFreeEnergy laplacian_nonrandom_free_energy(const HomogeneousTable& t, double eps)
{
    if (!(eps >= 0.0))
        throw DomainError("eps must be nonnegative");
    NonRandomFreeEnergy out;
    if (eps == 0.0)
        return out;
    const auto s = nonrandom_series(t, eps);
    out.tail_c = s.c_mid;
    out.tail_c_range = {s.c_lo, s.c_hi};
    const auto g = solve_generating_equation(s.coeff, fitted_tail(s));
    out.localized = g.has_root();
    out.value = g.free_energy();
    out.bracket = g.has_root() ? g.free_energy_bracket() : Bracket{0.0, 0.0};
    return out;
}

NonRandomFreeEnergy laplacian_nonrandom_free_energy(double eps, int n_max)
{
    return laplacian_nonrandom_free_energy(homogeneous_table(n_max), eps);
}

CriticalEstimate laplacian_critical_point(const HomogeneousTable& t)
{
    // total mass at x = 1 for the low / mid / high tail constant
    auto mass = [&](double eps, int which) {
        const auto s = nonrandom_series(t, eps);
        double acc = 0.0;
        for (double c : s.coeff)
            acc += c;
        const Bracket tail = power_series_tail(2.0, s.top, 1.0);
        if (which < 0)
            return acc + s.c_lo * tail.lower;
        if (which > 0)
            return acc + s.c_hi * tail.upper;
        return acc + s.c_mid * tail.mid();
    };
    auto root = [&](int which) {
        double lo = 1e-3, hi = 1.0;
        while (mass(hi, which) < 1.0) {
            hi *= 2.0;
            if (hi > 1e4)
                throw Inconsistency("no critical point below eps = 1e4");
        }
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (mass(mid, which) < 1.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    CriticalEstimate out;
    out.value = root(0);
    const double a = root(-1), b = root(1);
    out.bracket = {std::min(a, b), std::max(a, b)};
    return out;
}

double second_order_probe(const HomogeneousTable& t, double eps_c, double delta)
{
    if (!(delta > 0.0) || !(delta < 1.0))
        throw DomainError("delta must lie in (0, 1)");
    const auto f = laplacian_nonrandom_free_energy(t, eps_c * std::exp(delta));
    return f.value * (-std::log(delta)) / delta;
}

Sandwich annealed_sandwich(double beta, double eps, int n, std::size_t samples, std::uint64_t seed, Normalization norm,
                           const Execution& ex)
{
    LaplacianParams p{beta, eps, n, norm};
    p.validate();
    if (n > 18)
        throw UsageError("sandwich uses exact homogeneous values; N <= 18");
    if (samples < 2)
        throw UsageError("Monte Carlo needs at least two samples");
    const std::vector<double> ones(static_cast<std::size_t>(n) + 1, 1.0);
    const auto hom = log_subset_coefficients(ones, ex);
    using disorder::DisorderLaw;
    const double m_half = disorder::mgf(DisorderLaw::StandardNormal, beta / 2.0);
    const double m_neg = disorder::mgf(DisorderLaw::StandardNormal, -beta);
    Sandwich s;
    s.upper = m_half * m_half * partition_from_coefficients(hom, eps * m_half, norm).linear();
    s.lower = partition_from_coefficients(hom, eps / std::sqrt(m_neg), norm).linear() / m_neg;
    auto logs = laplacian_log_partition_samples(p, samples, seed, ex);
    for (double& v : logs)
        v = std::exp(v);
    s.annealed = summarize(logs);
    return s;
}

double effective_potential(double beta, double x)
{
    if (!(beta >= 0.0))
        throw DomainError("beta must be nonnegative");
    const double inv = 1.0 / std::sqrt(kTwoPi);
    const double e = disorder::gauss_hermite_expectation(
        [&](double w) { return std::exp(0.5 * beta * w - 0.5 * std::exp(beta * w) * x * x) * inv; });
    return -std::log(e);
}

std::vector<double> laplacian_log_partition_samples(const LaplacianParams& p, std::size_t samples, std::uint64_t seed,
                                                    const Execution& ex)
{
    p.validate();
    if (p.n > kMaxExactN)
        throw UsageError("exact enumeration is limited to N <= 22");
    std::vector<double> out(samples);
    for_each_index(samples, ex, [&](std::size_t i) {
        const auto om = disorder::sample(disorder::DisorderLaw::StandardNormal, static_cast<std::size_t>(p.n) + 1, seed, i);
        out[i] = laplacian_partition_exact(om.values, p, Execution{1}).log_value;
    });
    return out;
}

McEstimate laplacian_quenched_fe_mc(const LaplacianParams& p, std::size_t samples, std::uint64_t seed, const Execution& ex)
{
    if (samples < 2)
        throw UsageError("Monte Carlo needs at least two samples");
    auto v = laplacian_log_partition_samples(p, samples, seed, ex);
    for (double& x : v)
        x /= p.n;
    return summarize(v);
}

} // namespace pinning::laplacian
