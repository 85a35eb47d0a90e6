#include "pinning/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pinning/errors.hpp"

namespace pinning::disorder {

void DisorderLawParams::validate_gradient() const
{
    if (law != DisorderLaw::Rademacher)
        throw UsageError("the gradient model uses Rademacher charges");
    if (!(beta >= 0.0) || !(beta < 1.0))
        throw DomainError("gradient model needs 0 <= beta < 1");
}

void DisorderLawParams::validate_laplacian() const
{
    if (law != DisorderLaw::StandardNormal)
        throw UsageError("the Laplacian model uses Gaussian charges");
    if (!(beta >= 0.0))
        throw DomainError("Laplacian model needs beta >= 0");
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

Engine make_engine(std::uint64_t seed, std::uint64_t index)
{
    return Engine(derive_seed(seed, index));
}

DisorderSequence sample(DisorderLaw law, std::size_t length, std::uint64_t seed, std::uint64_t index)
{
    DisorderSequence s;
    s.law = law;
    s.seed = seed;
    s.index_offset = index;
    s.values.resize(length);
    Engine eng = make_engine(seed, index);
    if (law == DisorderLaw::Rademacher) {
        std::uint64_t bits = 0;
        int left = 0;
        for (std::size_t i = 0; i < length; ++i) {
            if (left == 0) {
                bits = eng();
                left = 64;
            }
            s.values[i] = (bits & 1ULL) ? 1.0 : -1.0;
            bits >>= 1;
            --left;
        }
    } else {
        std::normal_distribution<double> nd(0.0, 1.0);
        for (auto& v : s.values)
            v = nd(eng);
    }
    return s;
}

DisorderSequence sample(const DisorderLawParams& law, std::size_t length, std::uint64_t seed, std::uint64_t index)
{
    return sample(law.law, length, seed, index);
}

double mgf(DisorderLaw law, double t)
{
    return law == DisorderLaw::Rademacher ? std::cosh(t) : std::exp(0.5 * t * t);
}

std::vector<double> binomial_weights(int n)
{
    if (n < 0)
        throw UsageError("binomial_weights needs n >= 0");
    std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
    const int mode = n / 2;
    w[mode] = 1.0;
    // ratios C(n,k+1)/C(n,k) = (n-k)/(k+1), walked out from the mode so nothing overflows
    for (int k = mode; k < n; ++k)
        w[k + 1] = w[k] * static_cast<double>(n - k) / static_cast<double>(k + 1);
    for (int k = mode; k > 0; --k)
        w[k - 1] = w[k] * static_cast<double>(k) / static_cast<double>(n - k + 1);
    double s = 0.0;
    for (double x : w)
        s += x;
    for (double& x : w)
        x /= s;
    return w;
}

double rademacher_window_expectation(const std::function<double(int)>& f, int n)
{
    if (n <= 0)
        throw UsageError("rademacher_window_expectation needs n >= 1");
    const auto w = binomial_weights(n);
    double acc = 0.0;
    for (int k = 0; k <= n; ++k)
        if (w[k] > 0.0)
            acc += w[k] * f(k);
    return acc;
}

GaussHermiteRule gauss_hermite_rule(int order)
{
    if (order < 1)
        throw UsageError("Gauss-Hermite order must be positive");
    const int n = order;
    std::vector<double> x(n), w(n);
    const double pim4 = std::pow(std::numbers::pi, -0.25);
    const int m = (n + 1) / 2;
    double z = 0.0;
    // Newton on the orthonormal Hermite recurrence, standard initial guesses
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * x[1];
        else
            z = 2.0 * z - x[i - 2];
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(z - z1) <= 1e-15 * std::max(1.0, std::fabs(z)))
                break;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    GaussHermiteRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double s = std::sqrt(2.0);
    const double isp = 1.0 / std::sqrt(std::numbers::pi);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = s * x[i];
        r.weights[i] = w[i] * isp;
    }
    return r;
}

double gauss_hermite_expectation(const std::function<double(double)>& f, int order)
{
    if (order < 2)
        throw UsageError("Gauss-Hermite order must be at least 2");
    const auto r = gauss_hermite_rule(order);
    double acc = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
        acc += r.weights[i] * f(r.nodes[i]);
    return acc;
}

CheckedExpectation gauss_hermite_expectation_checked(const std::function<double(double)>& f, int order, double rel_tol)
{
    CheckedExpectation out;
    double prev = gauss_hermite_expectation(f, order);
    for (int o = 2 * order; o <= 480; o *= 2) {
        const double cur = gauss_hermite_expectation(f, o);
        out.value = cur;
        out.change = std::fabs(cur - prev);
        out.order = o;
        if (out.change <= rel_tol * std::fabs(cur))
            return out;
        prev = cur;
    }
    return out;
}

} // namespace pinning::disorder
