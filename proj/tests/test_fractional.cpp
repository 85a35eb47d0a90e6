#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "pinning/errors.hpp"
#include "pinning/fractional_moment.hpp"
#include "pinning/gradient_annealed.hpp"
#include "pinning/gradient_model.hpp"

using namespace pinning;
using namespace pinning::fm;
using doctest::Approx;

TEST_CASE("parameter choice")
{
    CHECK(default_gamma(5) == Approx(0.9));
    CHECK(default_gamma(5) * 2.5 == Approx(2.25));
    CHECK(default_gamma(6) == Approx(5.0 / 6.0));
    CHECK_THROWS_AS(default_gamma(4), Unsupported);
    const auto b = gradient::tilted_bundle(0.1, 5);
    const auto p = choose_parameters(0.1, 0.1, 5, b);
    CHECK(p.delta == Approx(1e-3));
    const double approx_k = 1.0 / (b.c_beta.mid() * 1e-3);
    CHECK(std::fabs(static_cast<double>(p.k) / approx_k - 1.0) < 0.2);
    CHECK(p.k == static_cast<std::int64_t>(std::floor(1.0 / gradient::tilted_free_energy(b, 1e-3).value)));
}

TEST_CASE("fractional moments A_s")
{
    const double eps = 30.0;
    CHECK(fractional_moment_A(0, 0.3, 5, eps, 0.9, AMode::Exact).value == 1.0);

    // gamma = 1 is the annealed expectation (Y = eps Zcal)
    const auto ez = gradient::annealed_partition_expectation(0.3, eps, 5, 16);
    const auto t1 = fractional_moment_table_exact(16, 0.3, 5, eps, 1.0);
    for (int s = 1; s <= 16; ++s)
        CHECK(t1[s] == Approx(eps * ez[s]).epsilon(1e-10));

    // beta = 0 has no disorder
    const auto t0 = fractional_moment_table_exact(10, 0.0, 5, eps, 0.9);
    const auto y = gradient::renewal_partition_prefix(std::vector<double>(10, 1.0), 5, 0.0, eps, 10);
    for (int s = 1; s <= 10; ++s)
        CHECK(t0[s] == Approx(std::exp(0.9 * y[s])).epsilon(1e-13));

    CHECK_THROWS_AS(fractional_moment_A(21, 0.3, 5, eps, 0.9, AMode::Exact), UsageError);

    // Monte Carlo agrees with the exact value
    const auto ex = fractional_moment_A(14, 0.3, 5, eps, 0.9, AMode::Exact);
    const auto mc = fractional_moment_A(14, 0.3, 5, eps, 0.9, AMode::MonteCarlo, 4000, 3);
    CHECK(std::fabs(mc.value - ex.value) <= 4.0 * mc.std_error);
    CHECK(mc.mode == AMode::MonteCarlo);

    // serial and parallel enumeration give the same bits
    const auto s1 = fractional_moment_table_exact(15, 0.3, 5, eps, 0.9, Execution{1});
    const auto s4 = fractional_moment_table_exact(15, 0.3, 5, eps, 0.9, Execution{4});
    CHECK(s1 == s4);
}

TEST_CASE("importance sampler against exact enumeration")
{
    const auto b = gradient::tilted_bundle(0.3, 5, 2000);
    const double delta = 0.02;
    const double eps = certificate_eps(b, delta);
    const auto exact = fractional_moment_table_exact(14, 0.3, 5, eps, 0.9);
    ImportanceOptions opt{5, 4000, 7};
    const auto is = fractional_moment_table_is(14, 2, delta, 0.9, b, opt);
    for (int s = 3; s <= 14; ++s) {
        CHECK(is[s].mode == AMode::MonteCarlo);
        CHECK(std::fabs(is[s].value - exact[s]) <= 4.0 * is[s].std_error + 1e-12);
    }
    const auto par = fractional_moment_table_is(14, 2, delta, 0.9, b, opt, Execution{4});
    for (int s = 3; s <= 14; ++s)
        CHECK(par[s].value == is[s].value);
}

TEST_CASE("subadditivity")
{
    CHECK(subadditivity_inequality_check(std::vector<double>{1, 1}, 0.5));
    CHECK(std::pow(12.0, 0.9) == Approx(9.3597).epsilon(1e-4));
    CHECK(subadditivity_inequality_check(std::vector<double>{3, 4, 5}, 0.9));
    CHECK_THROWS_AS(subadditivity_inequality_check(std::vector<double>{3}, 0.9), UsageError);
    // random positive sequences
    auto eng = disorder::make_engine(4, 0);
    std::uniform_real_distribution<double> u(1e-3, 10.0);
    for (int c = 0; c < 200; ++c) {
        std::vector<double> v(2 + c % 7);
        for (double& x : v)
            x = u(eng);
        CHECK(subadditivity_inequality_check(v, 0.1 + 0.004 * c));
    }
}

namespace {

// binomial sum over the plus count, log-gamma weights
long double brute_e(double beta, double p, int m)
{
    long double s = 0.0L;
    for (int j = 0; j <= m; ++j) {
        const long double lw = std::lgamma(m + 1.0L) - std::lgamma(j + 1.0L) - std::lgamma(m - j + 1.0L)
                               - m * std::log(2.0L);
        const long double wbar = (2.0L * j - m) / m;
        s += std::exp(lw) * std::pow(1.0L - beta * wbar, -p);
    }
    return s;
}

} // namespace

TEST_CASE("rho against a brute-force double sum")
{
    const int d = 5;
    const double gamma = 0.9, p = gamma * d / 2.0;
    const std::int64_t m = 1000;
    for (double beta : {0.0, 0.1, 0.3}) {
        const auto b = gradient::tilted_bundle(beta, d, 5000);
        const double zeta = riemann_zeta(2.5, 1e-15).value;
        std::vector<long double> e(m + 1);
        for (int i = 1; i <= m; ++i)
            e[i] = brute_e(beta, p, i);
        for (std::int64_t k : {1, 3, 8}) {
            const double delta = 0.01 * k;
            const double eps = certificate_eps(b, delta);
            const auto ex = fractional_moment_table_exact(static_cast<int>(k), beta, d, eps, gamma);
            std::vector<AEntry> a;
            for (auto v : ex)
                a.push_back({v, 0.0, AMode::Exact});
            const auto r = rho(b, delta, gamma, k, a, m);
            long double sum = 0.0L;
            for (std::int64_t n = k + 1; n <= m; ++n)
                for (std::int64_t s = 0; s <= k; ++s)
                    sum += std::pow(std::pow(static_cast<long double>(n - s), -2.5L) / zeta, gamma) * e[n - s] * a[s].value;
            sum *= std::pow(std::exp(static_cast<long double>(delta)) / b.r.mid(), gamma);
            CHECK(std::fabs(static_cast<double>(r.value / sum - 1.0L)) <= 1e-12);
            CHECK(r.mc_inflation == 0.0);
        }
    }
}

TEST_CASE("rho tail bound at the reference truncation")
{
    const auto b = gradient::tilted_bundle(0.0, 5);
    std::vector<AEntry> a{{1.0, 0.0, AMode::Exact}, {0.5, 0.0, AMode::Exact}};
    const auto r = rho(b, 0.0, 0.9, 1, a, 1000000);
    const double integral = std::pow(10.0, -7.5) / 1.25;
    const double scale = std::pow(b.zeta.value, -0.9) * 1.5 * std::pow(1.0 / b.r.mid(), 0.9);
    CHECK(r.tail_bound <= scale * integral * 1.001 + 1e-14 * 2.0 * r.value + 1e-15);
    CHECK(r.tail_bound > 0.0);
    CHECK_THROWS_AS(rho(b, 0.0, 0.3, 1, a, 1000), DomainError);
}

TEST_CASE("renewal equation behind rho, exhaustive small N")
{
    const int d = 5;
    for (double beta : {0.0, 0.3}) {
        const auto b = gradient::tilted_bundle(beta, d, 1000);
        const double delta = 0.2;
        const double eps = certificate_eps(b, delta);
        const double zeta = b.zeta.value;
        for (std::uint64_t draw = 0; draw < 4; ++draw) {
            const int n_len = 12;
            const auto om = disorder::sample(disorder::DisorderLaw::Rademacher, n_len, 21, draw);
            const auto y = gradient::renewal_partition_prefix(om.values, d, beta, eps, n_len);
            for (int N = 2; N <= n_len; ++N)
                for (int k = 0; k <= 3 && k < N; ++k) {
                    long double rhs = 0.0L;
                    for (int n = k + 1; n <= N; ++n)
                        for (int s = 0; s <= k; ++s) {
                            double wsum = 0.0;
                            for (int i = N - n; i < N - s; ++i)
                                wsum += om.values[i];
                            const double wbar = wsum / (n - s);
                            const double kernel = std::pow(n - s, -0.5 * d) / zeta;
                            const std::vector<double> tail(om.values.begin() + (N - s), om.values.begin() + N);
                            const double last
                                = s == 0 ? 0.0 : gradient::renewal_partition_prefix(tail, d, beta, eps, s)[s];
                            rhs += std::exp(static_cast<long double>(y[N - n] + last))
                                   * std::exp(delta) / b.r.mid() * kernel
                                   * std::exp(gradient::psi(beta * wbar, d));
                        }
                    CHECK(std::fabs(static_cast<double>(rhs / std::exp(static_cast<long double>(y[N])) - 1.0L))
                          <= 1e-12);
                }
        }
    }
}

TEST_CASE("certificate")
{
    const auto vac = certify_gap(0.0, 5, 0.1);
    CHECK(vac.vacuous);
    CHECK(vac.delta == 0.0);
    CHECK(vac.consistent());
    CHECK_THROWS_AS(certify_gap(0.1, 4, 0.1), Unsupported);

    // a budget too small for k gives NotCertified with a diagnostic, never a false Certified
    CertifyOptions tiny;
    tiny.budget = 10.0;
    const auto nc = certify_gap(0.1, 5, 0.1, tiny);
    CHECK(nc.verdict == Verdict::NotCertified);
    CHECK_FALSE(nc.diagnostic.empty());

    // small k: every A_s exact, and the verdict follows rho_upper
    CertifyOptions small;
    const auto c1 = certify_gap(0.3, 5, 1.0, small);
    MESSAGE("beta 0.3, c 1: k ", c1.k, " rho_upper ", c1.rho_upper(), " verdict ", std::string(to_string(c1.verdict)));
    CHECK(c1.consistent());
    CHECK((c1.verdict == Verdict::Certified) == (c1.rho_upper() <= 1.0));
}
