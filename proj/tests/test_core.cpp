#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pinning/determinant.hpp"
#include "pinning/disorder.hpp"
#include "pinning/errors.hpp"
#include "pinning/generating.hpp"
#include "pinning/log_weight.hpp"
#include "pinning/mean_expectation.hpp"
#include "pinning/zeta.hpp"

using namespace pinning;
using doctest::Approx;

TEST_CASE("log_sum_exp")
{
    std::vector<LogWeight> a{LogWeight(0.0), LogWeight(0.0)};
    CHECK(log_sum_exp(a).log_value == Approx(std::log(2.0)).epsilon(1e-15));
    std::vector<LogWeight> b{LogWeight::zero(), LogWeight(std::log(3.0))};
    CHECK(log_sum_exp(b).log_value == Approx(std::log(3.0)).epsilon(1e-15));
    std::vector<LogWeight> c{LogWeight(1000.0), LogWeight(1000.0)};
    CHECK(log_sum_exp(c).log_value == Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(log_sum_exp(std::span<const LogWeight>{}), UsageError);
    CHECK((LogWeight::from_linear(2.0) * LogWeight::from_linear(3.0)).linear() == Approx(6.0));
}

TEST_CASE("riemann_zeta")
{
    const auto z2 = riemann_zeta(2.0, 1e-13);
    CHECK(std::fabs(z2.value - std::numbers::pi * std::numbers::pi / 6.0) <= 1e-13);
    CHECK(z2.bracket.contains(std::numbers::pi * std::numbers::pi / 6.0));
    CHECK(riemann_zeta(1.5).value == Approx(2.612375348685488).epsilon(1e-12));
    CHECK(riemann_zeta(2.5).value == Approx(1.341487257250917).epsilon(1e-12));
    CHECK_THROWS_AS(riemann_zeta(1.0), DomainError);
}

TEST_CASE("power sum tail brackets the direct sum")
{
    double direct = 0.0;
    for (int k = 2000000; k > 100; --k)
        direct += std::pow(k, -2.5);
    const auto b = power_sum_tail(2.5, 100);
    CHECK(b.lower <= direct + 1e-15);
    CHECK(b.upper >= direct);
    CHECK(b.width() < 1e-3 * direct);
}

TEST_CASE("generating equation")
{
    const std::vector<double> one{1.0};
    auto r = solve_generating_equation(one, TailModel{});
    CHECK(r.has_root());
    CHECK(r.x == Approx(1.0));

    std::vector<double> geo(200);
    for (std::size_t i = 0; i < geo.size(); ++i)
        geo[i] = 2.0 * std::pow(0.5, static_cast<double>(i + 1));
    r = solve_generating_equation(geo, TailModel{});
    REQUIRE(r.has_root());
    CHECK(r.x == Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(std::fabs(generating_series(geo, -std::log(r.x)) - 1.0) <= 1e-12);

    const std::vector<double> sub{0.5, 0.4};
    CHECK_FALSE(solve_generating_equation(sub, TailModel{}).has_root());
    CHECK(solve_generating_equation(sub, TailModel{}).free_energy() == 0.0);
}

TEST_CASE("dense and banded determinants")
{
    CHECK(dense_determinant(DenseMatrix({{5, -3}, {-3, 7}})) == Approx(26.0));
    CHECK(dense_determinant(DenseMatrix(std::vector<std::vector<double>>{{2.0}})) == Approx(2.0));
    CHECK(dense_determinant(DenseMatrix({{6, -4}, {-4, 6}})) == Approx(20.0));
    CHECK_THROWS_AS(dense_determinant(DenseMatrix(2, 3)), UsageError);

    BandedMatrixSpec id{5, 1, {}};
    for (int i = 0; i < 5; ++i)
        id.set(i, i, 1.0);
    CHECK(banded_ldl_determinant(id).log_abs_det.log_value == Approx(0.0));

    BandedMatrixSpec tri{2, 1, {}};
    tri.set(0, 0, 5.0);
    tri.set(1, 1, 7.0);
    tri.set(0, 1, -3.0);
    CHECK(banded_ldl_determinant(tri).log_abs_det.log_value == Approx(std::log(26.0)).epsilon(1e-14));

    // all-ones pentadiagonal Laplacian, N = 3
    BandedMatrixSpec pent{2, 2, {}};
    pent.set(0, 0, 6.0);
    pent.set(1, 1, 6.0);
    pent.set(0, 1, -4.0);
    CHECK(banded_ldl_determinant(pent).log_abs_det.log_value == Approx(std::log(20.0)).epsilon(1e-14));

    BandedMatrixSpec singular{2, 1, {}};
    singular.set(0, 0, 1.0);
    singular.set(1, 1, 1.0);
    singular.set(0, 1, 1.0);
    CHECK_THROWS_AS(banded_ldl_determinant(singular), NotPositiveDefinite);

    CHECK(exact_integer_determinant({{5, -3}, {-3, 7}}) == 26);
}

TEST_CASE("disorder sampling")
{
    using namespace disorder;
    CHECK(sample(DisorderLaw::Rademacher, 0, 1, 0).size() == 0);
    const auto big = sample(DisorderLaw::Rademacher, 1000000, 5, 0);
    double m = 0.0;
    for (double x : big.values) {
        CHECK_FALSE((x != 1.0 && x != -1.0));
        m += x;
    }
    CHECK(std::fabs(m / 1e6) < 0.004);
    CHECK(sample(DisorderLaw::StandardNormal, 50, 9, 3).values == sample(DisorderLaw::StandardNormal, 50, 9, 3).values);
    CHECK(sample(DisorderLaw::Rademacher, 50, 9, 3).values != sample(DisorderLaw::Rademacher, 50, 9, 4).values);
    CHECK(mgf(DisorderLaw::Rademacher, 0.7) == Approx(std::cosh(0.7)));
    CHECK(mgf(DisorderLaw::StandardNormal, 0.7) == Approx(std::exp(0.245)));
}

TEST_CASE("window expectations and quadrature")
{
    using namespace disorder;
    CHECK(rademacher_window_expectation([](int k) { return double(k); }, 2) == Approx(1.0));
    CHECK(rademacher_window_expectation([](int) { return 1.0; }, 3) == Approx(1.0));
    CHECK_THROWS_AS(rademacher_window_expectation([](int) { return 1.0; }, 0), UsageError);
    // n = 1, beta = 0, d = 2
    const double v = rademacher_window_expectation(
        [](int) { return std::pow(2.0 * std::numbers::pi * 1.0, -1.0); }, 1);
    CHECK(v == Approx(0.159155).epsilon(1e-6));

    CHECK(gauss_hermite_expectation([](double) { return 1.0; }) == Approx(1.0));
    CHECK(gauss_hermite_expectation([](double x) { return x * x; }) == Approx(1.0));
    CHECK(std::fabs(gauss_hermite_expectation([](double x) { return std::exp(x); }, 40) - std::exp(0.5)) <= 1e-10);
    const auto chk = gauss_hermite_expectation_checked([](double x) { return std::exp(x); });
    CHECK(chk.value == Approx(std::exp(0.5)).epsilon(1e-11));
}

TEST_CASE("mean expectation brackets the binomial sum")
{
    using namespace disorder;
    const auto f = MeanFunction::inverse_power(2.25);
    for (std::int64_t n : {1500, 4000}) {
        const auto exact = rademacher_mean_expectation(f, 0.3, n, 1 << 20);
        const auto approx = rademacher_mean_expectation(f, 0.3, n, 1024);
        CHECK(approx.bracket().contains(exact.value, 1e-13));
        CHECK(approx.error < 1e-9);
    }
    CHECK(rademacher_mean_expectation(f, 0.0, 50).value == Approx(1.0));
}
