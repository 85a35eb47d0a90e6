#pragma once

#include <cstdint>

#include "pinning/zeta.hpp"

namespace pinning::disorder {

// f analytic on (-1,1) with nonnegative Taylor coefficients:
// (1-x)^{-p} or -log(1-x).
struct MeanFunction {
    enum class Kind { InversePower, NegLog };
    Kind kind = Kind::InversePower;
    double p = 1.0;

    static MeanFunction inverse_power(double p) { return {Kind::InversePower, p}; }
    static MeanFunction neg_log() { return {Kind::NegLog, 0.0}; }

    double operator()(double x) const;
    double coefficient(int k) const;       // of x^k
    double coefficient_ratio(int k) const; // coefficient(k+2)/coefficient(k), k >= 2
};

struct MeanExpectation {
    double value = 0.0;
    double error = 0.0; // half-width; the true value is inside [value - error, value + error]
    bool exact = true;
    Bracket bracket() const { return {value - error, value + error}; }
};

// E f(beta * wbar_n), wbar_n the mean of n Rademacher charges.
// Binomial sum for n <= exact_limit; beyond, four even moments exactly plus a rigorous
// remainder from E wbar^{2j} <= min(1, (2j-1)!!/n^j).
MeanExpectation rademacher_mean_expectation(const MeanFunction& f, double beta, std::int64_t n,
                                            std::int64_t exact_limit = 1024);

// Uniform in n: E f(beta wbar_n) - f(0) - c2 beta^2/n lies in [0, b/n^2].
struct MeanAsymptotics {
    double f0 = 0.0;
    double c2_beta2 = 0.0;
    double b = 0.0;
};
MeanAsymptotics rademacher_mean_asymptotics(const MeanFunction& f, double beta);

// sum_{n>m} n^{-s} E f(beta wbar_n), s > 1.
Bracket weighted_mean_tail(const MeanFunction& f, double beta, double s, std::uint64_t m);

} // namespace pinning::disorder
