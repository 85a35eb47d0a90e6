#pragma once

#include <cstdint>

namespace pinning {

struct Bracket {
    double lower = 0.0;
    double upper = 0.0;

    double mid() const { return 0.5 * (lower + upper); }
    double width() const { return upper - lower; }
    bool contains(double x, double slack = 0.0) const { return x >= lower - slack && x <= upper + slack; }

    Bracket& operator+=(const Bracket& o)
    {
        lower += o.lower;
        upper += o.upper;
        return *this;
    }
    friend Bracket operator+(Bracket a, const Bracket& b) { return a += b; }
    // positive scale only
    friend Bracket operator*(double c, Bracket b) { return {c * b.lower, c * b.upper}; }
};

// sum_{k>n} k^{-s}, s > 1. Convexity of t^{-s} gives
// int_{n+1}^inf + f(n+1)/2 <= tail <= int_{n+1/2}^inf.
Bracket power_sum_tail(double s, std::uint64_t n);

// Upper bound on sum_{k>n} k^{-s} x^k for 0 < x <= 1; +inf if it diverges.
double power_sum_tail_upper(double s, std::uint64_t n, double x);

// Bracket on sum_{k>n} k^{-s} x^k, s >= 0, 0 < x <= 1, from the same convexity argument
// with int t^{-s} x^t dt = mu^{s-1} Gamma(1-s, mu a). Upper may be +inf at x = 1.
Bracket power_series_tail(double s, std::uint64_t n, double x);

// Gamma(a, z) for any real a and z > 0.
double upper_incomplete_gamma(double a, double z);

struct ZetaValue {
    double value = 0.0;
    Bracket bracket;
    std::uint64_t n_max = 0;
    double partial_sum = 0.0;
};

// Certified: |value - zeta(s)| <= tol and zeta(s) lies in bracket.
ZetaValue riemann_zeta(double s, double tol = 1e-13);

// Compensated running sum.
struct NeumaierSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x);
    double value() const { return sum + comp; }
};

} // namespace pinning
