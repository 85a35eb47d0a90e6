#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <span>

namespace pinning {

// Nonnegative real stored as its natural log; -inf is zero.
struct LogWeight {
    double log_value = -std::numeric_limits<double>::infinity();

    constexpr LogWeight() = default;
    constexpr explicit LogWeight(double lv) : log_value(lv) {}

    static LogWeight zero() { return LogWeight(); }
    static LogWeight one() { return LogWeight(0.0); }
    static LogWeight from_linear(double x);

    bool is_zero() const { return log_value == -std::numeric_limits<double>::infinity(); }
    double linear() const { return std::exp(log_value); }

    LogWeight& operator+=(LogWeight o);
    LogWeight& operator*=(LogWeight o) { log_value += o.log_value; return *this; }
    LogWeight& operator/=(LogWeight o) { log_value -= o.log_value; return *this; }

    friend LogWeight operator+(LogWeight a, LogWeight b) { return a += b; }
    friend LogWeight operator*(LogWeight a, LogWeight b) { return a *= b; }
    friend LogWeight operator/(LogWeight a, LogWeight b) { return a /= b; }
    friend auto operator<=>(LogWeight a, LogWeight b) { return a.log_value <=> b.log_value; }
    friend bool operator==(LogWeight a, LogWeight b) { return a.log_value == b.log_value; }
};

double log_add_exp(double a, double b);

// log(sum exp(v_i)); throws UsageError on an empty list.
LogWeight log_sum_exp(std::span<const LogWeight> values);
double log_sum_exp(std::span<const double> log_values);

} // namespace pinning
