#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>

#include "pinning/zeta.hpp"

namespace pinning {

struct SeriesTruncation {
    std::size_t n_max = 0;
    double tail_bound = 0.0; // bound on sum_{n>n_max} coeff(n) at x = 1
};

enum class RootStatus { Root, NoRoot };

struct GeneratingRoot {
    RootStatus status = RootStatus::NoRoot;
    double x = 1.0;          // root of the truncated series (plus the tail estimate, if any)
    Bracket x_bracket{1.0, 1.0};
    double residual = 0.0;   // series (with estimate) at x, minus one
    std::size_t n_max = 0;

    bool has_root() const { return status == RootStatus::Root; }
    // -log x; zero in the delocalized phase
    double free_energy() const { return has_root() ? -std::log(x) : 0.0; }
    Bracket free_energy_bracket() const;
};

// Function of x in (0,1] describing the omitted tail sum_{n>n_max} coeff(n) x^n.
using TailBound = std::function<double(double)>;

// Any member may be empty (read as zero). The reported x solves truncated + estimate;
// the bracket comes from truncated + lower and truncated + upper.
struct TailModel {
    TailBound lower;
    TailBound upper;
    TailBound estimate;
};

// coeff[i] is the coefficient of x^{i+1}. Bisection in mu = -log x.
GeneratingRoot solve_generating_equation(std::span<const double> coeff, const TailModel& tail, double tol = 1e-13);

GeneratingRoot solve_generating_equation(const std::function<double(std::size_t)>& coeff,
                                         const SeriesTruncation& truncation, double tol = 1e-13);

// sum_{n=1}^{size} coeff[n-1] x^n with x = e^{-mu}
double generating_series(std::span<const double> coeff, double mu);

} // namespace pinning
