#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace pinning::disorder {

enum class DisorderLaw { Rademacher, StandardNormal };

struct DisorderLawParams {
    DisorderLaw law = DisorderLaw::Rademacher;
    double beta = 0.0;

    // gradient weights 1 + beta*omega must stay positive
    void validate_gradient() const;
    void validate_laplacian() const;
};

struct DisorderSequence {
    std::vector<double> values;
    DisorderLaw law = DisorderLaw::Rademacher;
    std::uint64_t seed = 0;
    std::uint64_t index_offset = 0;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

std::uint64_t splitmix64(std::uint64_t x);
// Stable per-sample seed; the same (seed, index) always gives the same stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

using Engine = std::mt19937_64;
Engine make_engine(std::uint64_t seed, std::uint64_t index);

DisorderSequence sample(DisorderLaw law, std::size_t length, std::uint64_t seed, std::uint64_t index);
DisorderSequence sample(const DisorderLawParams& law, std::size_t length, std::uint64_t seed, std::uint64_t index);

// E exp(t * omega)
double mgf(DisorderLaw law, double t);

// P(k plus signs among n), k = 0..n, normalized to sum one.
std::vector<double> binomial_weights(int n);

// E f(k) with k ~ Binomial(n, 1/2).
double rademacher_window_expectation(const std::function<double(int)>& f, int n);

struct GaussHermiteRule {
    std::vector<double> nodes;   // already scaled for a standard normal
    std::vector<double> weights; // sum to one
};
GaussHermiteRule gauss_hermite_rule(int order);

double gauss_hermite_expectation(const std::function<double(double)>& f, int order = 60);

struct CheckedExpectation {
    double value = 0.0;
    double change = 0.0; // |value(order) - value(order/2)|
    int order = 0;
};
// Doubles the order from `order` until two successive values agree to rel_tol (or order 480).
CheckedExpectation gauss_hermite_expectation_checked(const std::function<double(double)>& f, int order = 60,
                                                     double rel_tol = 1e-11);

} // namespace pinning::disorder
