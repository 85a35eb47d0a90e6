#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "pinning/determinant.hpp"
#include "pinning/generating.hpp"
#include "pinning/log_weight.hpp"
#include "pinning/parallel.hpp"
#include "pinning/statistics.hpp"

namespace pinning::laplacian {

// Powers of sqrt(2 pi) attached to a configuration with l pinned interior sites.
enum class Normalization {
    PerReturn,       // (2 pi)^{-l/2} (default)
    PerReturnPlusOne // (2 pi)^{-(l+1)/2}
};

struct LaplacianParams {
    double beta = 0.0;
    double eps = 0.0;
    int n = 2;
    Normalization normalization = Normalization::PerReturn;

    void validate() const;
};

// Charges b_0..b_N enter sum_n b_n (Delta phi_n)^2 / 2 with phi(-1) = phi(0) = phi(N) = phi(N+1) = 0.
// Free sites 1..N-1 give an (N-1)x(N-1) pentadiagonal matrix.
DenseMatrix laplacian_matrix(std::span<const double> b);
// Rows and columns of the pinned sites (values in 1..N-1) removed.
DenseMatrix laplacian_pinned_matrix(std::span<const double> b, const std::vector<int>& pinned);

// prod b_i * D(N-1), D = sum_{k=1}^{N} sum_{i=0}^{N-k} k^2 / (b_i b_{i+k})
double det_laplacian_full(std::span<const double> b);
double weighted_pair_sum(std::span<const double> b);  // D(N-1)
double pair_sum_bracket(std::span<const double> b); // T_N = sum_{i<j} 1/(b_i b_j)

// Banded LDL on the reduced matrix.
double log_det_laplacian_pinned(std::span<const double> b, const std::vector<int>& pinned);
double det_laplacian_pinned(std::span<const double> b, const std::vector<int>& pinned);

// Exact integer determinant at b = 1 (Bareiss).
std::int64_t det_laplacian_homogeneous_exact(int n);

// Polynomial in x_0..x_N with integer coefficients; exponents packed 4 bits per variable.
struct MonomialPolynomial {
    int n_vars = 0;
    std::map<std::uint64_t, std::int64_t> terms;

    static int exponent(std::uint64_t key, int var) { return static_cast<int>((key >> (4 * var)) & 0xF); }
    double evaluate(std::span<const double> x) const;
    std::int64_t coefficient_sum() const;
    // -1 when degrees differ
    int uniform_degree() const;
    bool square_free() const;
    bool positive_coefficients() const;
};

// Symbolic expansion over permutations with |sigma(i) - i| <= 2; N <= 10.
MonomialPolynomial monomial_determinant(int n, const std::vector<int>& pinned);

// log of sum_{|P| = l} sqrt(prod b / det L^P), l = 0..N-1, by enumerating all 2^{N-1} subsets.
std::vector<double> log_subset_coefficients(std::span<const double> b, const Execution& ex = {});

// Adjusted partition function prod e^{beta omega_i / 2} Z; N <= 22.
LogWeight laplacian_partition_exact(std::span<const double> omega, const LaplacianParams& p, const Execution& ex = {});
LogWeight partition_from_coefficients(std::span<const double> log_coeff, double eps, Normalization norm);

// Homogeneous coefficient tables S_{N,l} for N = 1..n_max (index N; S_{1,0} = 1).
struct HomogeneousTable {
    std::vector<std::vector<double>> log_coeff;
    int n_max() const { return static_cast<int>(log_coeff.size()) - 1; }
    LogWeight partition(int n, double eps, Normalization norm) const;
};
HomogeneousTable homogeneous_table(int n_max, const Execution& ex = {});

// Length-shifted homogeneous sequence Z_1..Z_{n_max+1} (index 0 unused):
// Z_1 = (2 pi)^{-1/2}, Z_n = (2 pi)^{-1/2} Zraw_{n-1} with the (l+1) normalization.
std::vector<double> renewal_partition_sequence(const HomogeneousTable& t, double eps);

// Solves Z_n = Zh_n + Zh_1 eps Z_{n-1} + sum_{c=3}^{n-2} Zh_c eps^2 Z_{n-c} + Zh_{n-1} eps Z_1
// with Zh_1 = Z_1, Zh_2 = 0. Throws Inconsistency on a clearly negative Zh.
std::vector<double> no_double_return_deconvolve(std::span<const double> z, double eps);
std::vector<double> no_double_return_convolve(std::span<const double> zh, double eps);

struct NonRandomFreeEnergy {
    double value = 0.0;
    Bracket bracket;
    bool localized = false;
    double tail_c = 0.0; // fitted constant of the n^{-2} tail of eps^2 Zh_n
    Bracket tail_c_range;
};

NonRandomFreeEnergy laplacian_nonrandom_free_energy(const HomogeneousTable& t, double eps);
NonRandomFreeEnergy laplacian_nonrandom_free_energy(double eps, int n_max = 22);

struct CriticalEstimate {
    double value = 0.0;
    Bracket bracket; // from the spread of the fitted tail constant
};
CriticalEstimate laplacian_critical_point(const HomogeneousTable& t);

// g(delta) = f(eps_c e^delta)(-log delta)/delta
double second_order_probe(const HomogeneousTable& t, double eps_c, double delta);

struct Sandwich {
    double lower = 0.0;
    McEstimate annealed;
    double upper = 0.0;
};
// lower = M(-beta)^{-1} Zhom(eps M(-beta)^{-1/2}), upper = M(beta/2)^2 Zhom(eps M(beta/2)); N <= 18.
Sandwich annealed_sandwich(double beta, double eps, int n, std::size_t samples, std::uint64_t seed,
                           Normalization norm = Normalization::PerReturn, const Execution& ex = {});

// V_beta(x) with e^{-V} = E[(e^{beta w/2}/sqrt(2 pi)) exp(-e^{beta w} x^2/2)]
double effective_potential(double beta, double x);

// (1/N) E log Zcal by Monte Carlo over Gaussian charges (N <= 22)
McEstimate laplacian_quenched_fe_mc(const LaplacianParams& p, std::size_t samples, std::uint64_t seed,
                                    const Execution& ex = {});
// log Zcal per replica, the same replicas as the free-energy estimator
std::vector<double> laplacian_log_partition_samples(const LaplacianParams& p, std::size_t samples, std::uint64_t seed,
                                                    const Execution& ex = {});

} // namespace pinning::laplacian
