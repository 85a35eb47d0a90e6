#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pinning/determinant.hpp"
#include "pinning/disorder.hpp"
#include "pinning/log_weight.hpp"
#include "pinning/parallel.hpp"
#include "pinning/statistics.hpp"

namespace pinning::gradient {

enum class Endpoint { Pinned, Free };

struct GradientParams {
    int d = 1;
    double beta = 0.0;
    double eps = 0.0;
    int n = 1;
    Endpoint endpoint = Endpoint::Pinned;

    void validate() const;
};

// S_0 = 0, S_k = sum_{i<k} (1 + beta omega_i)^{-1}
struct InverseWeightPrefix {
    std::vector<double> s;

    static InverseWeightPrefix build(std::span<const double> omega, double beta, int n);
    double segment(int i, int j) const { return s[j] - s[i]; }
};

struct PinningConfiguration {
    std::vector<int> sites; // 0 = i_0 < ... < i_l = N
};

// prod a_i * sum 1/a_i: the determinant of the (n-1)x(n-1) tridiagonal matrix
// A_ii = a_{i-1} + a_i, A_{i,i+1} = -a_i.
double det_gradient(std::span<const double> a);
DenseMatrix gradient_matrix(std::span<const double> a);

// Exact log Z at eps = 0 (raw, not adjusted).
LogWeight raw_partition_eps0(const disorder::DisorderSequence& omega, const GradientParams& p);

// (2 pi S)^{-d/2}
double segment_weight(double s, int d);

// Pinned: the eps^{l-1} expansion via the O(N^2) recursion.
// Free: the eps^l renewal convention with the incomplete last excursion (d >= 3).
LogWeight adjusted_partition(const disorder::DisorderSequence& omega, const GradientParams& p);

// log Zcal_k for k = 0..N in the pinned eps^{l-1} convention (entry 0 unused, set to 0).
std::vector<double> adjusted_partition_prefix(std::span<const double> omega, const GradientParams& p);

// log of the renewal-convention partition functions Y_0 = 1, Y_k = eps Zcal_k, k = 0..n.
std::vector<double> renewal_partition_prefix(std::span<const double> omega, int d, double beta, double eps, int n);

// Recursion on prefix sums u_k = 2 pi S_k; returns log Zcal_k (pinned, eps^{l-1}), k = 0..n.
// This is the hot loop shared by every gradient-model caller.
std::vector<double> pinned_recursion(std::span<const double> u, int d, double eps);

// Independent 2^{N-1} enumeration; refuses N > 20.
LogWeight enumerate_partition_oracle(const disorder::DisorderSequence& omega, const GradientParams& p);
LogWeight enumerate_configuration(const disorder::DisorderSequence& omega, const GradientParams& p,
                                  const PinningConfiguration& c);

// log(Zcal_N / w(0,N)) / N is the default (exactly zero at eps = 0);
// Adjusted uses log(Zcal_N) / N.
enum class FreeEnergyNormalization { Ratio, Adjusted };

McEstimate quenched_free_energy_mc(const GradientParams& p, std::size_t samples, std::uint64_t seed,
                                   FreeEnergyNormalization norm = FreeEnergyNormalization::Ratio,
                                   const Execution& ex = {});

// -(d/4) log(1 - beta^2)
double raw_free_energy_limit_eps0(double beta, int d);

// Incomplete-excursion masses sum_{m>n} K(m) for n = 0..n_max (K the d-dim renewal kernel).
std::vector<double> renewal_tail_masses(int d, int n_max);

// log(1 + c N eps_c(0) / (eps (1-beta)^{d/2})) with c = 1/(d/2 - 1): bound on log(Zf/Z), renewal convention.
double free_endpoint_log_gap_bound(const GradientParams& p);

} // namespace pinning::gradient
