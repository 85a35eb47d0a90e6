#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pinning/disorder.hpp"
#include "pinning/generating.hpp"
#include "pinning/log_weight.hpp"
#include "pinning/mean_expectation.hpp"
#include "pinning/parallel.hpp"
#include "pinning/statistics.hpp"
#include "pinning/zeta.hpp"

namespace pinning::gradient {

// -(d/2) log(1 - x)
double psi(double x, int d);
// (d/2)(x + x^2/2 + x^3/3) <= psi(x, d) for 0 <= x < 1
double psi_cubic_lower_bound(double x, int d);

// eps_c(0) = (2 pi)^{d/2} / zeta(d/2), d >= 3
double epsilon_c0(int d);

struct RenewalKernel {
    int d = 3;
    ZetaValue zeta;
    std::int64_t n_max = 0;
    Bracket tail; // sum_{n>n_max} K(n)

    double mass(std::int64_t n) const { return std::pow(static_cast<double>(n), -0.5 * d) / zeta.value; }
};
RenewalKernel renewal_kernel(int d, std::int64_t n_max = 100000);

struct AnnealedOptions {
    std::int64_t n_max = 100000;
    std::int64_t exact_limit = 1024;
};

// E (2 pi S_n)^{-d/2}, S_n = sum_{i<n} (1 + beta omega_i)^{-1}. Binomial sum over the
// plus-count for n <= exact_limit, moment expansion beyond.
disorder::MeanExpectation expected_segment_weight(std::int64_t n, double beta, int d,
                                                  std::int64_t exact_limit = 1024);

// a_n = eps E (2 pi S_n)^{-d/2}
disorder::MeanExpectation annealed_coefficient(std::int64_t n, double beta, double eps, int d,
                                               std::int64_t exact_limit = 1024);

struct CriticalPoint {
    double value = 0.0;
    Bracket bracket;
};

// (2 pi)^{d/2} / sum_n E S_n^{-d/2}; zero for d <= 2.
CriticalPoint annealed_critical_point(double beta, int d, const AnnealedOptions& opt = {});
// eps_c(0) (1 - beta^2)^{-d/2} / R(beta), d >= 3.
CriticalPoint annealed_critical_point_tilted_form(double beta, int d, const AnnealedOptions& opt = {});

struct FreeEnergyValue {
    double value = 0.0;
    Bracket bracket;
    bool localized = false;
};

FreeEnergyValue annealed_free_energy(double beta, double eps, int d, const AnnealedOptions& opt = {});

// Homogeneous renewal with a_n = eps (2 pi n kappa)^{-d/2}. kappa = 1 is beta = 0;
// kappa = 1/(1 - beta) is the lower-bound process Y_N.
FreeEnergyValue homogeneous_free_energy(double kappa, double eps, int d, std::int64_t n_max = 100000);

struct TiltedKernelBundle {
    double beta = 0.0;
    int d = 3;
    std::int64_t n_max = 0;
    ZetaValue zeta;
    std::vector<double> r_n;      // index n, entry 0 unused
    std::vector<double> r_n_err;
    Bracket r_sum;                // sum_{n<=n_max} R_n n^{-d/2}, rounding included
    Bracket r_tail;               // sum_{n>n_max} R_n n^{-d/2}
    Bracket r;                    // R = zeta^{-1} (r_sum + r_tail)
    std::vector<double> kbar;     // Kbar(n) = R_n K(n) / R at the midpoint R
    Bracket kbar_tail;            // sum_{n>n_max} Kbar(n)
    Bracket mean;                 // sum n Kbar(n); +inf for d <= 4
    Bracket c_beta;               // 1 / mean

    double kernel_mass(std::int64_t n) const { return std::pow(static_cast<double>(n), -0.5 * d) / zeta.value; }
};

TiltedKernelBundle tilted_bundle(double beta, int d, std::int64_t n_max = 100000, std::int64_t exact_limit = 1024);

// Root of sum_n e^{-F n} e^Delta Kbar(n) = 1
FreeEnergyValue tilted_free_energy(const TiltedKernelBundle& b, double delta);

// (direct eps^l Zcal_N, exhaustive sum of the psi/K renewal form)
std::pair<LogWeight, LogWeight> renewal_representation_check(std::span<const double> omega, double beta, double eps,
                                                             int d, int n);

// E Zcal_k, k = 0..n, pinned eps^{l-1} convention (entry 0 unused), linear scale.
std::vector<double> annealed_partition_expectation(double beta, double eps, int d, int n);

struct AnnealedIdentity {
    double eps = 0.0;
    double exact = 0.0;   // E Zcal_N by the binomial-reduced recursion (eps^{l-1})
    double renewal = 0.0; // e^{Fbar N} P(N in taubar) / eps
    McEstimate mc;            // plain sample mean of Zcal_N
    McEstimate mc_stratified; // stratified over the plus-count
};

AnnealedIdentity annealed_identity_check(double beta, double delta, int d, int n, std::size_t mc_samples,
                                         std::uint64_t seed, const TiltedKernelBundle& bundle, const Execution& ex = {});

// E Zcal_N by sampling uniform arrangements within each plus-count k and weighting the stratum
// means by the exact Binomial(N, 1/2) masses. Zcal_N is heavy tailed (runs of plus charges),
// so the plain sample mean and its standard error are unreliable at moderate N.
McEstimate stratified_partition_mc(double beta, double eps, int d, int n, std::size_t samples, std::uint64_t seed,
                                   const Execution& ex = {});

struct JensenBoundCheck {
    double lower_bound = 0.0;     // L(beta) at the midpoint of its truncation bracket
    Bracket lower_bound_bracket;
    double analytic_bound = 0.0;  // d zeta(d/2+1) beta^2 / (4 zeta(d/2-1))
    bool holds() const { return lower_bound_bracket.lower >= analytic_bound; }
};

JensenBoundCheck jensen_bound_check(double beta, int d, std::int64_t n_max = 100000);

} // namespace pinning::gradient
