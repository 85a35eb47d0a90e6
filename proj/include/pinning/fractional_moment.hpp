#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pinning/gradient_annealed.hpp"
#include "pinning/parallel.hpp"
#include "pinning/statistics.hpp"

namespace pinning::fm {

struct Parameters {
    double gamma = 0.0;
    double delta = 0.0;
    std::int64_t k = 0;
    double fbar = 0.0; // tilted free energy at delta
};

// gamma = (2 + d/2)/d, delta = c beta^2, k = floor(1 / Fbar(delta)).
// d in {3,4} only with experimental = true, where gamma = (1 + d/2)/d * 1.1.
Parameters choose_parameters(double beta, double c, int d, const gradient::TiltedKernelBundle& bundle,
                             bool experimental = false);
double default_gamma(int d, bool experimental = false);

// eps with eps (1 - beta^2)^{d/2} / eps_c(0) = e^delta / R (R from the bundle)
double certificate_eps(const gradient::TiltedKernelBundle& bundle, double delta);

enum class AMode { Exact, MonteCarlo };

struct AEntry {
    double value = 0.0;
    double std_error = 0.0;
    AMode mode = AMode::Exact;
};

// A_s = E Y_s^gamma with Y the eps^l partition function (Y_0 = 1).
// Exact enumerates all 2^s charge vectors (s <= 20); MonteCarlo uses plain replicas.
AEntry fractional_moment_A(int s, double beta, int d, double eps, double gamma, AMode mode,
                           std::size_t samples = 0, std::uint64_t seed = 0, const Execution& ex = {});

// A_0..A_n exactly from one enumeration of 2^n vectors.
std::vector<double> fractional_moment_table_exact(int n, double beta, int d, double eps, double gamma,
                                                  const Execution& ex = {});

struct ImportanceOptions {
    int window = 128;
    std::size_t samples = 32;
    std::uint64_t seed = 0;
};

// A_s for s in (s_min, k] by size-biased sampling: charges drawn from P Y_{s'}/E Y_{s'} for window
// tops s', then A_s = E' Y_s^gamma E Y_{s'} / Y_{s'}. Entries s <= s_min are left zero.
std::vector<AEntry> fractional_moment_table_is(std::int64_t k, std::int64_t s_min, double delta, double gamma,
                                               const gradient::TiltedKernelBundle& bundle,
                                               const ImportanceOptions& opt, const Execution& ex = {});

// Rough count of kernel evaluations for the sampler.
double importance_cost(std::int64_t k, std::int64_t s_min, const ImportanceOptions& opt);

// Strict (sum a)^gamma < sum a^gamma.
bool subadditivity_inequality_check(std::span<const double> values, double gamma);

struct RhoValue {
    double value = 0.0;        // with the A point values
    double tail_bound = 0.0;   // truncation tail plus numeric error of E_m
    double mc_inflation = 0.0; // contribution of 3 SE on Monte Carlo entries
    double upper() const { return value + tail_bound + mc_inflation; }
};

// E_m = E (1 - beta wbar_m)^{-gamma d/2}, m = 0..n (entry 0 unused); values and error half-widths.
struct FractionalWeights {
    std::vector<double> e;
    std::vector<double> e_err;
};
FractionalWeights fractional_weights(double beta, int d, double gamma, std::int64_t n);

// rho = (e^delta / R)^gamma sum_{n=k+1}^{n_trunc} sum_{s<=k} K(n-s)^gamma E_{n-s} A_s
RhoValue rho(const gradient::TiltedKernelBundle& bundle, double delta, double gamma, std::int64_t k,
             std::span<const AEntry> a, std::int64_t n_truncation, const FractionalWeights& w);
RhoValue rho(const gradient::TiltedKernelBundle& bundle, double delta, double gamma, std::int64_t k,
             std::span<const AEntry> a, std::int64_t n_truncation = 1000000);

enum class Verdict { Certified, NotCertified };

struct GapCertificate {
    double beta = 0.0;
    int d = 5;
    double c = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    std::int64_t k = 0;
    double eps = 0.0;
    double eps_annealed = 0.0;
    double fbar = 0.0;
    std::int64_t n_truncation = 0;
    int exact_s_cutoff = 0;
    std::size_t mc_samples = 0;
    int window = 0;
    std::uint64_t seed = 0;
    double budget = 0.0;
    double estimated_cost = 0.0;
    double rho_value = 0.0;
    double rho_tail_bound = 0.0;
    double mc_inflation = 0.0;
    std::vector<AEntry> a;
    Verdict verdict = Verdict::NotCertified;
    bool vacuous = false; // delta = 0
    bool experimental = false;
    std::string diagnostic;

    double rho_upper() const { return rho_value + rho_tail_bound + mc_inflation; }
    bool consistent() const { return verdict != Verdict::Certified || rho_upper() <= 1.0; }
};

struct CertifyOptions {
    int exact_s_cutoff = 16;
    std::size_t mc_samples = 32;
    int window = 128;
    std::uint64_t seed = 1;
    double budget = 4e10; // kernel evaluations
    std::int64_t n_truncation = 1000000;
    bool experimental = false;
};

GapCertificate certify_gap(double beta, int d, double c, const CertifyOptions& opt = {}, const Execution& ex = {});
GapCertificate certify_gap(double beta, int d, double c, const gradient::TiltedKernelBundle& bundle,
                           const CertifyOptions& opt = {}, const Execution& ex = {});

const char* to_string(Verdict v);
const char* to_string(AMode m);

} // namespace pinning::fm
