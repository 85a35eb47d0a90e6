#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pinning/run_record.hpp"

namespace pinning::cli {

enum ExitCode { Ok = 0, ComputationFailure = 1, UsageFailure = 2 };

struct SuiteResult {
    std::string name;
    int cases = 0;
    double max_rel_error = 0.0;
    bool passed = true;
    std::string counterexample; // first failing case
};

// Determinant closed forms and monomial structure against dense oracles.
// corrupt perturbs the gradient closed form (negative control).
std::vector<SuiteResult> verify_lemmas(int max_n, int cases, std::uint64_t seed, bool corrupt = false);

// Full command line (without the program name). Writes the record or data to out (or --out),
// diagnostics to err; returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace pinning::cli
