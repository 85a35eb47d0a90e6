#pragma once

#include <stdexcept>
#include <string>

namespace pinning {

// Bad arguments or flag combinations. The CLI maps this to exit code 2.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Operation exists but refuses this parameter range (oracle size caps, d < 5 for the FMM pipeline).
class Unsupported : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A computation detected something that should be impossible. Exit code 1.
class Inconsistency : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public Inconsistency {
public:
    explicit NotPositiveDefinite(const std::string& what) : Inconsistency(what) {}
};

} // namespace pinning
