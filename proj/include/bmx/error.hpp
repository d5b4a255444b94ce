#pragma once

#include <stdexcept>
#include <string>

namespace bmx {

enum class ErrorKind { structural, capability, numerical, domain, reliability, usage };

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::structural: return "structural";
        case ErrorKind::capability: return "capability";
        case ErrorKind::numerical: return "numerical";
        case ErrorKind::domain: return "domain";
        case ErrorKind::reliability: return "reliability";
        case ErrorKind::usage: return "usage";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Dimension or layout mismatch between models, points or data.
struct StructuralError : Error {
    explicit StructuralError(const std::string& w) : Error(ErrorKind::structural, w) {}
};

// The model does not provide something the operation needs.
struct CapabilityError : Error {
    explicit CapabilityError(const std::string& w) : Error(ErrorKind::capability, w) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& w) : Error(ErrorKind::numerical, w) {}
};

// Bad argument values and unmet hypotheses.
struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};

// Too many degenerate Monte Carlo draws or failed replications.
struct ReliabilityError : Error {
    explicit ReliabilityError(const std::string& w) : Error(ErrorKind::reliability, w) {}
};

struct UsageError : Error {
    explicit UsageError(const std::string& w) : Error(ErrorKind::usage, w) {}
};

// Process exit status: 2 for usage problems, 3 for everything the library refuses to compute.
inline int exit_code(ErrorKind k) { return k == ErrorKind::usage ? 2 : 3; }

}  // namespace bmx
