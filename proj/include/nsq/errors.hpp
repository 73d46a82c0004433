#pragma once

#include <stdexcept>
#include <string>

namespace nsq {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct AliasingError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A construction precondition failed (profile slope, shell containment, ...).
struct ConstraintError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flowed sup left the admissible range; usually a misconfigured Hamiltonian.
struct BlowUpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace nsq
