#pragma once

#include <stdexcept>
#include <string>

namespace curtail {

// Invalid argument or precondition violation (bad probabilities, s > k, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// (m, s) is not a terminal outcome of the design at hand.
class NotInSupportError : public DomainError {
public:
    using DomainError::DomainError;
};

// A design search ran past its cap without finding a feasible design.
class SearchExhaustedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Enumeration or table size beyond what the routine supports.
class SizeError : public DomainError {
public:
    using DomainError::DomainError;
};

}  // namespace curtail
