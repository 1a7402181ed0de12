#pragma once

#include <stdexcept>
#include <string>

namespace qdet {

// Input validation failures; thrown by constructors and builders.
struct InvalidK : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidProbabilities : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DuplicateSubset : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct EmptyFamily : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failures.
struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OverflowError : std::overflow_error {
    using std::overflow_error::overflow_error;
};

}  // namespace qdet
