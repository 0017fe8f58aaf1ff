#pragma once

#include <stdexcept>
#include <string>

namespace mflow {

// Argument outside its admissible range.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (tables, samples, files).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Probability mass does not sum to one.
struct NormalizationError : DataError {
    NormalizationError(const std::string& what, double deficit)
        : DataError(what), deficit(deficit) {}
    double deficit;
};

// A regime evaluator was invoked with inputs violating its defining inequality.
struct RegimeMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical routine failed to converge.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Too few samples or rows for the requested analysis.
struct InsufficientDataError : DataError {
    using DataError::DataError;
};

// Unknown node or column identifier.
struct LookupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mflow
