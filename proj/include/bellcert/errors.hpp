#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bellcert {

// Bad argument values, unusable parameter combinations (CLI exit code 3).
struct InvalidParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (CLI exit code 2). Carries the
// 1-based record index or line number when known (0 = unknown).
struct DataError : std::runtime_error {
    std::size_t index = 0;
    explicit DataError(const std::string& what, std::size_t idx = 0)
        : std::runtime_error(idx ? what + " (record " + std::to_string(idx) + ")" : what),
          index(idx) {}
};

// Statistic/method mismatch, e.g. a binomial p-value requested for a
// non-binary walk (CLI exit code 3).
struct IncompatibleMethodError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace bellcert
