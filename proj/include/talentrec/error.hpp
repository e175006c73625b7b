#pragma once

#include <stdexcept>
#include <string>

namespace talentrec {

// Error taxonomy mirrors the CLI exit-code contract:
//   ConfigError -> 2, DataError -> 3, NumericError -> 4.

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace talentrec
