#pragma once

#include <stdexcept>
#include <string>

namespace fsrec {

// Base class for failures that the CLI maps to exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad command line, bad config file, unknown config key.  Exit code 1.
struct UsageError : Error {
    using Error::Error;
};

// Broken dataset, manifest, or checkpoint.  Exit code 2.
struct DataError : Error {
    using Error::Error;
};

// Non-finite loss or other numeric breakdown.  Exit code 3.
struct NumericError : Error {
    using Error::Error;
};

}  // namespace fsrec
