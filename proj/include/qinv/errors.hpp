#pragma once

#include <stdexcept>

namespace qinv {

/// A numerical routine could not produce a trustworthy result: singular
/// systems, non-completely-positive chi matrices, rank-deficient fits.
/// Precondition violations use std::invalid_argument instead.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reading or writing an artifact failed, or an artifact is corrupt.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qinv
