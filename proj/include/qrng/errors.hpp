#pragma once

#include <stdexcept>
#include <string>

namespace qrng {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// malformed or inconsistent tag data
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// parametric model produced values outside its validity range
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qrng
