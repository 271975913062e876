#pragma once

#include <stdexcept>
#include <string>

namespace leaky {

/// Argument outside the mathematical domain of a function (x <= 0 for K0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid model description: bad curve parameters, overlapping wells, etc.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not deliver its result (no sign change,
/// iteration cap, insufficient window or resolution).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace leaky
