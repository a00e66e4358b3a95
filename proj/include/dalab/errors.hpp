#pragma once

#include <stdexcept>
#include <string>

namespace dalab {

// Caller asked for something outside an operation's domain (bad a, r, k, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation could not deliver a validated result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dalab
