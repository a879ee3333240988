#pragma once

#include <stdexcept>
#include <string>

namespace stylearena {

// Input or protocol violation. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Maps to CLI exit code 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative solver hit its iteration cap. Maps to CLI exit code 4.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace stylearena
