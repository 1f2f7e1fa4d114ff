#pragma once

#include <stdexcept>
#include <string>

namespace mpseg {

/// Raised when input files or records cannot be parsed or fail validation.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a numerical stage cannot produce a result
/// (disconnected lattice, invalid configuration at run time, ...).
class ComputeError : public std::runtime_error {
public:
    explicit ComputeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mpseg
