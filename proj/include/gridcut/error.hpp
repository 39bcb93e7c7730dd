#pragma once

#include <stdexcept>
#include <string>

namespace gridcut {

// Error categories surfaced by the library. All derive from Error so callers
// (the CLI in particular) can catch one type and map it to an exit code.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent arguments: size mismatches, bad ranges.
class InputError : public Error {
public:
    using Error::Error;
};

// Problem too large for an exact method, or geometric constraints that
// cannot be satisfied in the available area.
class CapacityError : public Error {
public:
    using Error::Error;
};

// Mathematically undefined request: zero impedance, coincident atoms, ...
class DomainError : public Error {
public:
    using Error::Error;
};

// Text input that does not follow the expected grammar.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

// Well-formed input that refers to things that do not exist.
class SemanticError : public Error {
public:
    using Error::Error;
};

// A value violates hard bounds (hardware limits, parameter boxes).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Iterative procedure produced NaN/inf.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace gridcut
