#pragma once

#include <stdexcept>
#include <string>

namespace netflow {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lazy column is unsorted, too long, non-stochastic, or a structural rule is broken.
class MalformedGraphError : public Error {
public:
    using Error::Error;
};

class MissingVelocityError : public Error {
public:
    using Error::Error;
};

/// An exact path received a value that has no exact rational representation.
class PrecisionError : public Error {
public:
    using Error::Error;
};

class WrongOperatorError : public Error {
public:
    using Error::Error;
};

class NotRationalError : public Error {
public:
    using Error::Error;
};

class OverflowError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// A series did not reach the requested tolerance within its term budget.
class TruncationError : public Error {
public:
    TruncationError(const std::string& what, double achieved)
        : Error(what), achieved_bound(achieved) {}
    double achieved_bound;
};

class ContractionViolationError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Input file or literal could not be parsed. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& source, int line, const std::string& msg)
        : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + msg),
          source_name(source),
          line_number(line) {}
    std::string source_name;
    int line_number;
};

}  // namespace netflow
