#ifndef BREWVEC_ERRORS_HPP
#define BREWVEC_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace brewvec {

/**
 * @brief Base class for every error raised by the library.
 */
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// Ordinal outside a vocabulary or matrix.
class IndexError : public Error {
public:
    using Error::Error;
};

/// Precondition on the shape or content of an argument does not hold.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Input record could not be parsed. Carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input whose values violate a contract (rating range, weight sum).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Unknown beer id or flavor tag.
class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Optimizer produced or received non-finite values.
class TrainingError : public Error {
public:
    using Error::Error;
};

/// Model file does not follow the on-disk layout.
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace brewvec

#endif  // BREWVEC_ERRORS_HPP
