#ifndef SEGKIT_ERROR_HPP
#define SEGKIT_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace segkit {

/// Schema is malformed or does not match the data it describes.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A cell could not be parsed. `row` is 1-based over data rows (header excluded).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t row, std::string column)
        : std::runtime_error(message), row_(row), column_(std::move(column)) {}

    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

/// A named column or variable does not exist.
class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A precondition of an operation was violated by the caller.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A file could not be read or written; the message names the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace segkit

#endif
