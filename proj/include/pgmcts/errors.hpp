#pragma once

#include <stdexcept>
#include <string>

namespace pgmcts {

/// Violated precondition or unbalanced internal bookkeeping.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Board dimensions or color count out of range.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Action is not the representative cell of a clearable group.
class IllegalMoveError : public std::invalid_argument {
public:
    IllegalMoveError(int row, int col, const std::string& why)
        : std::invalid_argument("illegal move at (" + std::to_string(row) + "," + std::to_string(col) + "): " + why),
          row_(row), col_(col) {}
    int row() const noexcept { return row_; }
    int col() const noexcept { return col_; }

private:
    int row_;
    int col_;
};

/// Malformed text input. line() is 1-based, 0 when not line-specific.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const noexcept { return line_; }

    /// Same error with a context prefix (e.g. the file name) in front of the message.
    ParseError with_context(const std::string& context) const { return ParseError(context + ": " + what(), line_, 0); }

private:
    ParseError(const std::string& full, int line, int) : std::runtime_error(full), line_(line) {}
    int line_;
};

/// Tensor shape does not match what a model expects.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bad or inconsistent configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Model or checkpoint file could not be read.
class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pgmcts
