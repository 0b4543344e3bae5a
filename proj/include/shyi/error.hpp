#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shyi {

// Malformed input: bad shapes, invalid parameters, schema violations.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Markup or template parse failure with a 1-based source position.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : InputError(what + " (line " + std::to_string(line) + ", column " +
                   std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A loss, gradient or latent went non-finite.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shyi
