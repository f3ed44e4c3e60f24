#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tmbn {

/// Base for every error raised on bad input. Internal invariant failures use
/// std::logic_error instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line where the problem starts.
class ParseError : public Error {
 public:
  ParseError(std::string what, std::size_t line) : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace tmbn
