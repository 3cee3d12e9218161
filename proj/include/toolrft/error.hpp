#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace toolrft {

/// Raised when a tool-call expression cannot be lexed or parsed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A caller violated an operation's precondition (empty input, bad config, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A step was not among the legal candidates at its position.
class UnreachableStepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace toolrft
