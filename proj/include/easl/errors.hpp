#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace easl {

// Operand shapes disagree (matmul inner dims, loss pred/target, memory rows).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A precondition on call order or argument range was violated.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Well-shaped but invalid user data (OOV token, confidence outside [0,1]).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset) : std::runtime_error(what), offset_(offset) {}
  // Byte offset into the file (or line number for CSV input).
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class VersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace easl
