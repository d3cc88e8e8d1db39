#pragma once

#include <stdexcept>
#include <string>

namespace sgcn {

// Bad caller input: out-of-range indices, malformed arguments.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside a function's mathematical domain (rate >= 1, q >= p, empty mask).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Index range not covered by stored data (band outside stored eigenpairs).
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// The requested operation is not available for this representation
// (dense eigensolve above the dense threshold, sensitivity on a band operator).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double achieved_residual)
      : std::runtime_error(what), achieved_residual_(achieved_residual) {}
  double achieved_residual() const noexcept { return achieved_residual_; }

 private:
  double achieved_residual_;
};

class NotFoundError : public std::runtime_error {
 public:
  NotFoundError(const std::string& what, std::string path)
      : std::runtime_error(what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

enum class ValidationKind {
  Parse,
  Shape,
  EdgeOutOfRange,
  LabelOutOfRange,
  SplitOutOfRange,
  OverlappingSplits,
  EmptySplit,
  Schema,
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(ValidationKind kind, const std::string& what, long line = 0)
      : std::runtime_error(what), kind_(kind), line_(line) {}
  ValidationKind kind() const noexcept { return kind_; }
  long line() const noexcept { return line_; }

 private:
  ValidationKind kind_;
  long line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sgcn
