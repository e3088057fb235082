#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace asgd {

/// Base class of every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or index violations (e.g. a feature index past the model dimension).
class structural_error : public error {
 public:
  using error::error;
};

class numeric_error : public error {
 public:
  using error::error;
};

/// A documented precondition was violated by the caller.
class contract_error : public error {
 public:
  using error::error;
};

/// Raised when λ·γ_t ≥ 1, i.e. the L2 shrink factor would be nonpositive.
class step_size_error : public numeric_error {
 public:
  using numeric_error::numeric_error;
};

class divergence_error : public numeric_error {
 public:
  divergence_error(const std::string& what, std::uint64_t step)
      : numeric_error(what + " at step " + std::to_string(step)), step_(step) {}

  std::uint64_t step() const noexcept { return step_; }

 private:
  std::uint64_t step_;
};

class parse_error : public error {
 public:
  parse_error(const std::string& what, std::uint64_t line, std::uint64_t column)
      : error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::uint64_t line() const noexcept { return line_; }
  std::uint64_t column() const noexcept { return column_; }

 private:
  std::uint64_t line_;
  std::uint64_t column_;
};

/// Problems with the content of a dataset (unmapped labels, empty streams).
class data_error : public error {
 public:
  using error::error;
};

}  // namespace asgd
