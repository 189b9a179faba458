// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace chainfield {

/// Argument outside the mathematical domain of a function (e.g. Q <= 1, stretch <= 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// det F <= 0 at a material point.
class SingularDeformationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Element Jacobian determinant <= 0 at a quadrature point.
class ElementInversionError : public std::runtime_error {
 public:
  ElementInversionError(std::size_t element, const std::string& what)
      : std::runtime_error(what), element_(element) {}
  std::size_t element() const noexcept { return element_; }

 private:
  std::size_t element_;
};

/// Local or global iteration failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data (mesh, config, CSV, parameter set) violates a documented invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace chainfield
