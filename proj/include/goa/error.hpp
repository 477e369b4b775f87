#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace goa {

enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  non_unitary,
  routing_violation,
  infeasible,
  divergence,
  invariant,
};

/// Base class of every error thrown by the library. The kind decides the
/// CLI exit code (see `exit_code`).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Two modules in one grid column share a wavelength, so the upper module's
/// light is dropped horizontally by the lower MRR and never reaches the PDs.
class RoutingViolation : public Error {
 public:
  RoutingViolation(std::size_t column, std::size_t row_a, std::size_t row_b,
                   std::size_t wavelength)
      : Error(ErrorKind::routing_violation,
              "routing violation in grid column " + std::to_string(column) +
                  ": rows " + std::to_string(row_a) + " and " +
                  std::to_string(row_b) + " share wavelength " +
                  std::to_string(wavelength)),
        column_(column), row_a_(row_a), row_b_(row_b),
        wavelength_(wavelength) {}

  std::size_t column() const noexcept { return column_; }
  std::size_t row_a() const noexcept { return row_a_; }
  std::size_t row_b() const noexcept { return row_b_; }
  std::size_t wavelength() const noexcept { return wavelength_; }

 private:
  std::size_t column_, row_a_, row_b_, wavelength_;
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::infeasible:
      return 2;
    case ErrorKind::invariant:
      return 3;
    default:
      return 1;
  }
}

}  // namespace goa
