#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

// Thrown when a dispersion equation has no admissible root (maps to an
// Absent verdict at the classification layer).
class NoSolutionError : public std::runtime_error {
 public:
  explicit NoSolutionError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a band-edge eigenfunction is requested in a regime where it
// is not square integrable.
class NotSquareIntegrableError : public std::domain_error {
 public:
  explicit NotSquareIntegrableError(const std::string& what) : std::domain_error(what) {}
};

// Thrown when an integrand produces a non-finite sample; carries the grid
// node at which it happened.
class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a requested operator would exceed the configured memory budget.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when the Krylov iteration fails to reach the requested residual.
class EigenIterationError : public std::runtime_error {
 public:
  EigenIterationError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual(best_residual) {}
  double best_residual;
};

}  // namespace qwalk
