#pragma once

#include <stdexcept>
#include <string>

namespace jjlab {

/// Argument outside the mathematical domain of an operation (x outside [0, L], t <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Kernel parameters outside the positivity regime a, b, beta, epsilon > 0.
class RegimeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite state produced by a time step.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// Mode series could not meet its tail bound within the mode cap.
class SeriesTruncationError : public std::runtime_error {
 public:
  SeriesTruncationError(const std::string& what, double bound) : std::runtime_error(what), bound_(bound) {}
  double achieved_bound() const noexcept { return bound_; }

 private:
  double bound_;
};

/// Picard iterates stopped contracting.
class NonContractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation requested on data that was produced without the required bookkeeping.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace jjlab
