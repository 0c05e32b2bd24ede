#pragma once

#include <stdexcept>
#include <string>

namespace passfl {

/// Invalid configuration or parameter outside its documented range.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The convergence envelope requires 0 < delta * local_steps / L < 1.
class ContractionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// No feasible point exists for the requested sub-problem.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scheduled device cannot meet its energy budget.
class EnergyInfeasibleError : public InfeasibleError {
 public:
  using InfeasibleError::InfeasibleError;
};

/// A scheduled device cannot upload its model at any finite time.
class RateInfeasibleError : public InfeasibleError {
 public:
  using InfeasibleError::InfeasibleError;
};

/// Every grid point for an antenna coordinate violates the spacing rule.
class SpacingError : public InfeasibleError {
 public:
  using InfeasibleError::InfeasibleError;
};

}  // namespace passfl
