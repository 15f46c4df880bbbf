#pragma once

#include <stdexcept>
#include <string>

namespace thzrel {

/// Argument outside the mathematical domain of an operation (d <= 0, alpha <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A queue in the tandem is not stable (lambda >= mu, rho >= 1) or a simulated
/// queue grew past its configured cap.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tabulated distributions on different grids, or a grid too short to hold
/// the distribution it is asked to carry.
class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace thzrel
