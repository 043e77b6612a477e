#pragma once

#include <stdexcept>
#include <string>

namespace xvac {

// Bad input: shapes, orderings, out-of-range parameters.
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Query outside the domain where a quantity is defined (no extrapolation).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Iterative solver gave up; carries the worst residual it saw.
class solver_error : public std::runtime_error {
 public:
  solver_error(const std::string& what, double worst_residual)
      : std::runtime_error(what), worst_residual_(worst_residual) {}
  double worst_residual() const noexcept { return worst_residual_; }

 private:
  double worst_residual_;
};

// A ratio metric with nothing to normalize by.
class undefined_metric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class arithmetic_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace xvac
