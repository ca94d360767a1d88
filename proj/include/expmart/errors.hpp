#pragma once

#include <stdexcept>
#include <string>

namespace expmart {

/// Adaptive quadrature gave up before reaching tolerance. Carries the
/// partial estimate so callers can report it.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double partial)
      : std::runtime_error(what), partial_(partial) {}
  double partial() const noexcept { return partial_; }

 private:
  double partial_;
};

/// The exponential-moment integral of the jump measure is infinite, so the
/// Laplace cumulant does not exist.
class NotExponentiallySpecialError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An operation refused to run because a certifying condition did not pass.
class ConditionNotMetError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace expmart
