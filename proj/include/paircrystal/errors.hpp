#pragma once

#include <stdexcept>
#include <string>

namespace paircrystal {

/// Non-finite input or an out-of-range physical parameter.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The adaptive integrator could not continue (step size underflow or a
/// non-finite state). Carries the independent-variable value at failure.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double at)
      : std::runtime_error(what + " at t=" + std::to_string(at)), at_(at) {}

  double at() const noexcept { return at_; }

 private:
  double at_;
};

/// A shooting bracket does not contain a sign change, or a search produced
/// nothing usable.
class BracketError : public std::runtime_error {
 public:
  BracketError(const std::string& what, double defect_lo, double defect_hi)
      : std::runtime_error(what), defect_lo_(defect_lo), defect_hi_(defect_hi) {}

  double defect_lo() const noexcept { return defect_lo_; }
  double defect_hi() const noexcept { return defect_hi_; }

 private:
  double defect_lo_;
  double defect_hi_;
};

/// A search (orbit scan, refinement, certification) produced nothing usable.
class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration: malformed file, unknown key, wrong type
/// or a value outside its documented range.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace paircrystal
