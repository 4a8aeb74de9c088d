#pragma once

#include <stdexcept>
#include <string>

namespace simbias {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments. CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A first-layer cache was used with a network or input it was not built from.
class StaleCache : public Error {
 public:
  using Error::Error;
};

/// Exhaustive search would exceed its evaluation budget. CLI exit code 3.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, int largest_searched_h)
      : Error(what), largest_searched_h_(largest_searched_h) {}

  /// Largest Hamming radius that was searched completely (0 if none).
  int largest_searched_h() const noexcept { return largest_searched_h_; }

 private:
  int largest_searched_h_;
};

/// Quadrature non-convergence, out-of-range correlations and similar. CLI exit code 4.
class NumericalFault : public Error {
 public:
  using Error::Error;
};

/// Malformed or corrupted weight file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace simbias
