#pragma once

#include <stdexcept>
#include <string>

namespace sectkit {

/// Malformed input file (OFF mesh, CSV, JSON manifest).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structurally invalid data: bad simplex index, non-unit direction,
/// containment violation, invalid parameter ranges.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two fields or grids that must match do not (different Gamma, Delta,
/// horizon, dimension, or direction sets).
class GridMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation would exceed a configured resource bound, e.g. the nerve
/// simplex enumeration hitting its vertex cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerically degenerate input: rank loss, eigenvalues below tolerance
/// where a positive value is required.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sectkit
