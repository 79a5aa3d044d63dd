#pragma once

#include <stdexcept>
#include <string>

namespace geoseg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument values (sigma <= 0, seed outside the grid, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Malformed or unsupported file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Empty region, or region covering the whole domain.
class DegenerateRegionError : public Error {
 public:
  using Error::Error;
};

// The landmark / initial region does not allow the dual-cut construction
// (e.g. the region boundary never meets the positive half-axis).
class InitializationError : public Error {
 public:
  using Error::Error;
};

// A geodesic could not reach its target under the active constraints.
class TopologyError : public Error {
 public:
  using Error::Error;
};

// Descent stall or a broken internal invariant.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace geoseg
