#pragma once

#include <stdexcept>
#include <string>

namespace sps {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction parameters (grid sizes, solver settings, config files).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Sample vectors whose length does not match the grid.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (e.g. t < 0).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Operation undefined for the given input, typically the zero function.
class DegenerateInputError : public Error {
public:
  using Error::Error;
};

/// Scaling would push more than the allowed fraction of mass past r_max.
class TruncationError : public Error {
public:
  using Error::Error;
};

/// Solver called on a nonlinearity outside its regime.
class ClassificationError : public Error {
public:
  using Error::Error;
};

/// Mountain-pass path lost its geometry (peak collapsed to an endpoint).
class GeometryError : public Error {
public:
  using Error::Error;
};

/// Descent collapsed onto the zero function where a nontrivial state was required.
class DegenerateDescentError : public Error {
public:
  using Error::Error;
};

} // namespace sps
