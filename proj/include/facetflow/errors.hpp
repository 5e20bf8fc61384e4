#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace facetflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
public:
  using Error::Error;
};

class QuadratureError : public Error {
public:
  using Error::Error;
};

/// Raised when a radial table is queried outside [0, r_max].
class OutOfTableError : public Error {
public:
  OutOfTableError(double radius, double r_max)
      : Error("radius " + std::to_string(radius) + " exceeds table range r_max = " +
              std::to_string(r_max)),
        radius_(radius), r_max_(r_max) {}

  double radius() const noexcept { return radius_; }
  double r_max() const noexcept { return r_max_; }

private:
  double radius_;
  double r_max_;
};

class GridMismatchError : public Error {
public:
  using Error::Error;
};

class GeometryError : public Error {
public:
  using Error::Error;
};

class IncompatibleDataError : public Error {
public:
  using Error::Error;
};

/// Nonlinear solve failure; carries the sup-norm residual after each iteration.
class NonconvergenceError : public Error {
public:
  NonconvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

private:
  std::vector<double> history_;
};

/// Configuration parse/validation failure, located by "section.key" or line.
class ConfigError : public Error {
public:
  ConfigError(std::string location, const std::string& message)
      : Error(location + ": " + message), location_(std::move(location)) {}

  const std::string& location() const noexcept { return location_; }

private:
  std::string location_;
};

} // namespace facetflow
