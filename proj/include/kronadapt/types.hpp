#ifndef KRONADAPT_TYPES_HPP
#define KRONADAPT_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace kronadapt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Base class for everything this library throws.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Operand dimensions do not fit the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An adapter/planner configuration violates a divisibility or range rule.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A scalar argument is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A documented caller obligation was violated (e.g. non-orthonormal input).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// An iterative kernel failed to converge or produced non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Spectrum too degenerate for the requested quantity (e.g. sigma_{r*} == 0).
class DegenerateSpectrumError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Malformed text input; message carries file name and line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

// No configuration fits the parameter budget; message names the cheapest one.
class InfeasibleBudgetError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace kronadapt

#endif
