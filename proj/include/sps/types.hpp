#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sps {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// R_n is numerically singular (the design does not excite every direction).
class SingularDesign : public Error {
 public:
  using Error::Error;
};

/// Too few samples for the requested statistic (e.g. n <= d for a variance).
class DegenerateSample : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters: m, q, block length, generator settings, ...
class BadConfig : public Error {
 public:
  using Error::Error;
};

/// Operation is only defined for the 2-norm.
class NormUnsupported : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// A volume or area was requested for an unbounded region.
class InfiniteRegion : public Error {
 public:
  using Error::Error;
};

/// Boundary tracing was started from a point outside the region.
class CenterExcluded : public Error {
 public:
  using Error::Error;
};

/// Input file could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace sps
