#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace xxz {

inline constexpr const char* version_string = "0.1.0";

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

// The eigensolver failed to converge or violated its accuracy contract.
class EigensolverError : public std::runtime_error {
 public:
  EigensolverError(const std::string& what, Index dim)
      : std::runtime_error(what + " (dim=" + std::to_string(dim) + ")"), dimension(dim) {}
  Index dimension;
};

// An estimate was requested outside the regime where it is defined.
class NotInRegimeError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Too few usable data points for the requested fit.
class InsufficientDataError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A searched-for feature (curvature maximum, record, ...) does not exist.
class NotFoundError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace xxz
