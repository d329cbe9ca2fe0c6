#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace lbm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Invalid user-supplied parameter (bad range, mismatched sizes, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a valid result (non-PD matrix,
/// iteration limit, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lbm
