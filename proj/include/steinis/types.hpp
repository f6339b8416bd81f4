#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace steinis {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// One particle per row; rows are contiguous.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorRef = Eigen::Ref<const Vector>;

/// Invalid arguments supplied by the caller (dimension mismatch, bad sizes, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// I + eps * J was singular: the transport step is not invertible at this step size.
class SingularMapError : public std::runtime_error {
 public:
  SingularMapError(long iteration, long follower, const std::string& what)
      : std::runtime_error(what), iteration_(iteration), follower_(follower) {}

  long iteration() const { return iteration_; }
  long follower() const { return follower_; }

 private:
  long iteration_;
  long follower_;
};

}  // namespace steinis
