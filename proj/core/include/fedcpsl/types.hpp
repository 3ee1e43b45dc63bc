#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fedcpsl {

/// Flat parameter vector. Models, momentum buffers and control variates
/// all share this representation.
using ParamVector = Eigen::VectorXd;

/// Row-major dense matrix; one row per sample.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Probabilities are clamped to this value before any logarithm.
inline constexpr double kProbFloor = 1e-12;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when parameters become non-finite or exceed the divergence bound.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int round, int step)
      : std::runtime_error(what), round_(round), step_(step) {}

  int round() const noexcept { return round_; }
  int step() const noexcept { return step_; }

 private:
  int round_;
  int step_;
};

}  // namespace fedcpsl
