#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fedcpsl/client.hpp"
#include "fedcpsl/objective.hpp"

namespace fedcpsl::cli {

/// A small seeded semi-supervised instance for numeric self-tests.
struct TinyInstance {
  ModelSpec spec;
  std::shared_ptr<const ClientData> data;
  ParamVector theta;
  ParamVector theta_lc;
  Matrix nu;  // interior of the simplex
  SemiSupHyper hyper;
  double beta = 0.75;
};

TinyInstance make_tiny_instance(std::uint64_t seed, Activation activation = Activation::tanh);

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
double relative_error(const Eigen::Ref<const Eigen::VectorXd>& a,
                      const Eigen::Ref<const Eigen::VectorXd>& b);

struct SelfTestResult {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return error < tolerance; }
};

/// Analytic gradients of f (theta and nu) and F (theta_lc) against central
/// differences on one tiny instance.
std::vector<SelfTestResult> gradient_self_test(std::uint64_t seed);

/// Effective-step closed form, the telescoped local update and the
/// control-variate rewrite on one full-batch client round.
std::vector<SelfTestResult> identity_self_test(std::uint64_t seed, double gamma);

}  // namespace fedcpsl::cli
