#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fedcpsl/client.hpp"

namespace fedcpsl {

struct GlobalGap {
  double gradnorm2 = 0.0;  // ||sum_i omega_i grad_theta f_i(theta, nu_i)||^2, full batch
  double nu_term = 0.0;    // sum_i omega_i ||nu_i^after - nu_i^before||^2
  double loss = 0.0;       // sum_i omega_i f_i(theta, nu_i)
  /// gradnorm2 + (31 L / 64) nu_term, only when an L estimate is supplied.
  std::optional<double> combined;
};

/// Optimality gap of the global model and pseudo labels. The gradient is
/// taken at the pseudo labels in `clients` (the "after" labels).
GlobalGap optimality_gap_global(const ModelSpec& spec, const ParamVector& theta,
                                std::span<const ClientState> clients,
                                std::span<const Matrix> nu_before,
                                const ClientOptions& options,
                                std::optional<double> L_estimate = std::nullopt);

/// sum_i omega_i ||grad_{theta_lc} F_i(theta_lc_i, theta, nu_i)||^2 over full local data.
double optimality_gap_personalized(const ModelSpec& spec, std::span<const ClientState> clients,
                                   const ParamVector& theta, const ClientOptions& options);

/// Fraction of matching entries.
double accuracy(std::span<const int> predictions, std::span<const int> truth);

struct AccuracyReport {
  double global = 0.0;
  double personalized = 0.0;
  double pseudo_label = 0.0;
};

/// Test accuracies averaged uniformly over clients. When `personalized` is
/// false the personalized accuracy is the global model's. Pseudo-label
/// accuracy compares argmax(nu) with the quarantined unlabeled ground truth,
/// averaged over clients that hold unlabeled data (0 when none do).
AccuracyReport evaluate_accuracy(const ModelSpec& spec, const ParamVector& theta,
                                 std::span<const ClientState> clients, bool personalized);

}  // namespace fedcpsl
