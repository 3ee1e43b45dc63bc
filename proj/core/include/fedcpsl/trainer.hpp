#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fedcpsl/baselines.hpp"
#include "fedcpsl/client.hpp"
#include "fedcpsl/server.hpp"
#include "fedcpsl/trace.hpp"

namespace fedcpsl {

struct TrainingConfig {
  AlgorithmKind algorithm = AlgorithmKind::fedcpsl;
  int participants = 2;
  int rounds = 100;
  double gamma = 0.8;
  double eta = 0.005;
  double eta_c = 0.01;
  double eta_v = 1.0;
  /// Global step of the normalized aggregation; nullopt = mean effective
  /// steps of the current participants.
  std::optional<double> eta_g;
  /// Global step of the SCAFFOLD-style baseline (SCAFFOLD's convention).
  double scaffold_global_lr = 1.0;
  int epoch_min = 2;
  int epoch_max = 2;
  ClientOptions client;
  /// Per-client mixture coefficients; a single entry applies to every client.
  std::vector<double> beta = {0.75};
  /// Per-client weights; empty = (n_i + m_i) / (n + m).
  std::vector<double> weights;
  std::uint64_t seed = 1;
  std::optional<double> L_estimate;
  /// Record wall-clock time per round. Off by default so traces stay
  /// byte-identical across runs.
  bool record_wall_time = false;

  void validate(int n_clients) const;
};

/// Optional instrumentation for tests and tools.
struct TrainingHooks {
  /// Called after every completed round with the post-round states.
  std::function<void(const ServerState&, const std::vector<ClientState>&)> after_round;
  /// May reorder the participant list before client rounds execute.
  std::function<void(std::vector<int>&)> permute_execution;
};

struct TrainingResult {
  std::vector<TraceRecord> trace;
  bool diverged = false;
  std::string failure;
  ServerState server;
  std::vector<ClientState> clients;
};

/// Default client weights (n_i + m_i) / (n + m).
std::vector<double> default_weights(const std::vector<std::shared_ptr<const ClientData>>& clients);

/// Initial global state and per-client states (theta_lc = theta^0, zero
/// control variates, uniform pseudo labels).
ServerState initial_server(const ModelSpec& spec, std::uint64_t seed);
std::vector<ClientState> initial_clients(const ModelSpec& spec, const ParamVector& theta0,
                                         const std::vector<std::shared_ptr<const ClientData>>& data,
                                         const std::vector<double>& weights,
                                         const std::vector<double>& beta);

/// Runs `config.rounds` rounds and returns one TraceRecord per completed
/// round. Divergence truncates the trace and sets `diverged`.
TrainingResult run_training(const TrainingConfig& config, const ModelSpec& spec,
                            const std::vector<std::shared_ptr<const ClientData>>& clients,
                            const TrainingHooks& hooks = {});

}  // namespace fedcpsl
