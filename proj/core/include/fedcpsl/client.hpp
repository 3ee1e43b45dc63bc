#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "fedcpsl/data.hpp"
#include "fedcpsl/nn.hpp"
#include "fedcpsl/objective.hpp"
#include "fedcpsl/rng.hpp"

namespace fedcpsl {

/// Step counts and step sizes for one client round.
struct LocalPlan {
  int q_steps = 1;
  double gamma = 0.0;  // momentum factor, [0, 1)
  double eta = 0.005;
  double eta_c = 0.01;
  double eta_v = 1.0;

  void validate() const;
};

/// Momentum weight of the t-th gradient in the round's total displacement:
/// (1 - gamma^(q - t)) / (1 - gamma), t = 0..q-1.
std::vector<double> momentum_weights(int q, double gamma);

/// Closed form of the l1 norm of momentum_weights(q, gamma):
/// q / (1 - gamma) - gamma (1 - gamma^q) / (1 - gamma)^2.
double effective_steps(int q, double gamma);

/// Uniform number of epochs in [e_min, e_max] times steps_per_epoch.
int plan_local_steps(Rng& rng, int e_min, int e_max, int steps_per_epoch);

enum class PseudoLabelMode { closed_form, gradient_step };

struct ClientOptions {
  SemiSupHyper hyper;
  PseudoLabelMode label_mode = PseudoLabelMode::closed_form;
  int s_l = 32;
  int s_u = 32;
  /// Use every local sample at every step instead of sampled mini-batches.
  bool full_batch = false;
  /// False for labeled-only objectives; unlabeled rows are then never read.
  bool use_unlabeled = true;
  /// Any |parameter| above this (or a non-finite one) aborts the round.
  double divergence_bound = 1e8;
};

/// State a client keeps between rounds.
struct ClientState {
  ParamVector theta_lc;
  ParamVector control;
  Matrix nu;
  double omega = 1.0;
  double beta = 0.75;
  std::shared_ptr<const ClientData> data;
};

/// Upload of one client round: theta_i^{r+1} - theta^r and the effective step count.
struct ClientReport {
  ParamVector delta;
  double q_eff = 1.0;
};

/// Snapshot passed to a StepObserver before the buffers are updated at step `step`.
struct LocalStep {
  int step;
  const ParamVector& theta;
  const ParamVector& theta_lc;
  const ParamVector& momentum;
  const ParamVector& momentum_lc;
  const ParamVector& grad;     // g_i at theta
  const ParamVector& grad_lc;  // G_i at theta_lc
};
using StepObserver = std::function<void(const LocalStep&)>;

struct ClientRoundResult {
  ClientReport report;
  ClientState state;
};

/// One FedCPSL client round: pseudo-label refresh at theta_global, then
/// q_steps of momentum SGD with control-variate correction on the local copy
/// and momentum SGD on the localized model, followed by the control-variate
/// update.
ClientRoundResult client_round(ClientState state, const ModelSpec& spec,
                               const ParamVector& theta_global, const ParamVector& c_global,
                               const LocalPlan& plan, const ClientOptions& options, Rng& rng,
                               int round = 0, const StepObserver& observer = {});

// Building blocks shared with the baseline algorithms.

/// Refreshes state.nu at the given global model (closed form or one
/// projected gradient step).
void update_pseudo_labels(ClientState& state, const ModelSpec& spec,
                          const ParamVector& theta_global, const ClientOptions& options,
                          double eta_v);

/// The batch used at one local step: the cached full batch, or a fresh
/// mini-batch written into `scratch`.
const Batch& draw_local_batch(const ClientData& data, const ClientOptions& options, Rng& rng,
                              Batch& scratch);

/// Steps per local epoch: 1 in full-batch mode, otherwise
/// ceil(local training samples / (s_l + s_u)).
int steps_per_epoch(const ClientData& data, const ClientOptions& options);

/// Throws DivergenceError if any entry is non-finite or exceeds `bound`.
void check_divergence(const ParamVector& params, double bound, int round, int step,
                      const char* what);

}  // namespace fedcpsl
