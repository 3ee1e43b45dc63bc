#include "fedcpsl/baselines.hpp"

#include <stdexcept>
#include <string>

namespace fedcpsl {
namespace {

// Plain local SGD shared by the baselines; the localized model is trained
// alongside when `personalize` is set.
ParamVector plain_local_sgd(ClientState& state, const ModelSpec& spec,
                            const ParamVector& theta_global, const ParamVector* correction,
                            const LocalPlan& plan, const ClientOptions& options, Rng& rng,
                            int round, bool personalize) {
  const ClientData& data = *state.data;
  ParamVector theta = theta_global;
  Batch scratch;
  for (int t = 0; t < plan.q_steps; ++t) {
    const Batch& batch = draw_local_batch(data, options, rng, scratch);
    Matrix global_probs;
    ParamVector grad = backprop_with(spec, theta, batch.inputs, [&](const Matrix& probs) {
      if (personalize) global_probs = probs;
      return semisup_output_loss(probs, batch, state.nu, options.hyper).grad;
    });
    if (personalize) {
      const ParamVector grad_lc = loss_grad_F_given(spec, state.theta_lc, global_probs, state.nu,
                                                    batch, options.hyper, state.beta)
                                      .grad;
      state.theta_lc -= plan.eta_c * grad_lc;
      check_divergence(state.theta_lc, options.divergence_bound, round, t, "localized model");
    }
    if (correction) grad += *correction;
    theta -= plan.eta * grad;
    check_divergence(theta, options.divergence_bound, round, t, "local model");
  }
  return theta;
}

}  // namespace

AlgorithmKind parse_algorithm(std::string_view name) {
  for (AlgorithmKind kind : kAllAlgorithms) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::fedcpsl: return "fedcpsl";
    case AlgorithmKind::fedavg_ss: return "fedavg_ss";
    case AlgorithmKind::fedshvrp: return "fedshvrp";
    case AlgorithmKind::apfl: return "apfl";
    case AlgorithmKind::apsfl: return "apsfl";
  }
  return "unknown";
}

bool is_personalized(AlgorithmKind kind) {
  return kind == AlgorithmKind::fedcpsl || kind == AlgorithmKind::apfl ||
         kind == AlgorithmKind::apsfl;
}

BaselineClientResult fedavg_ss_round(ClientState state, const ModelSpec& spec,
                                     const ParamVector& theta_global, const LocalPlan& plan,
                                     const ClientOptions& options, Rng& rng, int round) {
  plan.validate();
  update_pseudo_labels(state, spec, theta_global, options, plan.eta_v);
  ParamVector theta =
      plain_local_sgd(state, spec, theta_global, nullptr, plan, options, rng, round, false);
  return BaselineClientResult{std::move(theta), std::move(state)};
}

ScaffoldClientResult fedshvrp_round(ClientState state, const ModelSpec& spec,
                                    const ParamVector& theta_global, const ParamVector& c_global,
                                    const LocalPlan& plan, const ClientOptions& options, Rng& rng,
                                    int round) {
  plan.validate();
  update_pseudo_labels(state, spec, theta_global, options, plan.eta_v);
  const ParamVector correction = c_global - state.control;
  const ParamVector theta =
      plain_local_sgd(state, spec, theta_global, &correction, plan, options, rng, round, false);

  ScaffoldClientResult result;
  result.delta = theta - theta_global;
  const ParamVector new_control =
      state.control - c_global - result.delta / (static_cast<double>(plan.q_steps) * plan.eta);
  result.control_delta = new_control - state.control;
  state.control = new_control;
  result.state = std::move(state);
  return result;
}

BaselineClientResult apsfl_round(ClientState state, const ModelSpec& spec,
                                 const ParamVector& theta_global, const LocalPlan& plan,
                                 const ClientOptions& options, Rng& rng, int round) {
  plan.validate();
  update_pseudo_labels(state, spec, theta_global, options, plan.eta_v);
  ParamVector theta =
      plain_local_sgd(state, spec, theta_global, nullptr, plan, options, rng, round, true);
  return BaselineClientResult{std::move(theta), std::move(state)};
}

ClientOptions apfl_options(ClientOptions options) {
  options.hyper.alpha_p = 0.0;
  options.hyper.alpha_r = 0.0;
  options.use_unlabeled = false;
  return options;
}

BaselineClientResult apfl_round(ClientState state, const ModelSpec& spec,
                                const ParamVector& theta_global, const LocalPlan& plan,
                                const ClientOptions& options, Rng& rng, int round) {
  return apsfl_round(std::move(state), spec, theta_global, plan, apfl_options(options), rng,
                     round);
}

ParamVector average_parameters(const std::map<int, ParamVector>& locals,
                               std::span<const double> weights) {
  if (locals.empty()) throw std::invalid_argument("no local models to average");
  double total = 0.0;
  ParamVector sum = ParamVector::Zero(locals.begin()->second.size());
  for (const auto& [id, theta] : locals) {
    if (id < 0 || static_cast<std::size_t>(id) >= weights.size()) {
      throw std::out_of_range("unknown client " + std::to_string(id));
    }
    if (!theta.allFinite()) throw std::domain_error("non-finite local model");
    sum += weights[id] * theta;
    total += weights[id];
  }
  return sum / total;
}

ScaffoldServerUpdate scaffold_server_update(const ServerState& server,
                                            const std::map<int, ScaffoldClientResult>& results,
                                            std::span<const double> weights, double global_lr) {
  if (results.empty()) throw std::invalid_argument("no client results to aggregate");
  double total = 0.0;
  ParamVector step = ParamVector::Zero(server.theta.size());
  ParamVector control = server.control;
  for (const auto& [id, r] : results) {
    if (id < 0 || static_cast<std::size_t>(id) >= weights.size()) {
      throw std::out_of_range("unknown client " + std::to_string(id));
    }
    step += weights[id] * r.delta;
    total += weights[id];
    control += weights[id] * r.control_delta;
  }
  return ScaffoldServerUpdate{server.theta + (global_lr / total) * step, std::move(control)};
}

}  // namespace fedcpsl
