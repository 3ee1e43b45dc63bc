#include "fedcpsl/client.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fedcpsl {

void LocalPlan::validate() const {
  if (q_steps < 1) throw std::invalid_argument("local step count must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (!(eta > 0.0) || !(eta_c > 0.0) || !(eta_v > 0.0)) {
    throw std::invalid_argument("step sizes eta, eta_c, eta_v must be positive");
  }
}

std::vector<double> momentum_weights(int q, double gamma) {
  if (q < 1) throw std::invalid_argument("q must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  std::vector<double> b(q);
  for (int t = 0; t < q; ++t) b[t] = (1.0 - std::pow(gamma, q - t)) / (1.0 - gamma);
  return b;
}

double effective_steps(int q, double gamma) {
  if (q < 1) throw std::invalid_argument("q must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  const double one_minus = 1.0 - gamma;
  return q / one_minus - gamma * (1.0 - std::pow(gamma, q)) / (one_minus * one_minus);
}

int plan_local_steps(Rng& rng, int e_min, int e_max, int steps_per_epoch) {
  if (e_min < 1 || e_max < e_min) {
    throw std::invalid_argument("epoch range must satisfy 1 <= e_min <= e_max");
  }
  if (steps_per_epoch < 1) throw std::invalid_argument("steps_per_epoch must be >= 1");
  std::uniform_int_distribution<int> epochs(e_min, e_max);
  return epochs(rng) * steps_per_epoch;
}

void check_divergence(const ParamVector& params, double bound, int round, int step,
                      const char* what) {
  if (params.allFinite() && params.cwiseAbs().maxCoeff() <= bound) return;
  throw DivergenceError(std::string(what) + " diverged at round " + std::to_string(round) +
                            ", local step " + std::to_string(step),
                        round, step);
}

void update_pseudo_labels(ClientState& state, const ModelSpec& spec,
                          const ParamVector& theta_global, const ClientOptions& options,
                          double eta_v) {
  const ClientData& data = *state.data;
  if (!options.use_unlabeled || data.n_unlabeled() == 0) return;
  const Matrix probs = forward(spec, theta_global, data.unlabeled());
  if (options.label_mode == PseudoLabelMode::closed_form) {
    state.nu = solve_pseudo_labels(probs, options.hyper);
  } else {
    state.nu = gd_pseudo_label_step(state.nu, grad_f_nu(probs, state.nu, options.hyper), eta_v);
  }
}

const Batch& draw_local_batch(const ClientData& data, const ClientOptions& options, Rng& rng,
                              Batch& scratch) {
  const bool unlabeled = options.use_unlabeled && data.n_unlabeled() > 0;
  if (options.full_batch) return unlabeled ? data.full_semi_batch() : data.full_labeled_batch();
  scratch = sample_batch(data, options.s_l, unlabeled ? options.s_u : 0, rng);
  return scratch;
}

int steps_per_epoch(const ClientData& data, const ClientOptions& options) {
  if (options.full_batch) return 1;
  const bool unlabeled = options.use_unlabeled && data.n_unlabeled() > 0;
  const Eigen::Index samples = data.n_labeled() + (unlabeled ? data.n_unlabeled() : 0);
  const Eigen::Index batch = options.s_l + (unlabeled ? options.s_u : 0);
  if (batch <= 0) throw std::invalid_argument("batch sizes must not both be zero");
  return static_cast<int>(std::max<Eigen::Index>(1, (samples + batch - 1) / batch));
}

ClientRoundResult client_round(ClientState state, const ModelSpec& spec,
                               const ParamVector& theta_global, const ParamVector& c_global,
                               const LocalPlan& plan, const ClientOptions& options, Rng& rng,
                               int round, const StepObserver& observer) {
  plan.validate();
  const Eigen::Index dim = spec.param_count();
  if (theta_global.size() != dim || c_global.size() != dim || state.control.size() != dim ||
      state.theta_lc.size() != dim) {
    throw ShapeError("client round: parameter vectors do not match the model");
  }
  const ClientData& data = *state.data;

  update_pseudo_labels(state, spec, theta_global, options, plan.eta_v);

  ParamVector theta = theta_global;
  ParamVector momentum = ParamVector::Zero(dim);
  ParamVector momentum_lc = ParamVector::Zero(dim);
  const ParamVector correction = c_global - state.control;

  Batch scratch;
  for (int t = 0; t < plan.q_steps; ++t) {
    const Batch& batch = draw_local_batch(data, options, rng, scratch);

    // g_i and G_i are both evaluated at the step-t iterates; h(theta_i^t) is
    // shared between them.
    Matrix global_probs;
    const ParamVector grad =
        backprop_with(spec, theta, batch.inputs, [&](const Matrix& probs) {
          global_probs = probs;
          return semisup_output_loss(probs, batch, state.nu, options.hyper).grad;
        });
    const ParamVector grad_lc =
        loss_grad_F_given(spec, state.theta_lc, global_probs, state.nu, batch, options.hyper,
                          state.beta)
            .grad;

    if (observer) {
      observer(LocalStep{t, theta, state.theta_lc, momentum, momentum_lc, grad, grad_lc});
    }

    momentum = plan.gamma * momentum + grad + correction;
    theta -= plan.eta * momentum;
    momentum_lc = plan.gamma * momentum_lc + grad_lc;
    state.theta_lc -= plan.eta_c * momentum_lc;

    check_divergence(theta, options.divergence_bound, round, t, "local model");
    check_divergence(state.theta_lc, options.divergence_bound, round, t, "localized model");
  }

  ClientReport report;
  report.q_eff = effective_steps(plan.q_steps, plan.gamma);
  report.delta = theta - theta_global;
  state.control = state.control - (c_global + report.delta / (plan.eta * report.q_eff));
  return ClientRoundResult{std::move(report), std::move(state)};
}

}  // namespace fedcpsl
