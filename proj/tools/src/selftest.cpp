#include "fedcpsl_cli/selftest.hpp"

#include <algorithm>
#include <cmath>

#include "fedcpsl/data.hpp"

namespace fedcpsl::cli {

TinyInstance make_tiny_instance(std::uint64_t seed, Activation activation) {
  TinyInstance inst;
  inst.spec = ModelSpec::make({4, 5, 3}, activation);
  const LabeledDataset blobs = gen_synthetic_blobs(3, 4, 6, 0.8, seed);
  inst.data = std::make_shared<const ClientData>(split_semi(blobs, 0.5, 0.0, seed));

  Rng rng = make_stream(seed, StreamKind::model_init, 1);
  inst.theta = init_params(inst.spec, rng);
  inst.theta_lc = init_params(inst.spec, rng);
  std::uniform_real_distribution<double> unit(0.2, 1.0);
  inst.nu.resize(inst.data->n_unlabeled(), inst.spec.num_classes());
  for (Eigen::Index r = 0; r < inst.nu.rows(); ++r) {
    for (Eigen::Index c = 0; c < inst.nu.cols(); ++c) inst.nu(r, c) = unit(rng);
    inst.nu.row(r) /= inst.nu.row(r).sum();
  }
  return inst;
}

double relative_error(const Eigen::Ref<const Eigen::VectorXd>& a,
                      const Eigen::Ref<const Eigen::VectorXd>& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

std::vector<SelfTestResult> gradient_self_test(std::uint64_t seed) {
  constexpr double kStep = 1e-6;
  constexpr double kTol = 1e-5;
  const TinyInstance inst = make_tiny_instance(seed);
  const Batch& batch = inst.data->full_semi_batch();
  std::vector<SelfTestResult> out;

  const ParamVector g = grad_f_theta(inst.spec, inst.theta, inst.nu, batch, inst.hyper);
  const ParamVector g_fd = finite_diff_grad(
      [&](const ParamVector& t) { return loss_f(inst.spec, t, inst.nu, batch, inst.hyper); },
      inst.theta, kStep);
  out.push_back({"grad_f_theta", relative_error(g, g_fd), kTol});

  const Matrix probs = forward(inst.spec, inst.theta, inst.data->unlabeled());
  const Matrix gnu = grad_f_nu(probs, inst.nu, inst.hyper);
  const Eigen::Index rows = inst.nu.rows();
  const Eigen::Index cols = inst.nu.cols();
  const ParamVector nu_flat = Eigen::Map<const ParamVector>(inst.nu.data(), inst.nu.size());
  const ParamVector gnu_fd = finite_diff_grad(
      [&](const ParamVector& v) {
        const Matrix nu = Eigen::Map<const Matrix>(v.data(), rows, cols);
        return loss_f(inst.spec, inst.theta, nu, batch, inst.hyper);
      },
      nu_flat, kStep);
  out.push_back({"grad_f_nu",
                 relative_error(Eigen::Map<const ParamVector>(gnu.data(), gnu.size()), gnu_fd),
                 kTol});

  const ParamVector gF =
      grad_F_thetalc(inst.spec, inst.theta_lc, inst.theta, inst.nu, batch, inst.hyper, inst.beta);
  const ParamVector gF_fd = finite_diff_grad(
      [&](const ParamVector& t) {
        return loss_F(inst.spec, t, inst.theta, inst.nu, batch, inst.hyper, inst.beta);
      },
      inst.theta_lc, kStep);
  out.push_back({"grad_F_thetalc", relative_error(gF, gF_fd), kTol});
  return out;
}

std::vector<SelfTestResult> identity_self_test(std::uint64_t seed, double gamma) {
  std::vector<SelfTestResult> out;

  double worst = 0.0;
  for (int q = 1; q <= 50; ++q) {
    const auto b = momentum_weights(q, gamma);
    double sum = 0.0;
    for (double v : b) sum += v;
    worst = std::max(worst, std::abs(sum - effective_steps(q, gamma)));
  }
  out.push_back({"effective_steps", worst, 1e-12});

  const TinyInstance inst = make_tiny_instance(seed);
  const Eigen::Index p = inst.spec.param_count();
  Rng rng = make_stream(seed, StreamKind::model_init, 2);
  std::normal_distribution<double> normal(0.0, 0.1);
  auto random_vec = [&] {
    ParamVector v(p);
    for (Eigen::Index k = 0; k < p; ++k) v(k) = normal(rng);
    return v;
  };

  ClientState state;
  state.theta_lc = inst.theta_lc;
  state.control = random_vec();
  state.nu = inst.nu;
  state.beta = inst.beta;
  state.data = inst.data;
  const ParamVector c_global = random_vec();
  const ParamVector c_local = state.control;

  LocalPlan plan;
  plan.q_steps = 7;
  plan.gamma = gamma;
  plan.eta = 0.05;
  plan.eta_c = 0.1;
  ClientOptions options;
  options.full_batch = true;

  std::vector<ParamVector> grads;
  Rng batch_rng = make_stream(seed, StreamKind::batches);
  const auto result =
      client_round(state, inst.spec, inst.theta, c_global, plan, options, batch_rng, 0,
                   [&](const LocalStep& s) { grads.push_back(s.grad); });

  const auto b = momentum_weights(plan.q_steps, gamma);
  const double q_eff = effective_steps(plan.q_steps, gamma);
  ParamVector telescoped = ParamVector::Zero(p);
  ParamVector rewritten = ParamVector::Zero(p);
  for (int t = 0; t < plan.q_steps; ++t) {
    telescoped -= plan.eta * b[t] * (grads[t] + c_global - c_local);
    rewritten += (b[t] / q_eff) * grads[t];
  }
  out.push_back({"telescoped_update", (result.report.delta - telescoped).lpNorm<Eigen::Infinity>(),
                 1e-9});
  out.push_back({"control_rewrite", (result.state.control - rewritten).lpNorm<Eigen::Infinity>(),
                 1e-9});
  return out;
}

}  // namespace fedcpsl::cli
