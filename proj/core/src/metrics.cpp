#include "fedcpsl/metrics.hpp"

#include <stdexcept>

namespace fedcpsl {
namespace {

const Batch& eval_batch(const ClientData& data, const ClientOptions& options) {
  const bool unlabeled = options.use_unlabeled && data.n_unlabeled() > 0;
  return unlabeled ? data.full_semi_batch() : data.full_labeled_batch();
}

}  // namespace

GlobalGap optimality_gap_global(const ModelSpec& spec, const ParamVector& theta,
                                std::span<const ClientState> clients,
                                std::span<const Matrix> nu_before, const ClientOptions& options,
                                std::optional<double> L_estimate) {
  if (nu_before.size() != clients.size()) {
    throw std::invalid_argument("nu_before must hold one matrix per client");
  }
  GlobalGap gap;
  ParamVector grad = ParamVector::Zero(theta.size());
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const ClientState& c = clients[i];
    const LossGrad lg = loss_grad_f(spec, theta, c.nu, eval_batch(*c.data, options), options.hyper);
    grad += c.omega * lg.grad;
    gap.loss += c.omega * lg.value;
    if (c.nu.size() > 0) gap.nu_term += c.omega * (c.nu - nu_before[i]).squaredNorm();
  }
  gap.gradnorm2 = grad.squaredNorm();
  if (L_estimate) gap.combined = gap.gradnorm2 + (31.0 * *L_estimate / 64.0) * gap.nu_term;
  return gap;
}

double optimality_gap_personalized(const ModelSpec& spec, std::span<const ClientState> clients,
                                   const ParamVector& theta, const ClientOptions& options) {
  double gap = 0.0;
  for (const ClientState& c : clients) {
    if (c.beta == 0.0) continue;
    const Batch& batch = eval_batch(*c.data, options);
    const Matrix global_probs = forward(spec, theta, batch.inputs);
    const LossGrad lg =
        loss_grad_F_given(spec, c.theta_lc, global_probs, c.nu, batch, options.hyper, c.beta);
    gap += c.omega * lg.grad.squaredNorm();
  }
  return gap;
}

double accuracy(std::span<const int> predictions, std::span<const int> truth) {
  if (truth.empty()) throw std::invalid_argument("accuracy of an empty set is undefined");
  if (predictions.size() != truth.size()) {
    throw std::invalid_argument("predictions and labels differ in length");
  }
  std::size_t hits = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) hits += predictions[k] == truth[k];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

AccuracyReport evaluate_accuracy(const ModelSpec& spec, const ParamVector& theta,
                                 std::span<const ClientState> clients, bool personalized) {
  AccuracyReport report;
  std::size_t evaluated = 0;
  std::size_t with_unlabeled = 0;
  for (const ClientState& c : clients) {
    const ClientData& data = *c.data;
    if (data.test().size() > 0) {
      const Matrix global_probs = forward(spec, theta, data.test().inputs);
      const double global = accuracy(argmax_rows(global_probs), data.test().labels);
      double pers = global;
      if (personalized) {
        const Matrix mixed =
            c.beta * forward(spec, c.theta_lc, data.test().inputs) + (1.0 - c.beta) * global_probs;
        pers = accuracy(argmax_rows(mixed), data.test().labels);
      }
      report.global += global;
      report.personalized += pers;
      ++evaluated;
    }
    if (data.n_unlabeled() > 0 && c.nu.rows() == data.n_unlabeled()) {
      report.pseudo_label += accuracy(argmax_rows(c.nu), data.diagnostic_unlabeled_labels());
      ++with_unlabeled;
    }
  }
  if (evaluated > 0) {
    report.global /= static_cast<double>(evaluated);
    report.personalized /= static_cast<double>(evaluated);
  }
  if (with_unlabeled > 0) report.pseudo_label /= static_cast<double>(with_unlabeled);
  return report;
}

}  // namespace fedcpsl
