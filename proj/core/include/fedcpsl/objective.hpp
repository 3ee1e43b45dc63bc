#pragma once

#include <vector>

#include "fedcpsl/nn.hpp"
#include "fedcpsl/types.hpp"

namespace fedcpsl {

/// Weights of the pseudo-label cross-entropy and the KL-to-uniform regularizer.
struct SemiSupHyper {
  double alpha_p = 1.0;
  double alpha_r = 0.5;

  void validate() const;
};

/// One evaluation batch. Labeled rows come first in `inputs`, followed by
/// unlabeled rows; `nu_index[k]` selects the pseudo-label row for the k-th
/// unlabeled input.
struct Batch {
  Matrix inputs;
  Matrix labels;  // one-hot, n_labeled x C
  std::vector<int> nu_index;

  Eigen::Index n_labeled() const { return labels.rows(); }
  Eigen::Index n_unlabeled() const { return static_cast<Eigen::Index>(nu_index.size()); }
  bool empty() const { return n_labeled() == 0 && n_unlabeled() == 0; }
};

struct LossGrad {
  double value = 0.0;
  ParamVector grad;
};

/// The semi-supervised cost evaluated on model outputs `outputs` (one row
/// per batch row) and its gradient with respect to those outputs:
///
///   mean_L CE(z, y) + alpha_p mean_U CE(z, nu) + alpha_r mean_U [KL(nu, d) + KL(z, d)]
///
/// where d is the uniform distribution. Probabilities are clamped at
/// kProbFloor inside every logarithm.
struct OutputLoss {
  double value = 0.0;
  Matrix grad;
};
OutputLoss semisup_output_loss(const Matrix& outputs, const Batch& batch, const Matrix& nu,
                               const SemiSupHyper& hyper);

double loss_f(const ModelSpec& spec, const ParamVector& theta, const Matrix& nu,
              const Batch& batch, const SemiSupHyper& hyper);
ParamVector grad_f_theta(const ModelSpec& spec, const ParamVector& theta, const Matrix& nu,
                         const Batch& batch, const SemiSupHyper& hyper);
/// Loss and gradient from a single forward/backward pass.
LossGrad loss_grad_f(const ModelSpec& spec, const ParamVector& theta, const Matrix& nu,
                     const Batch& batch, const SemiSupHyper& hyper);

/// Gradient of the full-set cost with respect to the pseudo-label rows, given
/// the model outputs on the same unlabeled rows. Row averaging uses the row
/// count of `probs`.
Matrix grad_f_nu(const Matrix& probs, const Matrix& nu_rows, const SemiSupHyper& hyper);

/// Row-wise closed-form minimizer over the simplex of
/// alpha_p CE(h, nu) + alpha_r KL(nu, d):  nu_c ∝ h_c^(alpha_p / alpha_r).
Matrix solve_pseudo_labels(const Matrix& probs, const SemiSupHyper& hyper);

/// nu <- P_simplex(nu - eta_v * grad), row by row.
Matrix gd_pseudo_label_step(const Matrix& nu_rows, const Matrix& grad_rows, double eta_v);

/// Personalized cost: the semi-supervised cost applied to the mixed output
/// beta * h(theta_lc) + (1 - beta) * h(theta).
double loss_F(const ModelSpec& spec, const ParamVector& theta_lc, const ParamVector& theta,
              const Matrix& nu, const Batch& batch, const SemiSupHyper& hyper, double beta);
/// Gradient of loss_F with respect to theta_lc only.
ParamVector grad_F_thetalc(const ModelSpec& spec, const ParamVector& theta_lc,
                           const ParamVector& theta, const Matrix& nu, const Batch& batch,
                           const SemiSupHyper& hyper, double beta);
/// Same as grad_F_thetalc but reuses precomputed global-model outputs on the
/// batch inputs.
LossGrad loss_grad_F_given(const ModelSpec& spec, const ParamVector& theta_lc,
                           const Matrix& global_probs, const Matrix& nu, const Batch& batch,
                           const SemiSupHyper& hyper, double beta);

/// Mixed output beta * h(theta_lc) + (1 - beta) * h(theta).
Matrix personalized_probs(const ModelSpec& spec, const ParamVector& theta_lc,
                          const ParamVector& theta, double beta, const Matrix& inputs);
std::vector<int> predict_personalized(const ModelSpec& spec, const ParamVector& theta_lc,
                                      const ParamVector& theta, double beta,
                                      const Matrix& inputs);

}  // namespace fedcpsl
