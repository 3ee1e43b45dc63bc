#include "fedcpsl/objective.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fedcpsl/simplex.hpp"

namespace fedcpsl {
namespace {

double safe_log(double p) { return std::log(std::max(p, kProbFloor)); }

void check_batch(const Batch& batch, const Matrix& nu, Eigen::Index classes) {
  if (batch.empty()) throw std::invalid_argument("batch has neither labeled nor unlabeled rows");
  if (batch.inputs.rows() != batch.n_labeled() + batch.n_unlabeled()) {
    throw ShapeError("batch inputs do not match labeled + unlabeled row counts");
  }
  if (batch.n_labeled() > 0 && batch.labels.cols() != classes) {
    throw ShapeError("label width " + std::to_string(batch.labels.cols()) + " != classes " +
                     std::to_string(classes));
  }
  if (batch.n_unlabeled() > 0 && nu.cols() != classes) {
    throw ShapeError("pseudo-label width " + std::to_string(nu.cols()) + " != classes " +
                     std::to_string(classes));
  }
  for (int idx : batch.nu_index) {
    if (idx < 0 || idx >= nu.rows()) {
      throw std::out_of_range("pseudo-label index " + std::to_string(idx) + " out of range");
    }
  }
}

void check_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("mixture coefficient beta must lie in [0, 1]");
  }
}

}  // namespace

void SemiSupHyper::validate() const {
  if (!(alpha_p >= 0.0) || !(alpha_r >= 0.0)) {
    throw std::invalid_argument("alpha_p and alpha_r must be nonnegative");
  }
}

OutputLoss semisup_output_loss(const Matrix& outputs, const Batch& batch, const Matrix& nu,
                               const SemiSupHyper& hyper) {
  const Eigen::Index classes = outputs.cols();
  check_batch(batch, nu, classes);
  const double log_c = std::log(static_cast<double>(classes));

  OutputLoss out{0.0, Matrix::Zero(outputs.rows(), classes)};

  const Eigen::Index nl = batch.n_labeled();
  if (nl > 0) {
    const double w = 1.0 / static_cast<double>(nl);
    for (Eigen::Index k = 0; k < nl; ++k) {
      for (Eigen::Index c = 0; c < classes; ++c) {
        const double y = batch.labels(k, c);
        if (y == 0.0) continue;
        const double z = outputs(k, c);
        out.value -= w * y * safe_log(z);
        if (z > kProbFloor) out.grad(k, c) -= w * y / z;
      }
    }
  }

  const Eigen::Index nu_rows = batch.n_unlabeled();
  if (nu_rows > 0) {
    const double w = 1.0 / static_cast<double>(nu_rows);
    for (Eigen::Index k = 0; k < nu_rows; ++k) {
      const Eigen::Index row = nl + k;
      const auto target = nu.row(batch.nu_index[k]);
      double ce = 0.0;
      double kl_nu = 0.0;
      double kl_z = 0.0;
      for (Eigen::Index c = 0; c < classes; ++c) {
        const double z = outputs(row, c);
        const double v = target(c);
        const double log_z = safe_log(z);
        ce -= v * log_z;
        kl_nu += v * (safe_log(v) + log_c);
        kl_z += z * (log_z + log_c);
        double g = hyper.alpha_r * (log_z + log_c);
        if (z > kProbFloor) g += -hyper.alpha_p * v / z + hyper.alpha_r;
        out.grad(row, c) = w * g;
      }
      out.value += w * (hyper.alpha_p * ce + hyper.alpha_r * (kl_nu + kl_z));
    }
  }
  return out;
}

double loss_f(const ModelSpec& spec, const ParamVector& theta, const Matrix& nu,
              const Batch& batch, const SemiSupHyper& hyper) {
  const Matrix probs = forward(spec, theta, batch.inputs);
  return semisup_output_loss(probs, batch, nu, hyper).value;
}

LossGrad loss_grad_f(const ModelSpec& spec, const ParamVector& theta, const Matrix& nu,
                     const Batch& batch, const SemiSupHyper& hyper) {
  LossGrad result;
  result.grad = backprop_with(spec, theta, batch.inputs, [&](const Matrix& probs) {
    OutputLoss loss = semisup_output_loss(probs, batch, nu, hyper);
    result.value = loss.value;
    return std::move(loss.grad);
  });
  return result;
}

ParamVector grad_f_theta(const ModelSpec& spec, const ParamVector& theta, const Matrix& nu,
                         const Batch& batch, const SemiSupHyper& hyper) {
  return loss_grad_f(spec, theta, nu, batch, hyper).grad;
}

Matrix grad_f_nu(const Matrix& probs, const Matrix& nu_rows, const SemiSupHyper& hyper) {
  if (probs.rows() != nu_rows.rows() || probs.cols() != nu_rows.cols()) {
    throw ShapeError("model outputs and pseudo-label rows are not aligned");
  }
  const double w = probs.rows() > 0 ? 1.0 / static_cast<double>(probs.rows()) : 0.0;
  const double log_c = std::log(static_cast<double>(probs.cols()));
  Matrix grad(probs.rows(), probs.cols());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
      grad(r, c) = w * (-hyper.alpha_p * safe_log(probs(r, c)) +
                        hyper.alpha_r * (safe_log(nu_rows(r, c)) + log_c + 1.0));
    }
  }
  return grad;
}

Matrix solve_pseudo_labels(const Matrix& probs, const SemiSupHyper& hyper) {
  if (!(hyper.alpha_r > 0.0)) {
    throw std::invalid_argument(
        "closed-form pseudo labels need alpha_r > 0; use the gradient step instead");
  }
  const double exponent = hyper.alpha_p / hyper.alpha_r;
  Matrix nu(probs.rows(), probs.cols());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    Eigen::RowVectorXd logits(probs.cols());
    for (Eigen::Index c = 0; c < probs.cols(); ++c) logits(c) = exponent * safe_log(probs(r, c));
    logits.array() -= logits.maxCoeff();
    logits = logits.array().exp().matrix();
    nu.row(r) = logits / logits.sum();
  }
  return nu;
}

Matrix gd_pseudo_label_step(const Matrix& nu_rows, const Matrix& grad_rows, double eta_v) {
  if (!(eta_v > 0.0)) throw std::invalid_argument("eta_v must be positive");
  if (nu_rows.rows() != grad_rows.rows() || nu_rows.cols() != grad_rows.cols()) {
    throw ShapeError("pseudo-label gradient shape mismatch");
  }
  return project_simplex_rows(nu_rows - eta_v * grad_rows);
}

Matrix personalized_probs(const ModelSpec& spec, const ParamVector& theta_lc,
                          const ParamVector& theta, double beta, const Matrix& inputs) {
  check_beta(beta);
  return beta * forward(spec, theta_lc, inputs) + (1.0 - beta) * forward(spec, theta, inputs);
}

LossGrad loss_grad_F_given(const ModelSpec& spec, const ParamVector& theta_lc,
                           const Matrix& global_probs, const Matrix& nu, const Batch& batch,
                           const SemiSupHyper& hyper, double beta) {
  check_beta(beta);
  LossGrad result;
  result.grad = backprop_with(spec, theta_lc, batch.inputs, [&](const Matrix& local_probs) {
    const Matrix mixed = beta * local_probs + (1.0 - beta) * global_probs;
    OutputLoss loss = semisup_output_loss(mixed, batch, nu, hyper);
    result.value = loss.value;
    return Matrix(beta * loss.grad);
  });
  return result;
}

double loss_F(const ModelSpec& spec, const ParamVector& theta_lc, const ParamVector& theta,
              const Matrix& nu, const Batch& batch, const SemiSupHyper& hyper, double beta) {
  const Matrix mixed = personalized_probs(spec, theta_lc, theta, beta, batch.inputs);
  return semisup_output_loss(mixed, batch, nu, hyper).value;
}

ParamVector grad_F_thetalc(const ModelSpec& spec, const ParamVector& theta_lc,
                           const ParamVector& theta, const Matrix& nu, const Batch& batch,
                           const SemiSupHyper& hyper, double beta) {
  const Matrix global_probs = forward(spec, theta, batch.inputs);
  return loss_grad_F_given(spec, theta_lc, global_probs, nu, batch, hyper, beta).grad;
}

std::vector<int> predict_personalized(const ModelSpec& spec, const ParamVector& theta_lc,
                                      const ParamVector& theta, double beta,
                                      const Matrix& inputs) {
  return argmax_rows(personalized_probs(spec, theta_lc, theta, beta, inputs));
}

}  // namespace fedcpsl
