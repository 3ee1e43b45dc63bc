#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "fedcpsl/rng.hpp"
#include "fedcpsl/types.hpp"

namespace fedcpsl {

enum class Activation { relu, tanh };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a);

/// Dense feed-forward classifier shape: input width, hidden widths, classes.
///
/// Parameters are laid out layer by layer; each layer stores its weight
/// matrix (out x in, row-major) followed by its bias vector.
struct ModelSpec {
  std::vector<int> layer_dims;
  Activation activation = Activation::tanh;

  /// Validates the invariants (>= 2 dims, positive widths, >= 2 classes).
  static ModelSpec make(std::vector<int> dims, Activation act = Activation::tanh);

  int input_dim() const { return layer_dims.front(); }
  int num_classes() const { return layer_dims.back(); }
  int num_layers() const { return static_cast<int>(layer_dims.size()) - 1; }
  Eigen::Index param_count() const;
  /// Offset of layer `l`'s weight block inside the flat vector.
  Eigen::Index layer_offset(int l) const;
};

/// Glorot-uniform weights, zero biases.
ParamVector init_params(const ModelSpec& spec, Rng& rng);

/// Softmax outputs, one row per input row. Uses a max-shifted softmax.
Matrix forward(const ModelSpec& spec, const ParamVector& params, const Matrix& inputs);

/// Gradient of sum(output_grad .* forward(params, inputs)) w.r.t. params.
ParamVector backprop(const ModelSpec& spec, const ParamVector& params, const Matrix& inputs,
                     const Matrix& output_grad);

/// Backprop where the output gradient depends on the forward outputs: one
/// forward pass feeds `output_grad_of(probs)`, then gradients flow back.
ParamVector backprop_with(const ModelSpec& spec, const ParamVector& params, const Matrix& inputs,
                          const std::function<Matrix(const Matrix& probs)>& output_grad_of);

/// Class index per row; ties go to the lowest index.
std::vector<int> argmax_rows(const Matrix& probs);

std::vector<int> predict(const ModelSpec& spec, const ParamVector& params, const Matrix& inputs);

/// Central-difference gradient estimate, used as a test oracle.
ParamVector finite_diff_grad(const std::function<double(const ParamVector&)>& fn,
                             const ParamVector& params, double step);

}  // namespace fedcpsl
