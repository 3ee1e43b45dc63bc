#include "fedcpsl/nn.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fedcpsl {
namespace {

using RowMap = Eigen::Map<const Matrix>;
using VecMap = Eigen::Map<const Eigen::VectorXd>;

struct Layer {
  RowMap weight;
  VecMap bias;
};

Layer layer_view(const ModelSpec& spec, const ParamVector& params, int l) {
  const int in = spec.layer_dims[l];
  const int out = spec.layer_dims[l + 1];
  const double* base = params.data() + spec.layer_offset(l);
  return Layer{RowMap(base, out, in), VecMap(base + Eigen::Index(out) * in, out)};
}

void check_params(const ModelSpec& spec, const ParamVector& params) {
  if (params.size() != spec.param_count()) {
    std::ostringstream msg;
    msg << "parameter vector has " << params.size() << " entries, model expects "
        << spec.param_count();
    throw ShapeError(msg.str());
  }
}

void check_inputs(const ModelSpec& spec, const Matrix& inputs) {
  if (inputs.cols() != spec.input_dim()) {
    std::ostringstream msg;
    msg << "layer 0: expected input width " << spec.input_dim() << ", got " << inputs.cols();
    throw ShapeError(msg.str());
  }
}

void softmax_rows(Matrix& z) {
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

void activate(Matrix& z, Activation act) {
  if (act == Activation::tanh) {
    z = z.array().tanh().matrix();
  } else {
    z = z.cwiseMax(0.0);
  }
}

// Multiplies `grad` in place by the activation derivative, given the
// post-activation values.
void activation_backward(Matrix& grad, const Matrix& activated, Activation act) {
  if (act == Activation::tanh) {
    grad.array() *= 1.0 - activated.array().square();
  } else {
    grad.array() *= (activated.array() > 0.0).cast<double>();
  }
}

Matrix affine(const Matrix& in, const Layer& layer) {
  Matrix z = in * layer.weight.transpose();
  z.rowwise() += layer.bias.transpose();
  return z;
}

}  // namespace

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

ModelSpec ModelSpec::make(std::vector<int> dims, Activation act) {
  if (dims.size() < 2) throw ShapeError("model needs at least an input and an output width");
  for (std::size_t l = 0; l < dims.size(); ++l) {
    if (dims[l] <= 0) {
      throw ShapeError("layer width " + std::to_string(l) + " must be positive");
    }
  }
  if (dims.back() < 2) throw ShapeError("model needs at least 2 classes");
  return ModelSpec{std::move(dims), act};
}

Eigen::Index ModelSpec::param_count() const { return layer_offset(num_layers()); }

Eigen::Index ModelSpec::layer_offset(int l) const {
  Eigen::Index offset = 0;
  for (int k = 0; k < l; ++k) {
    offset += Eigen::Index(layer_dims[k + 1]) * (layer_dims[k] + 1);
  }
  return offset;
}

ParamVector init_params(const ModelSpec& spec, Rng& rng) {
  ParamVector params = ParamVector::Zero(spec.param_count());
  for (int l = 0; l < spec.num_layers(); ++l) {
    const int in = spec.layer_dims[l];
    const int out = spec.layer_dims[l + 1];
    const double a = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-a, a);
    double* w = params.data() + spec.layer_offset(l);
    for (Eigen::Index k = 0; k < Eigen::Index(in) * out; ++k) w[k] = dist(rng);
  }
  return params;
}

Matrix forward(const ModelSpec& spec, const ParamVector& params, const Matrix& inputs) {
  check_params(spec, params);
  check_inputs(spec, inputs);
  Matrix a = inputs;
  for (int l = 0; l < spec.num_layers(); ++l) {
    Matrix z = affine(a, layer_view(spec, params, l));
    if (l + 1 < spec.num_layers()) activate(z, spec.activation);
    a = std::move(z);
  }
  softmax_rows(a);
  return a;
}

ParamVector backprop(const ModelSpec& spec, const ParamVector& params, const Matrix& inputs,
                     const Matrix& output_grad) {
  return backprop_with(spec, params, inputs, [&](const Matrix&) { return output_grad; });
}

ParamVector backprop_with(const ModelSpec& spec, const ParamVector& params, const Matrix& inputs,
                          const std::function<Matrix(const Matrix& probs)>& output_grad_of) {
  check_params(spec, params);
  check_inputs(spec, inputs);

  const int layers = spec.num_layers();
  // activations[l] is the input to layer l; activations[layers] the softmax.
  std::vector<Matrix> activations;
  activations.reserve(layers + 1);
  activations.push_back(inputs);
  for (int l = 0; l < layers; ++l) {
    Matrix z = affine(activations.back(), layer_view(spec, params, l));
    if (l + 1 < layers) activate(z, spec.activation);
    activations.push_back(std::move(z));
  }
  softmax_rows(activations.back());

  const Matrix& probs = activations.back();
  const Matrix output_grad = output_grad_of(probs);
  if (output_grad.rows() != inputs.rows() || output_grad.cols() != spec.num_classes()) {
    std::ostringstream msg;
    msg << "layer " << layers - 1 << ": output gradient is " << output_grad.rows() << "x"
        << output_grad.cols() << ", expected " << inputs.rows() << "x" << spec.num_classes();
    throw ShapeError(msg.str());
  }
  Matrix delta = output_grad.cwiseProduct(probs);
  const Eigen::VectorXd inner = delta.rowwise().sum();
  delta.array() -= probs.array().colwise() * inner.array();

  ParamVector grad(params.size());
  for (int l = layers - 1; l >= 0; --l) {
    const int in = spec.layer_dims[l];
    const int out = spec.layer_dims[l + 1];
    double* base = grad.data() + spec.layer_offset(l);
    Eigen::Map<Matrix>(base, out, in).noalias() = delta.transpose() * activations[l];
    Eigen::Map<Eigen::VectorXd>(base + Eigen::Index(out) * in, out) =
        delta.colwise().sum().transpose();
    if (l > 0) {
      Matrix upstream = delta * layer_view(spec, params, l).weight;
      activation_backward(upstream, activations[l], spec.activation);
      delta = std::move(upstream);
    }
  }
  return grad;
}

std::vector<int> argmax_rows(const Matrix& probs) {
  std::vector<int> out(probs.rows());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    int best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c) {
      if (probs(r, c) > probs(r, best)) best = static_cast<int>(c);
    }
    out[r] = best;
  }
  return out;
}

std::vector<int> predict(const ModelSpec& spec, const ParamVector& params, const Matrix& inputs) {
  return argmax_rows(forward(spec, params, inputs));
}

ParamVector finite_diff_grad(const std::function<double(const ParamVector&)>& fn,
                             const ParamVector& params, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  ParamVector grad(params.size());
  ParamVector probe = params;
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    probe[k] = params[k] + step;
    const double up = fn(probe);
    probe[k] = params[k] - step;
    const double down = fn(probe);
    probe[k] = params[k];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw std::domain_error("non-finite function value at coordinate " + std::to_string(k));
    }
    grad[k] = (up - down) / (2.0 * step);
  }
  return grad;
}

}  // namespace fedcpsl
