// Copyright 2026 The POIR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POIR_MLP_HPP_
#define POIR_MLP_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "poir/errors.hpp"
#include "poir/types.hpp"

namespace poir {

enum class Activation { kRelu, kTanh };

inline std::string to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "tanh";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + s + "' (expected relu|tanh)");
}

// fully-connected architecture: depth hidden layers of hidden_width units,
// activation after every hidden layer, linear output
struct MlpSpec {
  int input_dim = 0;
  int output_dim = 0;
  int hidden_width = 300;
  int depth = 5;
  Activation activation = Activation::kRelu;

  int num_linear() const { return depth + 1; }

  std::vector<int> layer_dims() const {
    std::vector<int> dims;
    dims.push_back(input_dim);
    for (int i = 0; i < depth; ++i) dims.push_back(hidden_width);
    dims.push_back(output_dim);
    return dims;
  }

  void validate() const {
    if (input_dim < 1 || output_dim < 1)
      throw std::invalid_argument("MlpSpec: input_dim and output_dim must be >= 1");
    if (depth < 0) throw std::invalid_argument("MlpSpec: depth must be >= 0");
    if (depth > 0 && hidden_width < 1)
      throw std::invalid_argument("MlpSpec: hidden_width must be >= 1");
  }

  bool operator==(const MlpSpec& o) const {
    return input_dim == o.input_dim && output_dim == o.output_dim &&
           hidden_width == o.hidden_width && depth == o.depth &&
           activation == o.activation;
  }
};

template <typename Scalar>
struct LinearLayer {
  Mat<Scalar> w;  // (out x in)
  Vec<Scalar> b;  // (out)
};

template <typename Scalar>
struct MlpParams {
  MlpSpec spec;
  std::vector<LinearLayer<Scalar>> layers;

  long parameter_count() const {
    long n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }
};

// gradients share the layer layout of the parameters
template <typename Scalar>
using MlpGrads = std::vector<LinearLayer<Scalar>>;

template <typename Scalar>
MlpGrads<Scalar> zero_grads_like(const MlpParams<Scalar>& p) {
  MlpGrads<Scalar> g(p.layers.size());
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    g[i].w = Mat<Scalar>::Zero(p.layers[i].w.rows(), p.layers[i].w.cols());
    g[i].b = Vec<Scalar>::Zero(p.layers[i].b.size());
  }
  return g;
}

// He-style uniform init, limit sqrt(6 / fan_in), zero biases.  weight draw
// order is fixed (layer, row, column) so a seed pins the parameters exactly.
template <typename Scalar>
MlpParams<Scalar> init_mlp(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  MlpParams<Scalar> p;
  p.spec = spec;
  const auto dims = spec.layer_dims();
  Rng rng(seed);
  for (int l = 0; l < spec.num_linear(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    LinearLayer<Scalar> layer;
    layer.w.resize(out, in);
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j)
        layer.w(i, j) = static_cast<Scalar>(rng.uniform(-limit, limit));
    layer.b = Vec<Scalar>::Zero(out);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

namespace detail {

template <typename Scalar>
void apply_activation(Activation act, Mat<Scalar>& z) {
  if (act == Activation::kRelu) {
    z = z.cwiseMax(Scalar(0));
  } else {
    z = z.array().tanh().matrix();
  }
}

// derivative as a function of the post-activation value (valid for relu/tanh)
template <typename Scalar>
Mat<Scalar> activation_grad_from_output(Activation act, const Mat<Scalar>& a) {
  if (act == Activation::kRelu) {
    return (a.array() > Scalar(0)).template cast<Scalar>().matrix();
  }
  return (Scalar(1) - a.array().square()).matrix();
}

}  // namespace detail

// single-sample forward (GEMV path; this is the one the planner and the
// policies use, so every consumer rounds identically)
template <typename Scalar>
Vec<Scalar> forward(const MlpParams<Scalar>& p, const Vec<Scalar>& x) {
  if (x.size() != p.spec.input_dim)
    throw std::invalid_argument("forward: input has dim " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(p.spec.input_dim));
  Vec<Scalar> h = x;
  for (int l = 0; l < p.spec.num_linear(); ++l) {
    Vec<Scalar> z = p.layers[l].w * h + p.layers[l].b;
    if (l + 1 < p.spec.num_linear()) {
      if (p.spec.activation == Activation::kRelu)
        z = z.cwiseMax(Scalar(0));
      else
        z = z.array().tanh().matrix();
    }
    h = std::move(z);
  }
  return h;
}

// batched forward, samples as columns
template <typename Scalar>
Mat<Scalar> forward(const MlpParams<Scalar>& p, const Mat<Scalar>& x) {
  if (x.rows() != p.spec.input_dim)
    throw std::invalid_argument("forward: batch has row dim " +
                                std::to_string(x.rows()) + ", expected " +
                                std::to_string(p.spec.input_dim));
  Mat<Scalar> h = x;
  for (int l = 0; l < p.spec.num_linear(); ++l) {
    Mat<Scalar> z = (p.layers[l].w * h).colwise() + p.layers[l].b;
    if (l + 1 < p.spec.num_linear()) detail::apply_activation(p.spec.activation, z);
    h = std::move(z);
  }
  return h;
}

// mean squared error over batch and output dims:
//   L = 1/(B*D) sum_bd (y - t)^2
// returns the loss; fills grads (backprop) when non-null
template <typename Scalar>
Scalar mse_loss_grad(const MlpParams<Scalar>& p, const Mat<Scalar>& inputs,
                     const Mat<Scalar>& targets, MlpGrads<Scalar>* grads) {
  if (inputs.rows() != p.spec.input_dim)
    throw std::invalid_argument("mse_loss_grad: input dim mismatch");
  if (targets.rows() != p.spec.output_dim)
    throw std::invalid_argument("mse_loss_grad: target dim mismatch");
  if (inputs.cols() != targets.cols())
    throw std::invalid_argument("mse_loss_grad: batch size mismatch");
  if (inputs.cols() == 0)
    throw std::invalid_argument("mse_loss_grad: empty batch");

  const int L = p.spec.num_linear();
  const auto B = inputs.cols();

  // forward, keeping post-activation values per layer
  std::vector<Mat<Scalar>> acts;  // acts[0] = inputs, acts[l] = output of layer l-1
  acts.reserve(L + 1);
  acts.push_back(inputs);
  for (int l = 0; l < L; ++l) {
    Mat<Scalar> z = (p.layers[l].w * acts.back()).colwise() + p.layers[l].b;
    if (l + 1 < L) detail::apply_activation(p.spec.activation, z);
    acts.push_back(std::move(z));
  }

  const Mat<Scalar> diff = acts.back() - targets;
  const Scalar scale =
      Scalar(1) / (static_cast<Scalar>(B) * static_cast<Scalar>(p.spec.output_dim));
  const Scalar loss = diff.squaredNorm() * scale;

  if (grads != nullptr) {
    if (static_cast<int>(grads->size()) != L) *grads = zero_grads_like(p);
    Mat<Scalar> delta = diff * (Scalar(2) * scale);
    for (int l = L - 1; l >= 0; --l) {
      (*grads)[l].w.noalias() = delta * acts[l].transpose();
      (*grads)[l].b.noalias() = delta.rowwise().sum();
      if (l > 0) {
        Mat<Scalar> back = p.layers[l].w.transpose() * delta;
        delta = back.cwiseProduct(
            detail::activation_grad_from_output(p.spec.activation, acts[l]));
      }
    }
  }
  return loss;
}

// loss only (used by the finite-difference oracle)
template <typename Scalar>
Scalar mse_loss(const MlpParams<Scalar>& p, const Mat<Scalar>& inputs,
                const Mat<Scalar>& targets) {
  return mse_loss_grad<Scalar>(p, inputs, targets, nullptr);
}

}  // namespace poir

#endif  // POIR_MLP_HPP_
