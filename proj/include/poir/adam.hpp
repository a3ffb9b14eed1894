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

#ifndef POIR_ADAM_HPP_
#define POIR_ADAM_HPP_

#include <cmath>
#include <string>

#include "poir/errors.hpp"
#include "poir/mlp.hpp"

namespace poir {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
  AdamConfig cfg;
  long step_count = 0;
  MlpGrads<Scalar> m;  // first moment, parameter layout
  MlpGrads<Scalar> v;  // second moment
};

template <typename Scalar>
AdamState<Scalar> make_adam_state(const MlpParams<Scalar>& p, const AdamConfig& cfg) {
  AdamState<Scalar> s;
  s.cfg = cfg;
  s.m = zero_grads_like(p);
  s.v = zero_grads_like(p);
  return s;
}

// one bias-corrected update; rejects non-finite gradients
template <typename Scalar>
void adam_step(MlpParams<Scalar>& p, const MlpGrads<Scalar>& g, AdamState<Scalar>& s) {
  if (g.size() != p.layers.size() || s.m.size() != p.layers.size())
    throw std::invalid_argument("adam_step: layout mismatch");
  for (std::size_t l = 0; l < g.size(); ++l) {
    if (!g[l].w.allFinite() || !g[l].b.allFinite())
      throw NumericError("adam_step: non-finite gradient in layer " + std::to_string(l));
  }

  s.step_count += 1;
  const Scalar b1 = static_cast<Scalar>(s.cfg.beta1);
  const Scalar b2 = static_cast<Scalar>(s.cfg.beta2);
  const Scalar corr1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(s.step_count));
  const Scalar corr2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(s.step_count));
  const Scalar lr = static_cast<Scalar>(s.cfg.lr);
  const Scalar eps = static_cast<Scalar>(s.cfg.epsilon);

  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
      m = b1 * m + (Scalar(1) - b1) * grad;
      v = (b2 * v.array() + (Scalar(1) - b2) * grad.array().square()).matrix();
      param.array() -=
          lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + eps);
    };
    update(p.layers[l].w, s.m[l].w, s.v[l].w, g[l].w);
    update(p.layers[l].b, s.m[l].b, s.v[l].b, g[l].b);
  }
}

}  // namespace poir

#endif  // POIR_ADAM_HPP_
