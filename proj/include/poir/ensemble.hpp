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

#ifndef POIR_ENSEMBLE_HPP_
#define POIR_ENSEMBLE_HPP_

#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "poir/adam.hpp"
#include "poir/mlp.hpp"
#include "poir/types.hpp"

namespace poir {

// bootstrap-by-initialization ensemble: every member sees the full dataset,
// diversity comes from per-member init and per-member shuffle order
template <typename Scalar>
struct EnsembleMember {
  MlpParams<Scalar> params;
  AdamState<Scalar> adam;
  std::uint64_t seed = 0;
  Scalar final_loss = std::numeric_limits<Scalar>::quiet_NaN();
};

template <typename Scalar>
struct Ensemble {
  MlpSpec spec;
  std::vector<EnsembleMember<Scalar>> members;

  int size() const { return static_cast<int>(members.size()); }
};

// member k draws its seed from (base_seed, "ensemble.member", k); init and
// shuffle order then derive from the member seed alone, so two members built
// with equal seeds stay bit-identical through training
template <typename Scalar>
EnsembleMember<Scalar> make_member(const MlpSpec& spec, std::uint64_t member_seed,
                                   const AdamConfig& adam_cfg) {
  EnsembleMember<Scalar> m;
  m.seed = member_seed;
  m.params = init_mlp<Scalar>(spec, derive_seed(member_seed, "init", 0));
  m.adam = make_adam_state(m.params, adam_cfg);
  return m;
}

template <typename Scalar>
Ensemble<Scalar> make_ensemble(const MlpSpec& spec, int ensemble_size,
                               std::uint64_t base_seed,
                               const AdamConfig& adam_cfg = {}) {
  if (ensemble_size < 1)
    throw std::invalid_argument("make_ensemble: ensemble_size must be >= 1");
  spec.validate();
  Ensemble<Scalar> e;
  e.spec = spec;
  e.members.reserve(ensemble_size);
  for (int k = 0; k < ensemble_size; ++k)
    e.members.push_back(make_member<Scalar>(
        spec, derive_seed(base_seed, "ensemble.member", k), adam_cfg));
  return e;
}

struct TrainConfig {
  int epochs = 500;
  int batch_size = 256;
};

// full passes over (inputs, targets), samples as columns; fresh shuffle per
// epoch, consecutive chunks as batches (trailing partial batch included).
// records last-epoch mean loss per member; throws NumericError on divergence.
template <typename Scalar>
void train_ensemble(Ensemble<Scalar>& e, const Mat<Scalar>& inputs,
                    const Mat<Scalar>& targets, const TrainConfig& cfg) {
  if (inputs.rows() != e.spec.input_dim || targets.rows() != e.spec.output_dim)
    throw std::invalid_argument("train_ensemble: data dims do not match spec");
  if (inputs.cols() != targets.cols() || inputs.cols() == 0)
    throw std::invalid_argument("train_ensemble: bad dataset shape");
  if (cfg.epochs < 1 || cfg.batch_size < 1)
    throw std::invalid_argument("train_ensemble: epochs and batch_size must be >= 1");

  const long n = static_cast<long>(inputs.cols());
  for (int k = 0; k < e.size(); ++k) {
    auto& member = e.members[k];
    Rng shuffle_rng(derive_seed(member.seed, "shuffle", 0));
    std::vector<long> perm(n);
    std::iota(perm.begin(), perm.end(), 0L);
    MlpGrads<Scalar> grads = zero_grads_like(member.params);
    Mat<Scalar> xb, tb;
    Scalar epoch_loss = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      // Fisher-Yates driven by the member's own stream
      for (long i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[shuffle_rng.index(static_cast<std::size_t>(i + 1))]);
      Scalar loss_acc = 0;
      for (long start = 0; start < n; start += cfg.batch_size) {
        const long b = std::min<long>(cfg.batch_size, n - start);
        xb.resize(inputs.rows(), b);
        tb.resize(targets.rows(), b);
        for (long j = 0; j < b; ++j) {
          xb.col(j) = inputs.col(perm[start + j]);
          tb.col(j) = targets.col(perm[start + j]);
        }
        const Scalar loss = mse_loss_grad(member.params, xb, tb, &grads);
        if (!std::isfinite(static_cast<double>(loss)))
          throw NumericError("train_ensemble: member " + std::to_string(k) +
                             " diverged (non-finite loss at epoch " +
                             std::to_string(epoch) + ")");
        adam_step(member.params, grads, member.adam);
        loss_acc += loss * static_cast<Scalar>(b);
      }
      epoch_loss = loss_acc / static_cast<Scalar>(n);
    }
    member.final_loss = epoch_loss;
  }
}

}  // namespace poir

#endif  // POIR_ENSEMBLE_HPP_
