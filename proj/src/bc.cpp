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

#include "poir/bc.hpp"

#include <stdexcept>

namespace poir {

namespace {

// packs all demo transitions into normalized column-major (state, action)
// training matrices.
void build_bc_dataset(const std::vector<Trajectory>& demos,
                      const Normalizer& norm, MatXd& inputs, MatXd& targets) {
  Eigen::Index total = 0;
  for (const auto& tr : demos) total += static_cast<Eigen::Index>(tr.length());
  if (total == 0) throw std::invalid_argument("train_bc: no transitions");
  const auto sd = static_cast<Eigen::Index>(norm.state_dim());
  const auto ad = static_cast<Eigen::Index>(norm.action_dim());
  inputs.resize(sd, total);
  targets.resize(ad, total);
  Eigen::Index col = 0;
  for (const auto& tr : demos) {
    tr.validate();
    for (int t = 0; t < tr.length(); ++t) {
      const auto i = static_cast<std::size_t>(t);
      inputs.col(col) = norm.normalize_state(tr.states[i]);
      targets.col(col) = norm.normalize_action(tr.actions[i]);
      ++col;
    }
  }
}

}  // namespace

BcEnsemble train_bc(const std::vector<Trajectory>& demos, const MlpSpec& spec,
                    int num_members, const TrainConfig& tcfg,
                    std::uint64_t seed, const Normalizer& norm,
                    const AdamConfig& adam) {
  if (!norm.frozen()) throw std::invalid_argument("train_bc: normalizer not fitted");
  if (spec.input_dim != norm.state_dim() || spec.output_dim != norm.action_dim()) {
    throw std::invalid_argument("train_bc: spec dims do not match normalizer");
  }
  MatXd inputs, targets;
  build_bc_dataset(demos, norm, inputs, targets);
  BcEnsemble bc{make_ensemble<double>(spec, num_members, seed, adam), norm};
  train_ensemble(bc.ensemble, inputs, targets, tcfg);
  return bc;
}

VecXd predict_member(const BcEnsemble& bc, int member, const VecXd& norm_state) {
  if (member < 0 || member >= bc.num_members()) {
    throw std::invalid_argument("predict_member: member index out of range");
  }
  return forward(bc.ensemble.members[static_cast<std::size_t>(member)].params,
                 norm_state);
}

VecXd predict_mean_normalized(const BcEnsemble& bc, const VecXd& norm_state) {
  if (bc.num_members() == 0) {
    throw std::invalid_argument("predict_mean_normalized: empty ensemble");
  }
  VecXd sum = predict_member(bc, 0, norm_state);
  for (int k = 1; k < bc.num_members(); ++k) {
    sum += predict_member(bc, k, norm_state);
  }
  return sum / static_cast<double>(bc.num_members());
}

VecXd predict_ebc(const BcEnsemble& bc, const VecXd& state) {
  return bc.normalizer.denormalize_action(
      predict_mean_normalized(bc, bc.normalizer.normalize_state(state)));
}

}  // namespace poir
