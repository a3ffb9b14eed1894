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

#ifndef POIR_WORLD_MODEL_HPP_
#define POIR_WORLD_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "poir/dataset.hpp"
#include "poir/ensemble.hpp"
#include "poir/replay.hpp"
#include "poir/types.hpp"

namespace poir {

// learned dynamics: each member maps concat(norm_state, norm_action) to the
// absolute normalized next state by default, or to the normalized state
// delta when `predict_delta` is set (the net then models s' - s and
// prediction adds the current state back).  the live ensemble is fine-tuned
// online; `frozen` is an optional snapshot taken before any fine-tuning so
// the model-disagreement reward stays fixed while the live models drift.
struct DynamicsEnsemble {
  Ensemble<double> live;
  std::optional<Ensemble<double>> frozen;
  Normalizer normalizer;  // frozen copy of the moments used at fit time
  bool predict_delta = false;

  int num_members() const { return static_cast<int>(live.size()); }
};

// trains a fresh dynamics ensemble on all demo transitions.  `norm` must
// already be fitted on the same demos.
DynamicsEnsemble train_wm(const std::vector<Trajectory>& demos,
                          const MlpSpec& spec, int num_members,
                          const TrainConfig& tcfg, std::uint64_t seed,
                          const Normalizer& norm, bool predict_delta = false,
                          const AdamConfig& adam = {});

// one-step prediction by a single live member, normalized in and out.
VecXd predict_member(const DynamicsEnsemble& wm, int member,
                     const VecXd& norm_state, const VecXd& norm_action);

// one-step prediction by a frozen-snapshot member; throws if never frozen.
VecXd predict_frozen_member(const DynamicsEnsemble& wm, int member,
                            const VecXd& norm_state, const VecXd& norm_action);

// snapshots the live ensemble for reward use.  call exactly once, before the
// first fine_tune; calling again would silently move the reward and throws.
void freeze_for_reward(DynamicsEnsemble& wm);

// runs `steps` gradient steps on the live members.  each step draws one mixed
// expert/agent batch (advancing the buffer's mixture schedule once) and
// applies it to every member, so all members walk the same data stream.
// buffer contents must already be in normalized coordinates.
void fine_tune(DynamicsEnsemble& wm, ReplayBuffer& buffer, int steps,
               int batch_size, Rng& rng);

}  // namespace poir

#endif  // POIR_WORLD_MODEL_HPP_
