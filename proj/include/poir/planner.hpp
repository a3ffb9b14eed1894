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

#ifndef POIR_PLANNER_HPP_
#define POIR_PLANNER_HPP_

#include <cstdint>
#include <vector>

#include "poir/bc.hpp"
#include "poir/reward.hpp"
#include "poir/types.hpp"
#include "poir/world_model.hpp"

namespace poir {

// sampling-based mpc: roll candidate action sequences through the learned
// dynamics, score them with the imitation reward, execute the best first
// action.  everything happens in normalized coordinates; the caller
// denormalizes and clips the returned action before stepping the real env.
struct PlannerConfig {
  int horizon = 5;
  int num_trajectories = 4000;  // desk-scale runs use 200
  double noise_sigma = 0.2;
  int top_k = 1;             // 1 = pure argmax; >1 averages the best k
  bool use_bc_prior = true;  // false: uniform actions in normalized bounds

  void validate() const;  // throws std::invalid_argument
};

// one scored rollout.  actions is action_dim x horizon (column t = action at
// step t).  a non-finite action, prediction, or reward anywhere in the
// rollout marks it invalid with ret = -inf.
struct RolloutRecord {
  double ret = 0.0;
  int head = 0;  // ensemble member driving this rollout
  bool valid = false;
  MatXd actions;
};

// samples num_trajectories rollouts from norm_state.  rollout n (1-based)
// uses ensemble head n mod K and its own rng substream, so results are
// independent of evaluation order.  with the bc prior, actions are
// head-policy outputs plus N(0, sigma^2) noise; without it, actions are
// uniform in the normalized action box and no noise is added.
std::vector<RolloutRecord> rollout_batch(const PlannerConfig& cfg,
                                         const BcEnsemble* bc,
                                         const DynamicsEnsemble& wm,
                                         const RewardSpec& reward,
                                         const VecXd& norm_state,
                                         std::uint64_t seed);

// indices of the valid records ordered by return descending, ties broken by
// lower record index.
std::vector<int> rank_rollouts(const std::vector<RolloutRecord>& records);

// mean of the first actions of the top-k ranked rollouts (fewer if fewer are
// valid).  throws NumericError when every rollout is invalid.  with the bc
// prior, bc and wm must have the same member count (heads index both).
VecXd select_action(const PlannerConfig& cfg, const BcEnsemble* bc,
                    const DynamicsEnsemble& wm, const RewardSpec& reward,
                    const VecXd& norm_state, std::uint64_t seed);

}  // namespace poir

#endif  // POIR_PLANNER_HPP_
