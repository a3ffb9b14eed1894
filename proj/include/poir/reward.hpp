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

#ifndef POIR_REWARD_HPP_
#define POIR_REWARD_HPP_

#include <string>

#include "poir/bc.hpp"
#include "poir/types.hpp"
#include "poir/world_model.hpp"

namespace poir {

// imitation rewards, all computed in normalized coordinates:
//   l2    — negated distance to the nearest expert state (exact scan)
//   dril  — negated worst pairwise disagreement between bc policy members
//   morel — negated worst pairwise disagreement between frozen dynamics
//           members on (state, action)
enum class RewardKind { kL2, kDril, kMorel };

std::string to_string(RewardKind kind);
RewardKind reward_kind_from_string(const std::string& name);  // ConfigError

// where the state-based rewards (l2, dril) are evaluated within a transition;
// the action-based morel reward always uses (state, action).
enum class EvalPoint { kCurrentState, kNextState };

std::string to_string(EvalPoint p);
EvalPoint eval_point_from_string(const std::string& name);  // ConfigError

// everything score_transition needs.  non-owning pointers: the bc prior is
// required for dril, the dynamics ensemble (with a frozen snapshot) for
// morel.  expert_states has one row per normalized expert state.
struct RewardSpec {
  RewardKind kind = RewardKind::kL2;
  EvalPoint eval_point = EvalPoint::kNextState;
  MatXd expert_states;  // P x D, row-per-point
  const BcEnsemble* bc = nullptr;
  const DynamicsEnsemble* wm = nullptr;
};

// exact nearest-neighbor reward: -min_p ||q - expert_states.row(p)||.
// per-point accumulation runs over dimensions in index order, so the result
// is bit-identical to a scalar point-by-point scan.
double reward_l2(const MatXd& expert_states, const VecXd& q);

// -max_{i<j} ||pi_i(s) - pi_j(s)|| over bc members; needs >= 2 members.
double reward_dril(const BcEnsemble& bc, const VecXd& norm_state);

// -max_{i<j} ||f_i(s,a) - f_j(s,a)|| over frozen dynamics members; needs a
// frozen snapshot with >= 2 members.  fine-tuning the live ensemble after
// freezing must not change this value.
double reward_morel(const DynamicsEnsemble& wm, const VecXd& norm_state,
                    const VecXd& norm_action);

// per-transition dispatch: l2/dril score the state chosen by eval_point
// (s_pred or s), morel scores (s, a).
double score_transition(const RewardSpec& spec, const VecXd& s, const VecXd& a,
                        const VecXd& s_pred);

}  // namespace poir

#endif  // POIR_REWARD_HPP_
