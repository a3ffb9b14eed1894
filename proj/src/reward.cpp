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

#include "poir/reward.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "poir/errors.hpp"

namespace poir {

std::string to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::kL2: return "l2";
    case RewardKind::kDril: return "dril";
    case RewardKind::kMorel: return "morel";
  }
  throw std::invalid_argument("to_string: bad RewardKind");
}

RewardKind reward_kind_from_string(const std::string& name) {
  if (name == "l2") return RewardKind::kL2;
  if (name == "dril") return RewardKind::kDril;
  if (name == "morel") return RewardKind::kMorel;
  throw ConfigError("unknown reward kind: '" + name + "' (want l2|dril|morel)");
}

std::string to_string(EvalPoint p) {
  switch (p) {
    case EvalPoint::kCurrentState: return "current_state";
    case EvalPoint::kNextState: return "next_state";
  }
  throw std::invalid_argument("to_string: bad EvalPoint");
}

EvalPoint eval_point_from_string(const std::string& name) {
  if (name == "current_state") return EvalPoint::kCurrentState;
  if (name == "next_state") return EvalPoint::kNextState;
  throw ConfigError("unknown eval point: '" + name +
                    "' (want current_state|next_state)");
}

double reward_l2(const MatXd& expert_states, const VecXd& q) {
  const Eigen::Index num_points = expert_states.rows();
  const Eigen::Index dim = expert_states.cols();
  if (num_points == 0) throw std::invalid_argument("reward_l2: empty expert set");
  if (q.size() != dim) throw std::invalid_argument("reward_l2: query dim mismatch");
  // one partial-sum accumulator per point, advanced dimension by dimension:
  // identical add order to a scalar scan, but vectorized across points
  Eigen::ArrayXd acc = (expert_states.col(0).array() - q[0]).square();
  for (Eigen::Index d = 1; d < dim; ++d) {
    acc += (expert_states.col(d).array() - q[d]).square();
  }
  return -std::sqrt(acc.minCoeff());
}

namespace {

// -max pairwise euclidean distance between the given member outputs,
// accumulated scalar-wise in dimension order
double neg_max_pairwise_dist(const std::vector<VecXd>& outs) {
  double worst = 0.0;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    for (std::size_t j = i + 1; j < outs.size(); ++j) {
      double sq = 0.0;
      for (Eigen::Index d = 0; d < outs[i].size(); ++d) {
        const double diff = outs[i][d] - outs[j][d];
        sq += diff * diff;
      }
      const double dist = std::sqrt(sq);
      if (dist > worst) worst = dist;
    }
  }
  return -worst;
}

}  // namespace

double reward_dril(const BcEnsemble& bc, const VecXd& norm_state) {
  const int num = bc.num_members();
  if (num < 2) throw std::invalid_argument("reward_dril: needs >= 2 members");
  std::vector<VecXd> outs;
  outs.reserve(static_cast<std::size_t>(num));
  for (int k = 0; k < num; ++k) outs.push_back(predict_member(bc, k, norm_state));
  return neg_max_pairwise_dist(outs);
}

double reward_morel(const DynamicsEnsemble& wm, const VecXd& norm_state,
                    const VecXd& norm_action) {
  if (!wm.frozen.has_value()) {
    throw std::invalid_argument("reward_morel: dynamics ensemble never frozen");
  }
  const int num = static_cast<int>(wm.frozen->size());
  if (num < 2) throw std::invalid_argument("reward_morel: needs >= 2 members");
  std::vector<VecXd> outs;
  outs.reserve(static_cast<std::size_t>(num));
  for (int k = 0; k < num; ++k) {
    outs.push_back(predict_frozen_member(wm, k, norm_state, norm_action));
  }
  return neg_max_pairwise_dist(outs);
}

double score_transition(const RewardSpec& spec, const VecXd& s, const VecXd& a,
                        const VecXd& s_pred) {
  switch (spec.kind) {
    case RewardKind::kL2: {
      const VecXd& q = spec.eval_point == EvalPoint::kNextState ? s_pred : s;
      return reward_l2(spec.expert_states, q);
    }
    case RewardKind::kDril: {
      if (spec.bc == nullptr) {
        throw std::invalid_argument("score_transition: dril needs a bc prior");
      }
      const VecXd& q = spec.eval_point == EvalPoint::kNextState ? s_pred : s;
      return reward_dril(*spec.bc, q);
    }
    case RewardKind::kMorel: {
      if (spec.wm == nullptr) {
        throw std::invalid_argument(
            "score_transition: morel needs a dynamics ensemble");
      }
      return reward_morel(*spec.wm, s, a);
    }
  }
  throw std::invalid_argument("score_transition: bad RewardKind");
}

}  // namespace poir
