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

#include "poir/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "poir/errors.hpp"

namespace poir {

void PlannerConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("planner: horizon must be >= 1");
  if (num_trajectories < 1) {
    throw std::invalid_argument("planner: num_trajectories must be >= 1");
  }
  if (noise_sigma < 0.0 || !std::isfinite(noise_sigma)) {
    throw std::invalid_argument("planner: noise_sigma must be finite and >= 0");
  }
  if (top_k < 1 || top_k > num_trajectories) {
    throw std::invalid_argument("planner: need 1 <= top_k <= num_trajectories");
  }
}

std::vector<RolloutRecord> rollout_batch(const PlannerConfig& cfg,
                                         const BcEnsemble* bc,
                                         const DynamicsEnsemble& wm,
                                         const RewardSpec& reward,
                                         const VecXd& norm_state,
                                         std::uint64_t seed) {
  cfg.validate();
  const int num_heads = wm.num_members();
  if (num_heads < 1) throw std::invalid_argument("rollout_batch: empty ensemble");
  if (cfg.use_bc_prior) {
    if (bc == nullptr) {
      throw std::invalid_argument("rollout_batch: bc prior required");
    }
    if (bc->num_members() != num_heads) {
      throw std::invalid_argument(
          "rollout_batch: bc and dynamics member counts differ");
    }
  }
  const auto action_dim = static_cast<Eigen::Index>(wm.normalizer.action_dim());
  // normalized action box for the no-prior ablation: image of the raw [-1,1]
  // box under the (affine, per-dim increasing) normalizer
  VecXd lo, hi;
  if (!cfg.use_bc_prior) {
    lo = wm.normalizer.normalize_action(VecXd::Constant(action_dim, -1.0));
    hi = wm.normalizer.normalize_action(VecXd::Constant(action_dim, 1.0));
  }

  std::vector<RolloutRecord> records(static_cast<std::size_t>(cfg.num_trajectories));
  for (int n = 1; n <= cfg.num_trajectories; ++n) {
    RolloutRecord& rec = records[static_cast<std::size_t>(n - 1)];
    rec.head = n % num_heads;
    rec.valid = true;
    rec.ret = 0.0;
    rec.actions.resize(action_dim, cfg.horizon);
    Rng rng(derive_seed(seed, "planner.traj", static_cast<std::uint64_t>(n)));
    VecXd s = norm_state;
    for (int t = 0; t < cfg.horizon; ++t) {
      VecXd a(action_dim);
      if (cfg.use_bc_prior) {
        a = predict_member(*bc, rec.head, s) +
            cfg.noise_sigma * rng.gaussian_vec(static_cast<int>(action_dim));
      } else {
        for (Eigen::Index d = 0; d < action_dim; ++d) a[d] = rng.uniform(lo[d], hi[d]);
      }
      const VecXd s_next = predict_member(wm, rec.head, s, a);
      rec.actions.col(t) = a;
      if (!a.allFinite() || !s_next.allFinite()) {
        rec.valid = false;
        break;
      }
      const double r = score_transition(reward, s, a, s_next);
      if (!std::isfinite(r)) {
        rec.valid = false;
        break;
      }
      rec.ret += r;
      s = s_next;
    }
    if (!rec.valid || !std::isfinite(rec.ret)) {
      rec.valid = false;
      rec.ret = -std::numeric_limits<double>::infinity();
    }
  }
  return records;
}

std::vector<int> rank_rollouts(const std::vector<RolloutRecord>& records) {
  std::vector<int> order;
  order.reserve(records.size());
  for (int i = 0; i < static_cast<int>(records.size()); ++i) {
    if (records[static_cast<std::size_t>(i)].valid) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&records](int a, int b) {
    const double ra = records[static_cast<std::size_t>(a)].ret;
    const double rb = records[static_cast<std::size_t>(b)].ret;
    if (ra != rb) return ra > rb;
    return a < b;
  });
  return order;
}

VecXd select_action(const PlannerConfig& cfg, const BcEnsemble* bc,
                    const DynamicsEnsemble& wm, const RewardSpec& reward,
                    const VecXd& norm_state, std::uint64_t seed) {
  const auto records = rollout_batch(cfg, bc, wm, reward, norm_state, seed);
  const auto order = rank_rollouts(records);
  if (order.empty()) {
    throw NumericError("select_action: every rollout produced non-finite values");
  }
  const int take = std::min(cfg.top_k, static_cast<int>(order.size()));
  VecXd sum = records[static_cast<std::size_t>(order[0])].actions.col(0);
  for (int i = 1; i < take; ++i) {
    sum += records[static_cast<std::size_t>(order[i])].actions.col(0);
  }
  return sum / static_cast<double>(take);
}

}  // namespace poir
