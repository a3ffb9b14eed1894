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

#include "poir/world_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace poir {

namespace {

VecXd concat_sa(const VecXd& s, const VecXd& a) {
  VecXd x(s.size() + a.size());
  x.head(s.size()) = s;
  x.tail(a.size()) = a;
  return x;
}

void check_member(const Ensemble<double>& e, int member, const char* who) {
  if (member < 0 || member >= static_cast<int>(e.size())) {
    throw std::invalid_argument(std::string(who) + ": member index out of range");
  }
}

}  // namespace

DynamicsEnsemble train_wm(const std::vector<Trajectory>& demos,
                          const MlpSpec& spec, int num_members,
                          const TrainConfig& tcfg, std::uint64_t seed,
                          const Normalizer& norm, bool predict_delta,
                          const AdamConfig& adam) {
  if (!norm.frozen()) throw std::invalid_argument("train_wm: normalizer not fitted");
  const auto sd = static_cast<Eigen::Index>(norm.state_dim());
  const auto ad = static_cast<Eigen::Index>(norm.action_dim());
  if (spec.input_dim != sd + ad || spec.output_dim != sd) {
    throw std::invalid_argument("train_wm: spec dims do not match normalizer");
  }
  Eigen::Index total = 0;
  for (const auto& tr : demos) total += static_cast<Eigen::Index>(tr.length());
  if (total == 0) throw std::invalid_argument("train_wm: no transitions");
  MatXd inputs(sd + ad, total);
  MatXd targets(sd, total);
  Eigen::Index col = 0;
  for (const auto& tr : demos) {
    tr.validate();
    for (int t = 0; t < tr.length(); ++t) {
      const auto i = static_cast<std::size_t>(t);
      inputs.col(col).head(sd) = norm.normalize_state(tr.states[i]);
      inputs.col(col).tail(ad) = norm.normalize_action(tr.actions[i]);
      targets.col(col) = norm.normalize_state(tr.states[i + 1]);
      if (predict_delta) targets.col(col) -= inputs.col(col).head(sd);
      ++col;
    }
  }
  DynamicsEnsemble wm{make_ensemble<double>(spec, num_members, seed, adam),
                      std::nullopt, norm, predict_delta};
  train_ensemble(wm.live, inputs, targets, tcfg);
  return wm;
}

VecXd predict_member(const DynamicsEnsemble& wm, int member,
                     const VecXd& norm_state, const VecXd& norm_action) {
  check_member(wm.live, member, "predict_member");
  VecXd out = forward(wm.live.members[static_cast<std::size_t>(member)].params,
                      concat_sa(norm_state, norm_action));
  if (wm.predict_delta) out += norm_state;
  return out;
}

VecXd predict_frozen_member(const DynamicsEnsemble& wm, int member,
                            const VecXd& norm_state, const VecXd& norm_action) {
  if (!wm.frozen.has_value()) {
    throw std::invalid_argument("predict_frozen_member: ensemble never frozen");
  }
  check_member(*wm.frozen, member, "predict_frozen_member");
  VecXd out =
      forward(wm.frozen->members[static_cast<std::size_t>(member)].params,
              concat_sa(norm_state, norm_action));
  if (wm.predict_delta) out += norm_state;
  return out;
}

void freeze_for_reward(DynamicsEnsemble& wm) {
  if (wm.frozen.has_value()) {
    throw std::invalid_argument("freeze_for_reward: already frozen");
  }
  wm.frozen = wm.live;
}

void fine_tune(DynamicsEnsemble& wm, ReplayBuffer& buffer, int steps,
               int batch_size, Rng& rng) {
  if (steps < 0) throw std::invalid_argument("fine_tune: steps must be >= 0");
  const auto sd = static_cast<Eigen::Index>(wm.normalizer.state_dim());
  const auto ad = static_cast<Eigen::Index>(wm.normalizer.action_dim());
  MatXd inputs(sd + ad, batch_size);
  MatXd targets(sd, batch_size);
  for (int step = 0; step < steps; ++step) {
    // one shared batch per step: every member sees the same mixture draw and
    // the schedule counter advances once, not once per member
    const auto batch = buffer.sample_mixed(batch_size, rng);
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(batch.size()); ++c) {
      const Transition& t = *batch[static_cast<std::size_t>(c)];
      if (t.state.size() != sd || t.action.size() != ad) {
        throw std::invalid_argument(
            "fine_tune: buffer transition dims do not match normalizer");
      }
      inputs.col(c).head(sd) = t.state;
      inputs.col(c).tail(ad) = t.action;
      targets.col(c) = t.next_state;
      if (wm.predict_delta) targets.col(c) -= t.state;
    }
    for (int k = 0; k < wm.live.size(); ++k) {
      auto& member = wm.live.members[static_cast<std::size_t>(k)];
      auto grads = zero_grads_like(member.params);
      const double loss = mse_loss_grad(member.params, inputs, targets, &grads);
      if (!std::isfinite(loss)) {
        throw NumericError("fine_tune: member " + std::to_string(k) +
                           " diverged (non-finite loss)");
      }
      adam_step(member.params, grads, member.adam);
    }
  }
}

}  // namespace poir
