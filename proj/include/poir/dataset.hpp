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

#ifndef POIR_DATASET_HPP_
#define POIR_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "poir/types.hpp"

namespace poir {

struct Transition {
  VecXd state;
  VecXd action;
  VecXd next_state;
};

// one episode: states has length T+1, actions length T; state chaining
// (transition t's next_state == transition t+1's state) holds by construction
struct Trajectory {
  std::vector<VecXd> states;
  std::vector<VecXd> actions;
  bool success = false;
  std::uint64_t episode_seed = 0;

  int length() const { return static_cast<int>(actions.size()); }
  void validate() const;  // throws std::invalid_argument
  std::vector<Transition> transitions() const;
};

// flatten many episodes into transitions
std::vector<Transition> to_transitions(const std::vector<Trajectory>& trajs);

// every state in the data: each transition's state plus each episode's final
// next_state; this is the reference set for the nearest-expert-state reward
std::vector<VecXd> all_states(const std::vector<Trajectory>& trajs);

// JSON-lines persistence, one trajectory per line
// {"states": [[..],..], "actions": [[..],..], "success": bool, "seed": n}
void save_trajectories_jsonl(const std::string& path,
                             const std::vector<Trajectory>& trajs);
// malformed input raises IoError naming the 1-based line number
std::vector<Trajectory> load_trajectories_jsonl(const std::string& path);

// per-dimension affine whitening, fit once on expert data and then frozen;
// online data is normalized with these statistics, never refit
class Normalizer {
 public:
  Normalizer() = default;

  // population mean/std over all expert states (incl. final next_states) and
  // actions; std floored at 1e-6; throws if already frozen or data is empty
  void fit(const std::vector<Trajectory>& expert);
  static Normalizer fit_from(const std::vector<Trajectory>& expert);
  // frozen pass-through normalizer (used when normalization is disabled)
  static Normalizer identity(int state_dim, int action_dim);

  bool frozen() const { return frozen_; }
  int state_dim() const { return static_cast<int>(state_mean_.size()); }
  int action_dim() const { return static_cast<int>(action_mean_.size()); }

  VecXd normalize_state(const VecXd& s) const;
  VecXd denormalize_state(const VecXd& s) const;
  VecXd normalize_action(const VecXd& a) const;
  VecXd denormalize_action(const VecXd& a) const;
  Transition normalize(const Transition& t) const;

  const VecXd& state_mean() const { return state_mean_; }
  const VecXd& state_std() const { return state_std_; }
  const VecXd& action_mean() const { return action_mean_; }
  const VecXd& action_std() const { return action_std_; }

  // exact round-trip accessors for serialization
  static Normalizer from_moments(VecXd state_mean, VecXd state_std,
                                 VecXd action_mean, VecXd action_std);

 private:
  void require_frozen() const;
  VecXd state_mean_, state_std_, action_mean_, action_std_;
  bool frozen_ = false;
};

}  // namespace poir

#endif  // POIR_DATASET_HPP_
