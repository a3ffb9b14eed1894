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

#ifndef POIR_REPLAY_HPP_
#define POIR_REPLAY_HPP_

#include <vector>

#include "poir/dataset.hpp"
#include "poir/types.hpp"

namespace poir {

// expert/agent mixture buffer for fine-tuning.  the expert set is immutable;
// the agent set grows without bound.  the agent fraction per batch ramps as
//   mixture_ratio = min(0.5, 0.05 * floor(counter / 100))
// where the counter advances once per sampled batch (one batch == one
// gradient step).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::vector<Transition> expert);

  long expert_size() const { return static_cast<long>(expert_.size()); }
  long agent_size() const { return static_cast<long>(agent_.size()); }
  long gradient_step_counter() const { return counter_; }

  double mixture_ratio() const;
  static double mixture_ratio_at(long counter);

  void push_agent(Transition t);

  // draws ceil(ratio * batch_size) agent samples (backfilled from expert when
  // the agent set is smaller), remainder expert, uniformly with replacement;
  // agent block first, then expert block.  advances the counter by one.
  std::vector<const Transition*> sample_mixed(int batch_size, Rng& rng);

  const std::vector<Transition>& expert_set() const { return expert_; }
  const std::vector<Transition>& agent_set() const { return agent_; }

 private:
  std::vector<Transition> expert_;
  std::vector<Transition> agent_;
  long counter_ = 0;
};

}  // namespace poir

#endif  // POIR_REPLAY_HPP_
