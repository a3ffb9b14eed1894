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

#include "poir/replay.hpp"

#include <cmath>
#include <stdexcept>

namespace poir {

ReplayBuffer::ReplayBuffer(std::vector<Transition> expert)
    : expert_(std::move(expert)) {
  if (expert_.empty())
    throw std::invalid_argument("ReplayBuffer: expert set must be non-empty");
  const long sd = expert_.front().state.size();
  const long ad = expert_.front().action.size();
  for (const auto& t : expert_)
    if (t.state.size() != sd || t.action.size() != ad || t.next_state.size() != sd)
      throw std::invalid_argument("ReplayBuffer: inconsistent expert transition dims");
}

double ReplayBuffer::mixture_ratio_at(long counter) {
  return std::min(0.5, 0.05 * static_cast<double>(counter / 100));
}

double ReplayBuffer::mixture_ratio() const { return mixture_ratio_at(counter_); }

void ReplayBuffer::push_agent(Transition t) {
  if (t.state.size() != expert_.front().state.size() ||
      t.action.size() != expert_.front().action.size() ||
      t.next_state.size() != expert_.front().next_state.size())
    throw std::invalid_argument("ReplayBuffer: agent transition dim mismatch");
  agent_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayBuffer::sample_mixed(int batch_size, Rng& rng) {
  if (batch_size < 1)
    throw std::invalid_argument("ReplayBuffer: batch_size must be >= 1");

  const double ratio = mixture_ratio();
  long agent_quota = static_cast<long>(
      std::ceil(ratio * static_cast<double>(batch_size)));
  agent_quota = std::min<long>(agent_quota, agent_size());

  std::vector<const Transition*> batch;
  batch.reserve(batch_size);
  for (long i = 0; i < agent_quota; ++i)
    batch.push_back(&agent_[rng.index(agent_.size())]);
  for (long i = agent_quota; i < batch_size; ++i)
    batch.push_back(&expert_[rng.index(expert_.size())]);

  counter_ += 1;
  return batch;
}

}  // namespace poir
