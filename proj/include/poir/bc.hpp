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

#ifndef POIR_BC_HPP_
#define POIR_BC_HPP_

#include <cstdint>
#include <vector>

#include "poir/dataset.hpp"
#include "poir/ensemble.hpp"
#include "poir/types.hpp"

namespace poir {

// behavior-cloning prior: an ensemble of policies trained on expert
// demonstrations in normalized coordinates.  members differ only by their
// initialization seed; the planner samples around individual members and the
// ensemble mean is the standalone baseline policy.
struct BcEnsemble {
  Ensemble<double> ensemble;
  Normalizer normalizer;  // frozen copy of the moments used at fit time

  int num_members() const { return static_cast<int>(ensemble.size()); }
};

// trains a fresh bc ensemble on the (state -> action) pairs of all demo
// transitions.  `norm` must already be fitted (frozen) on the same demos; a
// copy is stored so the prior stays usable after the caller's normalizer
// moves on.
BcEnsemble train_bc(const std::vector<Trajectory>& demos, const MlpSpec& spec,
                    int num_members, const TrainConfig& tcfg,
                    std::uint64_t seed, const Normalizer& norm,
                    const AdamConfig& adam = {});

// raw per-member head: normalized state in, normalized action out, unclipped.
VecXd predict_member(const BcEnsemble& bc, int member, const VecXd& norm_state);

// ensemble mean in normalized coordinates (members summed in index order).
VecXd predict_mean_normalized(const BcEnsemble& bc, const VecXd& norm_state);

// standalone ensemble-bc policy: raw state in, raw action out, unclipped.
// callers clip to the action box at execution time.
VecXd predict_ebc(const BcEnsemble& bc, const VecXd& state);

}  // namespace poir

#endif  // POIR_BC_HPP_
