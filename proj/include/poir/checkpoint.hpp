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

#ifndef POIR_CHECKPOINT_HPP_
#define POIR_CHECKPOINT_HPP_

#include <string>

#include <json.hpp>

#include "poir/ensemble.hpp"

namespace poir {

// versioned JSON checkpoints.  doubles are emitted in shortest round-trip
// form, so save -> load reproduces every parameter bit-exactly (covered by
// test).  adam moments ride along so a reloaded ensemble fine-tunes exactly
// like one that never left memory.

inline constexpr int kCheckpointFormatVersion = 1;

nlohmann::json mlp_spec_to_json(const MlpSpec& spec);
MlpSpec mlp_spec_from_json(const nlohmann::json& j);

nlohmann::json ensemble_to_json(const Ensemble<double>& e);
Ensemble<double> ensemble_from_json(const nlohmann::json& j);

void save_ensemble(const std::string& path, const Ensemble<double>& e);
Ensemble<double> load_ensemble(const std::string& path);

// generic helpers shared by the other modules' file formats
void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace poir

#endif  // POIR_CHECKPOINT_HPP_
