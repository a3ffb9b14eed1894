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

#include "poir/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <vector>

#include "poir/errors.hpp"

namespace poir {

namespace {

using nlohmann::json;

json layer_to_json(const LinearLayer<double>& l) {
  // column-major flat dump mirrors Eigen's storage
  std::vector<double> w(l.w.data(), l.w.data() + l.w.size());
  std::vector<double> b(l.b.data(), l.b.data() + l.b.size());
  return json{{"rows", l.w.rows()}, {"cols", l.w.cols()}, {"w", w}, {"b", b}};
}

LinearLayer<double> layer_from_json(const json& j) {
  LinearLayer<double> l;
  const long rows = j.at("rows").get<long>();
  const long cols = j.at("cols").get<long>();
  const auto w = j.at("w").get<std::vector<double>>();
  const auto b = j.at("b").get<std::vector<double>>();
  if (static_cast<long>(w.size()) != rows * cols ||
      static_cast<long>(b.size()) != rows)
    throw IoError("checkpoint: layer size fields disagree with array lengths");
  l.w = Eigen::Map<const MatXd>(w.data(), rows, cols);
  l.b = Eigen::Map<const VecXd>(b.data(), rows);
  return l;
}

json layers_to_json(const MlpGrads<double>& layers) {
  json arr = json::array();
  for (const auto& l : layers) arr.push_back(layer_to_json(l));
  return arr;
}

MlpGrads<double> layers_from_json(const json& arr) {
  MlpGrads<double> out;
  for (const auto& lj : arr) out.push_back(layer_from_json(lj));
  return out;
}

// NaN is not representable in JSON; nlohmann would dump it as null.  encode
// optional scalars explicitly instead.
json finite_or_null(double x) {
  if (std::isfinite(x)) return json(x);
  return json();
}

double finite_or_nan(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

}  // namespace

json mlp_spec_to_json(const MlpSpec& spec) {
  return json{{"input_dim", spec.input_dim},
              {"output_dim", spec.output_dim},
              {"hidden_width", spec.hidden_width},
              {"depth", spec.depth},
              {"activation", to_string(spec.activation)}};
}

MlpSpec mlp_spec_from_json(const json& j) {
  MlpSpec spec;
  spec.input_dim = j.at("input_dim").get<int>();
  spec.output_dim = j.at("output_dim").get<int>();
  spec.hidden_width = j.at("hidden_width").get<int>();
  spec.depth = j.at("depth").get<int>();
  spec.activation = activation_from_string(j.at("activation").get<std::string>());
  spec.validate();
  return spec;
}

json ensemble_to_json(const Ensemble<double>& e) {
  json members = json::array();
  for (const auto& m : e.members) {
    members.push_back(json{{"seed", m.seed},
                           {"final_loss", finite_or_null(m.final_loss)},
                           {"layers", layers_to_json(m.params.layers)},
                           {"adam",
                            json{{"lr", m.adam.cfg.lr},
                                 {"beta1", m.adam.cfg.beta1},
                                 {"beta2", m.adam.cfg.beta2},
                                 {"epsilon", m.adam.cfg.epsilon},
                                 {"step_count", m.adam.step_count},
                                 {"m", layers_to_json(m.adam.m)},
                                 {"v", layers_to_json(m.adam.v)}}}});
  }
  return json{{"format_version", kCheckpointFormatVersion},
              {"spec", mlp_spec_to_json(e.spec)},
              {"members", members}};
}

Ensemble<double> ensemble_from_json(const json& j) {
  const int version = j.at("format_version").get<int>();
  if (version != kCheckpointFormatVersion)
    throw IoError("checkpoint: unsupported format_version " + std::to_string(version));
  Ensemble<double> e;
  e.spec = mlp_spec_from_json(j.at("spec"));
  for (const auto& mj : j.at("members")) {
    EnsembleMember<double> m;
    m.seed = mj.at("seed").get<std::uint64_t>();
    m.final_loss = finite_or_nan(mj.at("final_loss"));
    m.params.spec = e.spec;
    m.params.layers = layers_from_json(mj.at("layers"));
    if (static_cast<int>(m.params.layers.size()) != e.spec.num_linear())
      throw IoError("checkpoint: member layer count disagrees with spec");
    const auto& aj = mj.at("adam");
    m.adam.cfg.lr = aj.at("lr").get<double>();
    m.adam.cfg.beta1 = aj.at("beta1").get<double>();
    m.adam.cfg.beta2 = aj.at("beta2").get<double>();
    m.adam.cfg.epsilon = aj.at("epsilon").get<double>();
    m.adam.step_count = aj.at("step_count").get<long>();
    m.adam.m = layers_from_json(aj.at("m"));
    m.adam.v = layers_from_json(aj.at("v"));
    e.members.push_back(std::move(m));
  }
  return e;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump();
  out << '\n';
  if (!out) throw IoError("write failed: " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void save_ensemble(const std::string& path, const Ensemble<double>& e) {
  write_json_file(path, ensemble_to_json(e));
}

Ensemble<double> load_ensemble(const std::string& path) {
  return ensemble_from_json(read_json_file(path));
}

}  // namespace poir
