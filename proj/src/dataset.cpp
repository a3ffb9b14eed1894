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

#include "poir/dataset.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "poir/errors.hpp"

namespace poir {

using nlohmann::json;

void Trajectory::validate() const {
  if (states.size() != actions.size() + 1)
    throw std::invalid_argument(
        "Trajectory: need exactly one more state than actions (got " +
        std::to_string(states.size()) + " states, " +
        std::to_string(actions.size()) + " actions)");
  if (actions.empty()) throw std::invalid_argument("Trajectory: empty episode");
  const long sd = states.front().size();
  const long ad = actions.front().size();
  if (sd == 0 || ad == 0)
    throw std::invalid_argument("Trajectory: zero-dimensional state or action");
  for (const auto& s : states)
    if (s.size() != sd) throw std::invalid_argument("Trajectory: ragged state dims");
  for (const auto& a : actions)
    if (a.size() != ad) throw std::invalid_argument("Trajectory: ragged action dims");
}

std::vector<Transition> Trajectory::transitions() const {
  validate();
  std::vector<Transition> out;
  out.reserve(actions.size());
  for (std::size_t t = 0; t < actions.size(); ++t)
    out.push_back(Transition{states[t], actions[t], states[t + 1]});
  return out;
}

std::vector<Transition> to_transitions(const std::vector<Trajectory>& trajs) {
  std::vector<Transition> out;
  for (const auto& tr : trajs) {
    auto ts = tr.transitions();
    out.insert(out.end(), std::make_move_iterator(ts.begin()),
               std::make_move_iterator(ts.end()));
  }
  return out;
}

std::vector<VecXd> all_states(const std::vector<Trajectory>& trajs) {
  std::vector<VecXd> out;
  for (const auto& tr : trajs) {
    tr.validate();
    for (const auto& s : tr.states) out.push_back(s);
  }
  return out;
}

namespace {

json vec_to_json(const VecXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

VecXd vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VecXd>(v.data(), static_cast<long>(v.size()));
}

}  // namespace

void save_trajectories_jsonl(const std::string& path,
                             const std::vector<Trajectory>& trajs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const auto& tr : trajs) {
    tr.validate();
    json line;
    json states = json::array(), actions = json::array();
    for (const auto& s : tr.states) states.push_back(vec_to_json(s));
    for (const auto& a : tr.actions) actions.push_back(vec_to_json(a));
    line["states"] = std::move(states);
    line["actions"] = std::move(actions);
    line["success"] = tr.success;
    line["seed"] = tr.episode_seed;
    out << line.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<Trajectory> load_trajectories_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<Trajectory> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IoError("malformed JSON at " + where + ": " + e.what());
    }
    try {
      Trajectory tr;
      for (const auto& s : j.at("states")) tr.states.push_back(vec_from_json(s));
      for (const auto& a : j.at("actions")) tr.actions.push_back(vec_from_json(a));
      tr.success = j.at("success").get<bool>();
      tr.episode_seed = j.at("seed").get<std::uint64_t>();
      tr.validate();
      out.push_back(std::move(tr));
    } catch (const json::exception& e) {
      throw IoError("bad trajectory record at " + where + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw IoError("bad trajectory record at " + where + ": " + e.what());
    }
  }
  return out;
}

void Normalizer::fit(const std::vector<Trajectory>& expert) {
  if (frozen_) throw std::invalid_argument("Normalizer: already fit (frozen)");
  if (expert.empty()) throw std::invalid_argument("Normalizer: no expert data");

  const auto states = all_states(expert);
  const long sd = states.front().size();
  VecXd s_mean = VecXd::Zero(sd), s_sq = VecXd::Zero(sd);
  for (const auto& s : states) {
    s_mean += s;
    s_sq += s.cwiseProduct(s);
  }
  const double ns = static_cast<double>(states.size());
  s_mean /= ns;
  VecXd s_var = s_sq / ns - s_mean.cwiseProduct(s_mean);

  long na = 0;
  const long ad = expert.front().actions.front().size();
  VecXd a_mean = VecXd::Zero(ad), a_sq = VecXd::Zero(ad);
  for (const auto& tr : expert)
    for (const auto& a : tr.actions) {
      a_mean += a;
      a_sq += a.cwiseProduct(a);
      ++na;
    }
  a_mean /= static_cast<double>(na);
  VecXd a_var = a_sq / static_cast<double>(na) - a_mean.cwiseProduct(a_mean);

  state_mean_ = s_mean;
  state_std_ = s_var.cwiseMax(0.0).cwiseSqrt().cwiseMax(1e-6);
  action_mean_ = a_mean;
  action_std_ = a_var.cwiseMax(0.0).cwiseSqrt().cwiseMax(1e-6);
  frozen_ = true;
}

Normalizer Normalizer::fit_from(const std::vector<Trajectory>& expert) {
  Normalizer n;
  n.fit(expert);
  return n;
}

Normalizer Normalizer::identity(int state_dim, int action_dim) {
  if (state_dim < 1 || action_dim < 1)
    throw std::invalid_argument("Normalizer::identity: dims must be >= 1");
  Normalizer n;
  n.state_mean_ = VecXd::Zero(state_dim);
  n.state_std_ = VecXd::Ones(state_dim);
  n.action_mean_ = VecXd::Zero(action_dim);
  n.action_std_ = VecXd::Ones(action_dim);
  n.frozen_ = true;
  return n;
}

Normalizer Normalizer::from_moments(VecXd state_mean, VecXd state_std,
                                    VecXd action_mean, VecXd action_std) {
  if (state_mean.size() != state_std.size() ||
      action_mean.size() != action_std.size())
    throw std::invalid_argument("Normalizer::from_moments: shape mismatch");
  Normalizer n;
  n.state_mean_ = std::move(state_mean);
  n.state_std_ = std::move(state_std);
  n.action_mean_ = std::move(action_mean);
  n.action_std_ = std::move(action_std);
  n.frozen_ = true;
  return n;
}

void Normalizer::require_frozen() const {
  if (!frozen_) throw std::invalid_argument("Normalizer: used before fit");
}

VecXd Normalizer::normalize_state(const VecXd& s) const {
  require_frozen();
  if (s.size() != state_mean_.size())
    throw std::invalid_argument("Normalizer: state dim mismatch");
  return (s - state_mean_).cwiseQuotient(state_std_);
}

VecXd Normalizer::denormalize_state(const VecXd& s) const {
  require_frozen();
  if (s.size() != state_mean_.size())
    throw std::invalid_argument("Normalizer: state dim mismatch");
  return s.cwiseProduct(state_std_) + state_mean_;
}

VecXd Normalizer::normalize_action(const VecXd& a) const {
  require_frozen();
  if (a.size() != action_mean_.size())
    throw std::invalid_argument("Normalizer: action dim mismatch");
  return (a - action_mean_).cwiseQuotient(action_std_);
}

VecXd Normalizer::denormalize_action(const VecXd& a) const {
  require_frozen();
  if (a.size() != action_mean_.size())
    throw std::invalid_argument("Normalizer: action dim mismatch");
  return a.cwiseProduct(action_std_) + action_mean_;
}

Transition Normalizer::normalize(const Transition& t) const {
  return Transition{normalize_state(t.state), normalize_action(t.action),
                    normalize_state(t.next_state)};
}

}  // namespace poir
