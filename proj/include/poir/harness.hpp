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

#ifndef POIR_HARNESS_HPP_
#define POIR_HARNESS_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "poir/bc.hpp"
#include "poir/dataset.hpp"
#include "poir/env.hpp"
#include "poir/planner.hpp"
#include "poir/reward.hpp"
#include "poir/types.hpp"
#include "poir/world_model.hpp"

namespace poir {

// the experiment driver: offline training, the online fine-tuning loop,
// periodic evaluation, and noise sweeps, all emitting one flat metrics table.
// every random draw descends from a single master seed per run, so a rerun
// with the same config reproduces the table bit-exactly (wall-clock column
// aside).

// which policy sits in the loop.  poir and poir_no_prior plan through the
// learned dynamics; ebc and bc_single act by the bc ensemble mean (a single
// member for bc_single) and never learn online.
enum class AgentKind { kPoir, kEbc, kBcSingle, kPoirNoPrior };

std::string to_string(AgentKind kind);
AgentKind agent_kind_from_string(const std::string& name);  // ConfigError

// true for the kinds that run the planner (and therefore need a dynamics
// ensemble and fine-tune online)
bool is_planner_kind(AgentKind kind);

struct DemoConfig {
  std::string path;  // empty: generate in memory from `seed`
  int count = 200;
  std::uint64_t seed = 7;  // demo generation stream, shared by all run seeds
};

struct ModelConfig {
  int hidden_width = 32;  // desk scale; full scale uses 300
  int depth = 2;          // desk scale; full scale uses 5
  std::string activation = "relu";
  int ensemble_size = 9;  // desk scale; full scale uses 27
  double learning_rate = 1e-4;
  int epochs = 500;
  int batch_size = 256;
  bool wm_predict_delta = false;  // dynamics nets model s' - s instead of s'
};

struct ScheduleConfig {
  int total_env_steps = 50000;  // desk scale; full scale uses 500000
  int eval_every = 5000;        // must divide total_env_steps
  int eval_episodes = 20;
  int train_every = 50;  // env steps between fine-tune rounds; 0 disables
  int grad_steps_per_round = 50;
};

struct ExperimentConfig {
  EnvConfig env;  // deployment noise; demos always use the demo defaults
  DemoConfig demos;
  ModelConfig model;
  PlannerConfig planner{.num_trajectories = 200};  // desk-scale default
  RewardKind reward_kind = RewardKind::kL2;
  EvalPoint reward_eval_point = EvalPoint::kNextState;
  ScheduleConfig schedule;
  AgentKind agent = AgentKind::kPoir;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  // normalization default follows the agent: planner kinds normalize on
  // expert moments, bc baselines run on raw coordinates.  set to force.
  std::optional<bool> normalize;
  std::string out_dir = "out";

  void validate() const;  // throws ConfigError
  bool normalize_for(AgentKind kind) const;
};

// strict config file handling: `from_json` starts from defaults, applies only
// known keys, and rejects unknown ones so typos cannot silently no-op.
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

// loads cfg.demos.path when set (IoError names the path if missing),
// otherwise generates cfg.demos.count episodes at the demo-noise defaults.
std::vector<Trajectory> load_or_generate_demos(const ExperimentConfig& cfg);

// everything run_offline produces: the bc prior, the dynamics ensemble for
// planner kinds (frozen snapshot already taken), and the normalized expert
// data the reward and replay buffer are built from.
struct OfflineBundle {
  BcEnsemble bc;
  std::optional<DynamicsEnsemble> wm;
  MatXd expert_states;  // normalized, row per state, final states included
  std::vector<Transition> expert_transitions;  // normalized
  RewardKind reward_kind = RewardKind::kL2;
  EvalPoint reward_eval_point = EvalPoint::kNextState;

  // the configured reward is computable: morel needs a frozen dynamics
  // ensemble, the others only need what every bundle has
  bool reward_available() const;
  // non-owning views into this bundle; keep the bundle alive and in place
  RewardSpec reward_spec() const;
};

// trains the bundle for cfg.agent from scratch: normalizer (expert moments
// or identity), bc ensemble (single member for bc_single), and for planner
// kinds the dynamics ensemble plus its reward snapshot.
OfflineBundle run_offline(const ExperimentConfig& cfg,
                          const std::vector<Trajectory>& demos,
                          std::uint64_t run_seed);

// bundle checkpointing: bc/wm ensembles, normalizer moments, and a meta
// record.  expert data is rebuilt from the demos at load time.
void save_bundle(const std::string& dir, const OfflineBundle& bundle);
OfflineBundle load_bundle(const std::string& dir,
                          const std::vector<Trajectory>& demos);

// a policy in the loop: normalized state in, normalized action out.  the
// planner draws fresh noise per call from a stream derived off the episode
// seed, so begin_episode must run before the first act of every episode.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode(std::uint64_t policy_seed) = 0;
  virtual VecXd act(const VecXd& norm_state) = 0;
};

// builds the acting policy for an agent kind over a live bundle.  the bundle
// must outlive the policy.  the kind decides the prior flag: poir_no_prior
// always plans from uniform proposals, poir always uses the bc prior.
std::unique_ptr<Policy> make_policy(AgentKind kind, const OfflineBundle& bundle,
                                    const PlannerConfig& planner_cfg);

struct EvalResult {
  double success_rate = 0.0;  // successes / episodes, exact
  double mean_return = 0.0;   // mean episode imitation return; nan if no reward
};

// runs `episodes` fresh episodes at the config's deployment noise with
// per-episode seeds derived from eval_seed.  pure measurement: nothing is
// pushed anywhere and the policy receives no learning signal.
EvalResult evaluate(Policy& policy, const OfflineBundle& bundle,
                    const EnvConfig& env_cfg, int episodes,
                    std::uint64_t eval_seed);

// one metrics table row.  row_kind: "eval" for periodic rows (env_step 0 is
// the offline point), "final_offline"/"final_online" for the per-cell sweep
// summaries, "failed" for a sweep cell that died (metrics nan).
struct MetricsRow {
  std::string agent;
  double sigma_init = 0.0;
  double sigma_action = 0.0;
  std::uint64_t seed = 0;
  long env_step = 0;
  double success_rate = 0.0;
  double mean_return = 0.0;
  double wall_seconds = 0.0;  // excluded from determinism comparisons
  double mixture_ratio = 0.0;
  std::string row_kind = "eval";
};

std::string metrics_csv_header();
std::string to_csv_row(const MetricsRow& row);
void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows);

// the online loop for one run seed: evaluate the offline bundle (env_step 0
// row), then step the deployment env, pushing normalized transitions and
// fine-tuning the live dynamics on the mixture schedule for planner kinds,
// evaluating every eval_every steps.  bc baselines run the same loop minus
// buffer and fine-tuning.  mutates bundle's live dynamics in place.
std::vector<MetricsRow> run_online(const ExperimentConfig& cfg,
                                   OfflineBundle& bundle,
                                   std::uint64_t run_seed);

// noise sweep axis: name is "sigma_init" or "sigma_action"
struct SweepAxis {
  std::string name;
  std::vector<double> values;

  void validate() const;  // throws ConfigError
};

SweepAxis default_sigma_init_axis();    // {0.02, 0.1, 0.2, 0.3, 0.4}
SweepAxis default_sigma_action_axis();  // {0, 0.025, 0.05, 0.075, 0.1}

// cartesian product of agents x base.seeds x axis values.  each (agent, seed)
// bundle is trained once and deep-copied per noise level so fine-tuning in
// one cell cannot leak into the next.  a cell that throws NumericError is
// recorded as a "failed" row and the sweep continues; each finished cell
// contributes its eval rows plus final_offline/final_online summaries.
std::vector<MetricsRow> run_sweep(const ExperimentConfig& base,
                                  const SweepAxis& axis,
                                  const std::vector<AgentKind>& agents,
                                  const std::vector<Trajectory>& demos);

}  // namespace poir

#endif  // POIR_HARNESS_HPP_
