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

#include "poir/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "poir/checkpoint.hpp"
#include "poir/errors.hpp"
#include "poir/replay.hpp"

namespace poir {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// strict key handling: a config object may only contain known keys
void check_keys(const nlohmann::json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw ConfigError("config: '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("config: unknown key '" +
                        (where.empty() ? it.key() : where + "." + it.key()) +
                        "'");
  }
}

template <typename T>
void get_if_present(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

std::vector<double> to_std(const VecXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

VecXd from_std(const std::vector<double>& v) {
  VecXd out(static_cast<long>(v.size()));
  for (long i = 0; i < out.size(); ++i) out[i] = v[static_cast<size_t>(i)];
  return out;
}

}  // namespace

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kPoir:
      return "poir";
    case AgentKind::kEbc:
      return "ebc";
    case AgentKind::kBcSingle:
      return "bc_single";
    case AgentKind::kPoirNoPrior:
      return "poir_no_prior";
  }
  throw std::invalid_argument("to_string: bad AgentKind");
}

AgentKind agent_kind_from_string(const std::string& name) {
  if (name == "poir") return AgentKind::kPoir;
  if (name == "ebc") return AgentKind::kEbc;
  if (name == "bc_single") return AgentKind::kBcSingle;
  if (name == "poir_no_prior") return AgentKind::kPoirNoPrior;
  throw ConfigError("unknown agent '" + name +
                    "' (expected poir|ebc|bc_single|poir_no_prior)");
}

bool is_planner_kind(AgentKind kind) {
  return kind == AgentKind::kPoir || kind == AgentKind::kPoirNoPrior;
}

void ExperimentConfig::validate() const {
  env.validate();
  try {
    planner.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: planner: ") + e.what());
  }
  activation_from_string(model.activation);
  if (demos.count < 1) throw ConfigError("config: demos.count must be >= 1");
  if (model.hidden_width < 1 || model.depth < 1)
    throw ConfigError("config: model width/depth must be >= 1");
  if (model.ensemble_size < 1)
    throw ConfigError("config: model.ensemble_size must be >= 1");
  if (!(model.learning_rate > 0.0) || !std::isfinite(model.learning_rate))
    throw ConfigError("config: model.learning_rate must be positive");
  if (model.epochs < 1 || model.batch_size < 1)
    throw ConfigError("config: model epochs/batch_size must be >= 1");
  if (schedule.total_env_steps < 0)
    throw ConfigError("config: schedule.total_env_steps must be >= 0");
  if (schedule.eval_every < 1)
    throw ConfigError("config: schedule.eval_every must be >= 1");
  if (schedule.total_env_steps % schedule.eval_every != 0)
    throw ConfigError(
        "config: schedule.eval_every must divide total_env_steps");
  if (schedule.eval_episodes < 1)
    throw ConfigError("config: schedule.eval_episodes must be >= 1");
  if (schedule.train_every < 0)
    throw ConfigError("config: schedule.train_every must be >= 0");
  if (schedule.grad_steps_per_round < 1)
    throw ConfigError("config: schedule.grad_steps_per_round must be >= 1");
  if (seeds.empty()) throw ConfigError("config: seeds must be non-empty");
  if (is_planner_kind(agent) && reward_kind != RewardKind::kL2 &&
      model.ensemble_size < 2)
    throw ConfigError(
        "config: disagreement rewards need model.ensemble_size >= 2");
}

bool ExperimentConfig::normalize_for(AgentKind kind) const {
  return normalize.value_or(is_planner_kind(kind));
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["env"] = {{"name", cfg.env.env_name},
              {"sigma_init", cfg.env.sigma_init},
              {"sigma_action", cfg.env.sigma_action},
              {"horizon", cfg.env.horizon}};
  j["demos"] = {{"path", cfg.demos.path},
                {"count", cfg.demos.count},
                {"seed", cfg.demos.seed}};
  j["model"] = {{"hidden_width", cfg.model.hidden_width},
                {"depth", cfg.model.depth},
                {"activation", cfg.model.activation},
                {"ensemble_size", cfg.model.ensemble_size},
                {"learning_rate", cfg.model.learning_rate},
                {"epochs", cfg.model.epochs},
                {"batch_size", cfg.model.batch_size},
                {"wm_predict_delta", cfg.model.wm_predict_delta}};
  j["planner"] = {{"horizon", cfg.planner.horizon},
                  {"num_trajectories", cfg.planner.num_trajectories},
                  {"noise_sigma", cfg.planner.noise_sigma},
                  {"top_k", cfg.planner.top_k},
                  {"use_bc_prior", cfg.planner.use_bc_prior}};
  j["reward"] = {{"kind", to_string(cfg.reward_kind)},
                 {"eval_point", to_string(cfg.reward_eval_point)}};
  j["schedule"] = {{"total_env_steps", cfg.schedule.total_env_steps},
                   {"eval_every", cfg.schedule.eval_every},
                   {"eval_episodes", cfg.schedule.eval_episodes},
                   {"train_every", cfg.schedule.train_every},
                   {"grad_steps_per_round", cfg.schedule.grad_steps_per_round}};
  j["agent"] = to_string(cfg.agent);
  j["seeds"] = cfg.seeds;
  if (cfg.normalize)
    j["normalize"] = *cfg.normalize;
  else
    j["normalize"] = nullptr;
  j["out_dir"] = cfg.out_dir;
  return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    check_keys(j, "", {"env", "demos", "model", "planner", "reward", "schedule",
                       "agent", "seeds", "normalize", "out_dir"});
    if (j.contains("env")) {
      const auto& e = j.at("env");
      check_keys(e, "env", {"name", "sigma_init", "sigma_action", "horizon"});
      get_if_present(e, "name", cfg.env.env_name);
      get_if_present(e, "sigma_init", cfg.env.sigma_init);
      get_if_present(e, "sigma_action", cfg.env.sigma_action);
      get_if_present(e, "horizon", cfg.env.horizon);
    }
    if (j.contains("demos")) {
      const auto& d = j.at("demos");
      check_keys(d, "demos", {"path", "count", "seed"});
      get_if_present(d, "path", cfg.demos.path);
      get_if_present(d, "count", cfg.demos.count);
      get_if_present(d, "seed", cfg.demos.seed);
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      check_keys(m, "model",
                 {"hidden_width", "depth", "activation", "ensemble_size",
                  "learning_rate", "epochs", "batch_size",
                  "wm_predict_delta"});
      get_if_present(m, "hidden_width", cfg.model.hidden_width);
      get_if_present(m, "depth", cfg.model.depth);
      get_if_present(m, "activation", cfg.model.activation);
      get_if_present(m, "ensemble_size", cfg.model.ensemble_size);
      get_if_present(m, "learning_rate", cfg.model.learning_rate);
      get_if_present(m, "epochs", cfg.model.epochs);
      get_if_present(m, "batch_size", cfg.model.batch_size);
      get_if_present(m, "wm_predict_delta", cfg.model.wm_predict_delta);
    }
    if (j.contains("planner")) {
      const auto& p = j.at("planner");
      check_keys(p, "planner", {"horizon", "num_trajectories", "noise_sigma",
                                "top_k", "use_bc_prior"});
      get_if_present(p, "horizon", cfg.planner.horizon);
      get_if_present(p, "num_trajectories", cfg.planner.num_trajectories);
      get_if_present(p, "noise_sigma", cfg.planner.noise_sigma);
      get_if_present(p, "top_k", cfg.planner.top_k);
      get_if_present(p, "use_bc_prior", cfg.planner.use_bc_prior);
    }
    if (j.contains("reward")) {
      const auto& r = j.at("reward");
      check_keys(r, "reward", {"kind", "eval_point"});
      if (r.contains("kind"))
        cfg.reward_kind = reward_kind_from_string(r.at("kind").get<std::string>());
      if (r.contains("eval_point"))
        cfg.reward_eval_point =
            eval_point_from_string(r.at("eval_point").get<std::string>());
    }
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      check_keys(s, "schedule",
                 {"total_env_steps", "eval_every", "eval_episodes",
                  "train_every", "grad_steps_per_round"});
      get_if_present(s, "total_env_steps", cfg.schedule.total_env_steps);
      get_if_present(s, "eval_every", cfg.schedule.eval_every);
      get_if_present(s, "eval_episodes", cfg.schedule.eval_episodes);
      get_if_present(s, "train_every", cfg.schedule.train_every);
      get_if_present(s, "grad_steps_per_round",
                     cfg.schedule.grad_steps_per_round);
    }
    if (j.contains("agent"))
      cfg.agent = agent_kind_from_string(j.at("agent").get<std::string>());
    get_if_present(j, "seeds", cfg.seeds);
    if (j.contains("normalize") && !j.at("normalize").is_null())
      cfg.normalize = j.at("normalize").get<bool>();
    get_if_present(j, "out_dir", cfg.out_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::vector<Trajectory> load_or_generate_demos(const ExperimentConfig& cfg) {
  if (!cfg.demos.path.empty()) {
    if (!std::filesystem::exists(cfg.demos.path))
      throw IoError("demo file not found: " + cfg.demos.path);
    return load_trajectories_jsonl(cfg.demos.path);
  }
  return generate_demos(cfg.env, cfg.demos.count, cfg.demos.seed);
}

bool OfflineBundle::reward_available() const {
  return reward_kind != RewardKind::kMorel ||
         (wm.has_value() && wm->frozen.has_value());
}

RewardSpec OfflineBundle::reward_spec() const {
  RewardSpec spec;
  spec.kind = reward_kind;
  spec.eval_point = reward_eval_point;
  spec.expert_states = expert_states;
  spec.bc = &bc;
  spec.wm = wm.has_value() ? &*wm : nullptr;
  return spec;
}

namespace {

// shared by run_offline and load_bundle: the normalized expert views every
// consumer (reward support, replay expert set) is built from
void attach_expert_data(OfflineBundle& bundle,
                        const std::vector<Trajectory>& demos) {
  const Normalizer& norm = bundle.bc.normalizer;
  const std::vector<VecXd> states = all_states(demos);
  if (states.empty()) throw std::invalid_argument("bundle: no expert states");
  bundle.expert_states.resize(static_cast<long>(states.size()),
                              norm.state_dim());
  for (size_t i = 0; i < states.size(); ++i)
    bundle.expert_states.row(static_cast<long>(i)) =
        norm.normalize_state(states[i]).transpose();
  const std::vector<Transition> transitions = to_transitions(demos);
  bundle.expert_transitions.clear();
  bundle.expert_transitions.reserve(transitions.size());
  for (const Transition& t : transitions)
    bundle.expert_transitions.push_back(norm.normalize(t));
}

}  // namespace

OfflineBundle run_offline(const ExperimentConfig& cfg,
                          const std::vector<Trajectory>& demos,
                          std::uint64_t run_seed) {
  cfg.validate();
  if (demos.empty()) throw std::invalid_argument("run_offline: no demos");
  const int sd = static_cast<int>(demos.front().states.front().size());
  const int ad = static_cast<int>(demos.front().actions.front().size());
  const Normalizer norm = cfg.normalize_for(cfg.agent)
                              ? Normalizer::fit_from(demos)
                              : Normalizer::identity(sd, ad);
  const Activation act = activation_from_string(cfg.model.activation);
  TrainConfig tcfg;
  tcfg.epochs = cfg.model.epochs;
  tcfg.batch_size = cfg.model.batch_size;
  AdamConfig adam;
  adam.lr = cfg.model.learning_rate;

  OfflineBundle bundle;
  bundle.reward_kind = cfg.reward_kind;
  bundle.reward_eval_point = cfg.reward_eval_point;

  MlpSpec bc_spec;
  bc_spec.input_dim = sd;
  bc_spec.output_dim = ad;
  bc_spec.hidden_width = cfg.model.hidden_width;
  bc_spec.depth = cfg.model.depth;
  bc_spec.activation = act;
  const int bc_members =
      cfg.agent == AgentKind::kBcSingle ? 1 : cfg.model.ensemble_size;
  bundle.bc = train_bc(demos, bc_spec, bc_members, tcfg,
                       derive_seed(run_seed, "offline.bc", 0), norm, adam);

  if (is_planner_kind(cfg.agent)) {
    MlpSpec wm_spec = bc_spec;
    wm_spec.input_dim = sd + ad;
    wm_spec.output_dim = sd;
    bundle.wm = train_wm(demos, wm_spec, cfg.model.ensemble_size, tcfg,
                         derive_seed(run_seed, "offline.wm", 0), norm,
                         cfg.model.wm_predict_delta, adam);
    freeze_for_reward(*bundle.wm);
  }
  attach_expert_data(bundle, demos);
  return bundle;
}

void save_bundle(const std::string& dir, const OfflineBundle& bundle) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create bundle dir: " + dir);
  save_ensemble(dir + "/bc.json", bundle.bc.ensemble);
  if (bundle.wm.has_value()) {
    save_ensemble(dir + "/wm_live.json", bundle.wm->live);
    if (bundle.wm->frozen.has_value())
      save_ensemble(dir + "/wm_frozen.json", *bundle.wm->frozen);
  }
  const Normalizer& norm = bundle.bc.normalizer;
  nlohmann::json meta;
  meta["format_version"] = kCheckpointFormatVersion;
  meta["reward_kind"] = to_string(bundle.reward_kind);
  meta["eval_point"] = to_string(bundle.reward_eval_point);
  meta["has_wm"] = bundle.wm.has_value();
  meta["has_frozen"] = bundle.wm.has_value() && bundle.wm->frozen.has_value();
  meta["wm_predict_delta"] = bundle.wm.has_value() && bundle.wm->predict_delta;
  meta["normalizer"] = {{"state_mean", to_std(norm.state_mean())},
                        {"state_std", to_std(norm.state_std())},
                        {"action_mean", to_std(norm.action_mean())},
                        {"action_std", to_std(norm.action_std())}};
  write_json_file(dir + "/meta.json", meta);
}

OfflineBundle load_bundle(const std::string& dir,
                          const std::vector<Trajectory>& demos) {
  const nlohmann::json meta = read_json_file(dir + "/meta.json");
  if (meta.at("format_version").get<int>() != kCheckpointFormatVersion)
    throw IoError("bundle " + dir + ": unsupported format version");
  OfflineBundle bundle;
  bundle.reward_kind =
      reward_kind_from_string(meta.at("reward_kind").get<std::string>());
  bundle.reward_eval_point =
      eval_point_from_string(meta.at("eval_point").get<std::string>());
  const auto& n = meta.at("normalizer");
  const Normalizer norm = Normalizer::from_moments(
      from_std(n.at("state_mean").get<std::vector<double>>()),
      from_std(n.at("state_std").get<std::vector<double>>()),
      from_std(n.at("action_mean").get<std::vector<double>>()),
      from_std(n.at("action_std").get<std::vector<double>>()));
  bundle.bc.ensemble = load_ensemble(dir + "/bc.json");
  bundle.bc.normalizer = norm;
  if (meta.at("has_wm").get<bool>()) {
    DynamicsEnsemble wm;
    wm.live = load_ensemble(dir + "/wm_live.json");
    if (meta.at("has_frozen").get<bool>())
      wm.frozen = load_ensemble(dir + "/wm_frozen.json");
    wm.normalizer = norm;
    wm.predict_delta = meta.value("wm_predict_delta", false);
    bundle.wm = std::move(wm);
  }
  attach_expert_data(bundle, demos);
  return bundle;
}

namespace {

class PlannerPolicy final : public Policy {
 public:
  PlannerPolicy(const OfflineBundle& bundle, PlannerConfig cfg, bool use_prior)
      : bundle_(&bundle), cfg_(cfg), reward_(bundle.reward_spec()) {
    cfg_.use_bc_prior = use_prior;
  }

  void begin_episode(std::uint64_t policy_seed) override {
    episode_seed_ = policy_seed;
    step_ = 0;
  }

  VecXd act(const VecXd& norm_state) override {
    const BcEnsemble* prior = cfg_.use_bc_prior ? &bundle_->bc : nullptr;
    return select_action(cfg_, prior, *bundle_->wm, reward_, norm_state,
                         derive_seed(episode_seed_, "plan", step_++));
  }

 private:
  const OfflineBundle* bundle_;
  PlannerConfig cfg_;
  RewardSpec reward_;
  std::uint64_t episode_seed_ = 0;
  std::uint64_t step_ = 0;
};

class BcMeanPolicy final : public Policy {
 public:
  explicit BcMeanPolicy(const OfflineBundle& bundle) : bc_(&bundle.bc) {}

  void begin_episode(std::uint64_t) override {}

  VecXd act(const VecXd& norm_state) override {
    return predict_mean_normalized(*bc_, norm_state);
  }

 private:
  const BcEnsemble* bc_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(AgentKind kind, const OfflineBundle& bundle,
                                    const PlannerConfig& planner_cfg) {
  if (is_planner_kind(kind)) {
    if (!bundle.wm.has_value())
      throw std::invalid_argument(
          "make_policy: planner agent needs a dynamics ensemble");
    return std::make_unique<PlannerPolicy>(bundle, planner_cfg,
                                           kind == AgentKind::kPoir);
  }
  return std::make_unique<BcMeanPolicy>(bundle);
}

EvalResult evaluate(Policy& policy, const OfflineBundle& bundle,
                    const EnvConfig& env_cfg, int episodes,
                    std::uint64_t eval_seed) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
  const std::unique_ptr<Env> env = make_env(env_cfg);
  const Normalizer& norm = bundle.bc.normalizer;
  const bool reward_ok = bundle.reward_available();
  const RewardSpec spec = reward_ok ? bundle.reward_spec() : RewardSpec{};
  int successes = 0;
  double return_sum = 0.0;
  for (int e = 0; e < episodes; ++e) {
    VecXd s = env->reset(
        derive_seed(eval_seed, "eval.env", static_cast<std::uint64_t>(e)));
    policy.begin_episode(
        derive_seed(eval_seed, "eval.pol", static_cast<std::uint64_t>(e)));
    bool done = false;
    bool success = false;
    while (!done) {
      const VecXd ns = norm.normalize_state(s);
      const VecXd an = policy.act(ns);
      const VecXd ar = clip(norm.denormalize_action(an), -1.0, 1.0);
      const StepResult res = env->step(ar);
      if (reward_ok)
        return_sum += score_transition(spec, ns, norm.normalize_action(ar),
                                       norm.normalize_state(res.next_state));
      success = res.success;
      done = res.done;
      s = res.next_state;
    }
    if (success) ++successes;
  }
  EvalResult out;
  out.success_rate = static_cast<double>(successes) / episodes;
  out.mean_return = reward_ok ? return_sum / episodes : kNan;
  return out;
}

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string metrics_csv_header() {
  return "agent,sigma_init,sigma_action,seed,env_step,success_rate,"
         "mean_return,wall_seconds,mixture_ratio,row_kind";
}

std::string to_csv_row(const MetricsRow& row) {
  std::string out;
  out += row.agent;
  out += ',';
  out += fmt_double(row.sigma_init);
  out += ',';
  out += fmt_double(row.sigma_action);
  out += ',';
  out += std::to_string(row.seed);
  out += ',';
  out += std::to_string(row.env_step);
  out += ',';
  out += fmt_double(row.success_rate);
  out += ',';
  out += fmt_double(row.mean_return);
  out += ',';
  out += fmt_double(row.wall_seconds);
  out += ',';
  out += fmt_double(row.mixture_ratio);
  out += ',';
  out += row.row_kind;
  return out;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write metrics csv: " + path);
  f << metrics_csv_header() << '\n';
  for (const MetricsRow& row : rows) f << to_csv_row(row) << '\n';
  if (!f) throw IoError("error while writing metrics csv: " + path);
}

std::vector<MetricsRow> run_online(const ExperimentConfig& cfg,
                                   OfflineBundle& bundle,
                                   std::uint64_t run_seed) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto wall = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  const std::unique_ptr<Env> env = make_env(cfg.env);
  const Normalizer& norm = bundle.bc.normalizer;
  if (norm.state_dim() != env->state_dim() ||
      norm.action_dim() != env->action_dim())
    throw std::invalid_argument("run_online: bundle dims do not match env");
  const std::unique_ptr<Policy> collect =
      make_policy(cfg.agent, bundle, cfg.planner);
  // a separate policy instance for evaluation, so eval episodes never disturb
  // the collection policy's noise streams
  const std::unique_ptr<Policy> probe =
      make_policy(cfg.agent, bundle, cfg.planner);
  std::optional<ReplayBuffer> buffer;
  if (is_planner_kind(cfg.agent)) buffer.emplace(bundle.expert_transitions);
  Rng finetune_rng(derive_seed(run_seed, "online.finetune", 0));

  std::vector<MetricsRow> rows;
  const auto emit = [&](long env_step) {
    const long agent_before = buffer ? buffer->agent_size() : 0;
    const EvalResult r =
        evaluate(*probe, bundle, cfg.env, cfg.schedule.eval_episodes,
                 derive_seed(run_seed, "eval",
                             static_cast<std::uint64_t>(env_step)));
    if (buffer && buffer->agent_size() != agent_before)
      throw std::logic_error("run_online: evaluation touched the buffer");
    MetricsRow row;
    row.agent = to_string(cfg.agent);
    row.sigma_init = cfg.env.sigma_init;
    row.sigma_action = cfg.env.sigma_action;
    row.seed = run_seed;
    row.env_step = env_step;
    row.success_rate = r.success_rate;
    row.mean_return = r.mean_return;
    row.wall_seconds = wall();
    row.mixture_ratio = buffer ? buffer->mixture_ratio() : 0.0;
    row.row_kind = "eval";
    rows.push_back(std::move(row));
  };

  emit(0);
  std::uint64_t episode = 0;
  VecXd s = env->reset(derive_seed(run_seed, "online.env", episode));
  collect->begin_episode(derive_seed(run_seed, "online.pol", episode));
  for (long step = 1; step <= cfg.schedule.total_env_steps; ++step) {
    try {
      const VecXd ns = norm.normalize_state(s);
      const VecXd an = collect->act(ns);
      const VecXd ar = clip(norm.denormalize_action(an), -1.0, 1.0);
      const StepResult res = env->step(ar);
      if (buffer) {
        Transition t;
        t.state = ns;
        t.action = norm.normalize_action(ar);
        t.next_state = norm.normalize_state(res.next_state);
        buffer->push_agent(std::move(t));
      }
      s = res.next_state;
      if (res.done) {
        ++episode;
        s = env->reset(derive_seed(run_seed, "online.env", episode));
        collect->begin_episode(derive_seed(run_seed, "online.pol", episode));
      }
      if (buffer && cfg.schedule.train_every > 0 &&
          step % cfg.schedule.train_every == 0)
        fine_tune(*bundle.wm, *buffer, cfg.schedule.grad_steps_per_round,
                  cfg.model.batch_size, finetune_rng);
    } catch (const NumericError& e) {
      throw NumericError("online step " + std::to_string(step) + ": " +
                         e.what());
    }
    if (step % cfg.schedule.eval_every == 0) emit(step);
  }
  return rows;
}

void SweepAxis::validate() const {
  if (name != "sigma_init" && name != "sigma_action")
    throw ConfigError("sweep axis must be sigma_init or sigma_action, got '" +
                      name + "'");
  if (values.empty()) throw ConfigError("sweep axis has no values");
  for (double v : values)
    if (!std::isfinite(v) || v < 0.0)
      throw ConfigError("sweep axis values must be finite and >= 0");
}

SweepAxis default_sigma_init_axis() {
  return SweepAxis{"sigma_init", {0.02, 0.1, 0.2, 0.3, 0.4}};
}

SweepAxis default_sigma_action_axis() {
  return SweepAxis{"sigma_action", {0.0, 0.025, 0.05, 0.075, 0.1}};
}

std::vector<MetricsRow> run_sweep(const ExperimentConfig& base,
                                  const SweepAxis& axis,
                                  const std::vector<AgentKind>& agents,
                                  const std::vector<Trajectory>& demos) {
  base.validate();
  axis.validate();
  if (agents.empty()) throw ConfigError("run_sweep: empty agent list");
  std::vector<MetricsRow> rows;
  const auto failed_row = [&](AgentKind agent, std::uint64_t seed,
                              const EnvConfig& env) {
    MetricsRow row;
    row.agent = to_string(agent);
    row.sigma_init = env.sigma_init;
    row.sigma_action = env.sigma_action;
    row.seed = seed;
    row.env_step = -1;
    row.success_rate = kNan;
    row.mean_return = kNan;
    row.wall_seconds = 0.0;
    row.mixture_ratio = kNan;
    row.row_kind = "failed";
    return row;
  };
  for (const AgentKind agent : agents) {
    ExperimentConfig agent_cfg = base;
    agent_cfg.agent = agent;
    for (const std::uint64_t seed : base.seeds) {
      // one offline bundle per (agent, seed), shared across noise levels
      std::optional<OfflineBundle> trained;
      try {
        trained = run_offline(agent_cfg, demos, seed);
      } catch (const NumericError&) {
        for (const double level : axis.values) {
          EnvConfig env = agent_cfg.env;
          (axis.name == "sigma_init" ? env.sigma_init : env.sigma_action) =
              level;
          rows.push_back(failed_row(agent, seed, env));
        }
        continue;
      }
      for (const double level : axis.values) {
        ExperimentConfig cell_cfg = agent_cfg;
        (axis.name == "sigma_init" ? cell_cfg.env.sigma_init
                                   : cell_cfg.env.sigma_action) = level;
        // fresh copy per cell: one cell's fine-tuning must not leak into the
        // next noise level
        OfflineBundle bundle = *trained;
        try {
          std::vector<MetricsRow> cell = run_online(cell_cfg, bundle, seed);
          MetricsRow offline_row = cell.front();
          offline_row.row_kind = "final_offline";
          MetricsRow online_row = cell.back();
          online_row.row_kind = "final_online";
          rows.insert(rows.end(), cell.begin(), cell.end());
          rows.push_back(std::move(offline_row));
          rows.push_back(std::move(online_row));
        } catch (const NumericError&) {
          rows.push_back(failed_row(agent, seed, cell_cfg.env));
        }
      }
    }
  }
  return rows;
}

}  // namespace poir
