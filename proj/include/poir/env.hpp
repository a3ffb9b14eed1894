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

#ifndef POIR_ENV_HPP_
#define POIR_ENV_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "poir/dataset.hpp"
#include "poir/types.hpp"

namespace poir {

// fixed-horizon continuous-control toy tasks with scripted experts.  the two
// noise knobs realize the distribution-mismatch study: sigma_init perturbs
// the agent's start position at reset, sigma_action corrupts every executed
// action.  demos are always collected at the demo defaults; deployment runs
// raise the knobs.
struct EnvConfig {
  std::string env_name = "point_reach";  // point_reach | toy_lift
  double sigma_init = 0.02;
  double sigma_action = 0.0;
  int horizon = 100;

  void validate() const;  // throws ConfigError
};

struct StepResult {
  VecXd next_state;
  bool done = false;
  bool success = false;
};

// single-threaded episode state machine.  reset seeds a per-episode rng that
// drives both the start jitter and any action noise; everything else is
// deterministic.
class Env {
 public:
  virtual ~Env() = default;

  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual const EnvConfig& config() const = 0;

  virtual VecXd reset(std::uint64_t episode_seed) = 0;
  // expects a finite action; clips to [-1,1], adds N(0, sigma_action^2)
  // noise (clipped again), advances one step.  done after `horizon` steps.
  virtual StepResult step(const VecXd& action) = 0;

  // stateless scripted expert, a pure function of the observed state
  virtual VecXd expert_action(const VecXd& state) const = 0;

  // the start-position sample before workspace clamping (jitter statistics
  // are specified pre-clamp)
  virtual VecXd sample_start_preclamp(std::uint64_t episode_seed) const = 0;
};

// 6-d state [pos(2), vel(2), goal(2)], 2-d action: damped point mass driven
// toward a fixed goal.  success: within 0.05 of the goal at the final step.
class PointReachEnv final : public Env {
 public:
  static constexpr double kDt = 0.1;
  static constexpr double kVelDecay = 0.8;
  static constexpr double kAccelGain = 0.2;
  static constexpr double kSuccessRadius = 0.05;
  static constexpr double kGoalJitter = 0.02;  // fixed, never scaled

  explicit PointReachEnv(EnvConfig cfg);

  int state_dim() const override { return 6; }
  int action_dim() const override { return 2; }
  const EnvConfig& config() const override { return cfg_; }

  VecXd reset(std::uint64_t episode_seed) override;
  StepResult step(const VecXd& action) override;
  VecXd expert_action(const VecXd& state) const override;
  VecXd sample_start_preclamp(std::uint64_t episode_seed) const override;

 private:
  VecXd observe() const;

  EnvConfig cfg_;
  Rng rng_;
  VecXd pos_, vel_, goal_;
  int t_ = 0;
};

// 7-d state [gripper(3), aperture, object(3)], 4-d action [dx, dy, dz,
// open/close]: reach the object, close the gripper, lift.  the object
// follows the gripper while grasped (aperture < 0.3 and within 0.05),
// otherwise it falls back to the table.  success latches once the object is
// held above 0.2.
class ToyLiftEnv final : public Env {
 public:
  static constexpr double kMoveScale = 0.05;
  static constexpr double kApertureScale = 0.1;
  static constexpr double kGraspAperture = 0.3;
  static constexpr double kGraspRadius = 0.05;
  static constexpr double kGravityStep = 0.02;
  static constexpr double kLiftThreshold = 0.2;
  static constexpr double kObjectJitter = 0.02;  // xy only, never scaled

  explicit ToyLiftEnv(EnvConfig cfg);

  int state_dim() const override { return 7; }
  int action_dim() const override { return 4; }
  const EnvConfig& config() const override { return cfg_; }

  VecXd reset(std::uint64_t episode_seed) override;
  StepResult step(const VecXd& action) override;
  VecXd expert_action(const VecXd& state) const override;
  VecXd sample_start_preclamp(std::uint64_t episode_seed) const override;

 private:
  VecXd observe() const;

  EnvConfig cfg_;
  Rng rng_;
  VecXd gripper_, object_;
  double aperture_ = 1.0;
  bool success_latch_ = false;
  int t_ = 0;
};

// factory keyed on cfg.env_name; throws ConfigError for unknown names
std::unique_ptr<Env> make_env(const EnvConfig& cfg);

// runs the scripted expert until `count` successful episodes are collected,
// always at the demo defaults (sigma_init 0.02, sigma_action 0) regardless
// of cfg's deployment noise.  attempt seeds derive from master_seed, failed
// attempts are resampled.  aborts with NumericError if the expert success
// rate drops below 50% after 20 attempts.
std::vector<Trajectory> generate_demos(const EnvConfig& cfg, int count,
                                       std::uint64_t master_seed);

}  // namespace poir

#endif  // POIR_ENV_HPP_
