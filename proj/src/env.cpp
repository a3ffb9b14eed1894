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

#include "poir/env.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "poir/errors.hpp"

namespace poir {

namespace {

// nominal geometry: start and goal/object sit in opposite workspace corners
// so a mis-started policy has room to drift off the demo corridor
const double kReachStart[2] = {-0.3, -0.3};
const double kReachGoal[2] = {0.25, 0.25};
const double kLiftGripperStart[3] = {-0.35, -0.35, 0.5};
const double kLiftObjectStart[3] = {0.35, 0.35, 0.0};

VecXd clip_box(const VecXd& v) { return v.cwiseMax(-1.0).cwiseMin(1.0); }

void check_action(const VecXd& a, int dim, const char* who) {
  if (a.size() != dim) {
    throw std::invalid_argument(std::string(who) + ": action dim mismatch");
  }
  if (!a.allFinite()) {
    throw std::invalid_argument(std::string(who) + ": non-finite action");
  }
}

}  // namespace

void EnvConfig::validate() const {
  if (env_name != "point_reach" && env_name != "toy_lift") {
    throw ConfigError("unknown env '" + env_name + "' (want point_reach|toy_lift)");
  }
  if (!std::isfinite(sigma_init) || sigma_init < 0.0) {
    throw ConfigError("sigma_init must be finite and >= 0");
  }
  if (!std::isfinite(sigma_action) || sigma_action < 0.0) {
    throw ConfigError("sigma_action must be finite and >= 0");
  }
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
}

// ---------------------------------------------------------------- point_reach

PointReachEnv::PointReachEnv(EnvConfig cfg) : cfg_(std::move(cfg)), rng_(0) {
  cfg_.validate();
  pos_ = VecXd::Zero(2);
  vel_ = VecXd::Zero(2);
  goal_ = VecXd::Zero(2);
}

VecXd PointReachEnv::observe() const {
  VecXd s(6);
  s << pos_, vel_, goal_;
  return s;
}

VecXd PointReachEnv::sample_start_preclamp(std::uint64_t episode_seed) const {
  Rng rng(episode_seed);
  VecXd p(2);
  p << kReachStart[0], kReachStart[1];
  return p + cfg_.sigma_init * rng.gaussian_vec(2);
}

VecXd PointReachEnv::reset(std::uint64_t episode_seed) {
  rng_ = Rng(episode_seed);
  VecXd nominal(2);
  nominal << kReachStart[0], kReachStart[1];
  pos_ = clip_box(nominal + cfg_.sigma_init * rng_.gaussian_vec(2));
  vel_ = VecXd::Zero(2);
  VecXd goal_nominal(2);
  goal_nominal << kReachGoal[0], kReachGoal[1];
  goal_ = clip_box(goal_nominal + kGoalJitter * rng_.gaussian_vec(2));
  t_ = 0;
  return observe();
}

StepResult PointReachEnv::step(const VecXd& action) {
  check_action(action, 2, "point_reach.step");
  VecXd a = clip_box(action);
  if (cfg_.sigma_action > 0.0) {
    a = clip_box(a + cfg_.sigma_action * rng_.gaussian_vec(2));
  }
  vel_ = kVelDecay * vel_ + kAccelGain * a;
  pos_ = clip_box(pos_ + vel_ * kDt);
  ++t_;
  StepResult r;
  r.next_state = observe();
  r.done = t_ >= cfg_.horizon;
  r.success = (pos_ - goal_).norm() < kSuccessRadius;
  return r;
}

VecXd PointReachEnv::expert_action(const VecXd& state) const {
  if (state.size() != 6) {
    throw std::invalid_argument("point_reach.expert: state dim mismatch");
  }
  const VecXd pos = state.segment(0, 2);
  const VecXd vel = state.segment(2, 2);
  const VecXd goal = state.segment(4, 2);
  return clip_box(2.0 * (goal - pos) - 0.5 * vel);
}

// ------------------------------------------------------------------ toy_lift

ToyLiftEnv::ToyLiftEnv(EnvConfig cfg) : cfg_(std::move(cfg)), rng_(0) {
  cfg_.validate();
  gripper_ = VecXd::Zero(3);
  object_ = VecXd::Zero(3);
}

VecXd ToyLiftEnv::observe() const {
  VecXd s(7);
  s << gripper_, aperture_, object_;
  return s;
}

VecXd ToyLiftEnv::sample_start_preclamp(std::uint64_t episode_seed) const {
  Rng rng(episode_seed);
  VecXd g(3);
  g << kLiftGripperStart[0], kLiftGripperStart[1], kLiftGripperStart[2];
  return g + cfg_.sigma_init * rng.gaussian_vec(3);
}

VecXd ToyLiftEnv::reset(std::uint64_t episode_seed) {
  rng_ = Rng(episode_seed);
  VecXd g(3);
  g << kLiftGripperStart[0], kLiftGripperStart[1], kLiftGripperStart[2];
  gripper_ = clip_box(g + cfg_.sigma_init * rng_.gaussian_vec(3));
  aperture_ = 1.0;
  VecXd o(3);
  o << kLiftObjectStart[0], kLiftObjectStart[1], kLiftObjectStart[2];
  VecXd jitter = VecXd::Zero(3);
  jitter.head(2) = kObjectJitter * rng_.gaussian_vec(2);  // xy only
  object_ = clip_box(o + jitter);
  success_latch_ = false;
  t_ = 0;
  return observe();
}

StepResult ToyLiftEnv::step(const VecXd& action) {
  check_action(action, 4, "toy_lift.step");
  VecXd a = clip_box(action);
  if (cfg_.sigma_action > 0.0) {
    a = clip_box(a + cfg_.sigma_action * rng_.gaussian_vec(4));
  }
  // grasp status from the pre-move configuration decides whether the object
  // rides along with this move
  const bool grasped_pre = aperture_ < kGraspAperture &&
                           (gripper_ - object_).norm() < kGraspRadius;
  const VecXd gripper_before = gripper_;
  gripper_ = clip_box(gripper_ + a.head(3) * kMoveScale);
  aperture_ = clip(aperture_ + a[3] * kApertureScale, 0.0, 1.0);
  if (grasped_pre) {
    // track the realized (post-clamp) gripper motion so the pair never
    // separates at a workspace wall
    object_ = clip_box(object_ + (gripper_ - gripper_before));
  } else if (object_[2] > 0.0) {
    object_[2] = std::max(0.0, object_[2] - kGravityStep);
  }
  ++t_;
  const bool grasped_now = aperture_ < kGraspAperture &&
                           (gripper_ - object_).norm() < kGraspRadius;
  if (grasped_now && object_[2] > kLiftThreshold) success_latch_ = true;
  StepResult r;
  r.next_state = observe();
  r.done = t_ >= cfg_.horizon;
  r.success = success_latch_;
  return r;
}

VecXd ToyLiftEnv::expert_action(const VecXd& state) const {
  if (state.size() != 7) {
    throw std::invalid_argument("toy_lift.expert: state dim mismatch");
  }
  const VecXd gripper = state.segment(0, 3);
  const double aperture = state[3];
  const VecXd object = state.segment(4, 3);
  const VecXd delta = object - gripper;
  const double dist = delta.norm();
  const bool grasped = aperture < kGraspAperture && dist < kGraspRadius;

  VecXd a = VecXd::Zero(4);
  if (grasped) {
    // lift straight up until safely above the threshold, then hold
    if (object[2] <= 0.3) a[2] = 1.0;
    a[3] = -1.0;
  } else if (dist < 0.03) {
    // station-keep on the object while the fingers close
    a.head(3) = clip_box(delta / kMoveScale);
    a[3] = -1.0;
  } else {
    // approach at full speed with the gripper open
    a.head(3) = clip_box(delta / kMoveScale);
    a[3] = 1.0;
  }
  return a;
}

// ------------------------------------------------------------------- factory

std::unique_ptr<Env> make_env(const EnvConfig& cfg) {
  cfg.validate();
  if (cfg.env_name == "point_reach") return std::make_unique<PointReachEnv>(cfg);
  if (cfg.env_name == "toy_lift") return std::make_unique<ToyLiftEnv>(cfg);
  throw ConfigError("unknown env '" + cfg.env_name + "'");
}

std::vector<Trajectory> generate_demos(const EnvConfig& cfg, int count,
                                       std::uint64_t master_seed) {
  if (count < 1) throw std::invalid_argument("generate_demos: count must be >= 1");
  EnvConfig demo_cfg = cfg;
  demo_cfg.sigma_init = 0.02;  // demos always use the demo-noise contract
  demo_cfg.sigma_action = 0.0;
  const auto env = make_env(demo_cfg);

  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(count));
  long attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    const std::uint64_t ep_seed =
        derive_seed(master_seed, "demo.attempt", static_cast<std::uint64_t>(attempts));
    ++attempts;
    Trajectory tr;
    tr.episode_seed = ep_seed;
    VecXd s = env->reset(ep_seed);
    tr.states.push_back(s);
    bool done = false;
    bool success = false;
    while (!done) {
      const VecXd a = env->expert_action(s);
      const StepResult r = env->step(a);
      tr.actions.push_back(a);
      tr.states.push_back(r.next_state);
      s = r.next_state;
      done = r.done;
      success = r.success;
    }
    if (success) {
      tr.success = true;
      out.push_back(std::move(tr));
    }
    const long successes = static_cast<long>(out.size());
    if (attempts >= 20 && 2 * successes < attempts) {
      throw NumericError("generate_demos: expert success rate " +
                         std::to_string(successes) + "/" + std::to_string(attempts) +
                         " fell below 50% on " + demo_cfg.env_name);
    }
  }
  return out;
}

}  // namespace poir
