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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "poir/env.hpp"
#include "poir/errors.hpp"

namespace {

using poir::EnvConfig;
using poir::StepResult;
using poir::VecXd;

EnvConfig cfg_of(const std::string& name, double si, double sa) {
  EnvConfig c;
  c.env_name = name;
  c.sigma_init = si;
  c.sigma_action = sa;
  return c;
}

double expert_success_rate(const EnvConfig& cfg, int episodes, std::uint64_t seed) {
  const auto env = poir::make_env(cfg);
  int wins = 0;
  for (int e = 0; e < episodes; ++e) {
    VecXd s = env->reset(poir::derive_seed(seed, "eval", static_cast<std::uint64_t>(e)));
    bool done = false, success = false;
    while (!done) {
      const StepResult r = env->step(env->expert_action(s));
      s = r.next_state;
      done = r.done;
      success = r.success;
    }
    wins += success ? 1 : 0;
  }
  return static_cast<double>(wins) / episodes;
}

}  // namespace

TEST_CASE("scripted experts succeed at demo noise and stay closed-loop robust") {
  CHECK(expert_success_rate(cfg_of("point_reach", 0.02, 0.0), 200, 5) >= 0.95);
  CHECK(expert_success_rate(cfg_of("toy_lift", 0.02, 0.0), 200, 5) >= 0.95);
  // the expert reacts to its observed state, so heavy start noise barely
  // dents it (reference numbers, measured at 1.00)
  CHECK(expert_success_rate(cfg_of("point_reach", 0.4, 0.0), 100, 7) >= 0.9);
  CHECK(expert_success_rate(cfg_of("toy_lift", 0.4, 0.0), 100, 7) >= 0.9);
}

TEST_CASE("reset honors sigma_init and derives everything from the seed") {
  // zero jitter: start exactly at the nominal corner
  const auto env0 = poir::make_env(cfg_of("point_reach", 0.0, 0.0));
  const VecXd s0 = env0->reset(123);
  CHECK(s0[0] == -0.6);
  CHECK(s0[1] == -0.6);
  CHECK(s0[2] == 0.0);  // velocity starts at rest
  CHECK(s0[3] == 0.0);

  const auto lift0 = poir::make_env(cfg_of("toy_lift", 0.0, 0.0));
  const VecXd l0 = lift0->reset(9);
  CHECK(l0[0] == -0.35);
  CHECK(l0[2] == 0.5);
  CHECK(l0[3] == 1.0);  // aperture starts fully open

  // same seed, same start; different seed, different start
  const auto env = poir::make_env(cfg_of("point_reach", 0.02, 0.0));
  const VecXd a = env->reset(77);
  const VecXd b = env->reset(77);
  CHECK((a.array() == b.array()).all());
  const VecXd c = env->reset(78);
  CHECK_FALSE((a.array() == c.array()).all());
}

TEST_CASE("pre-clamp start jitter matches sigma_init within 5 percent") {
  for (const double sigma : {0.02, 0.4}) {
    const auto env = poir::make_env(cfg_of("point_reach", sigma, 0.0));
    double sum = 0.0, sum_sq = 0.0;
    long n = 0;
    for (int i = 0; i < 10000; ++i) {
      const VecXd p = env->sample_start_preclamp(static_cast<std::uint64_t>(i));
      for (int d = 0; d < 2; ++d) {
        const double centered = p[d] - (-0.6);
        sum += centered;
        sum_sq += centered * centered;
        ++n;
      }
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sum_sq / static_cast<double>(n) - mean * mean;
    const double std_hat = std::sqrt(var);
    CHECK(std_hat == doctest::Approx(sigma).epsilon(0.05));
  }
}

TEST_CASE("action noise propagates through the dynamics at the closed-form rate") {
  // from a fixed start with zero commanded action, the one-step position
  // delta is dt * accel_gain * noise, so its std is 0.1 * 0.2 * sigma_action
  const double sigma_action = 0.1;
  const auto env = poir::make_env(cfg_of("point_reach", 0.0, sigma_action));
  double sum = 0.0, sum_sq = 0.0;
  long n = 0;
  for (int i = 0; i < 10000; ++i) {
    env->reset(static_cast<std::uint64_t>(i));
    const VecXd next = env->step(VecXd::Zero(2)).next_state;
    for (int d = 0; d < 2; ++d) {
      const double delta = next[d] - (-0.6);
      sum += delta;
      sum_sq += delta * delta;
      ++n;
    }
  }
  const double mean = sum / static_cast<double>(n);
  const double std_hat = std::sqrt(sum_sq / static_cast<double>(n) - mean * mean);
  CHECK(std_hat == doctest::Approx(0.1 * 0.2 * sigma_action).epsilon(0.10));
}

TEST_CASE("noise-free stepping is bit-exact and clamped to the workspace") {
  for (const char* name : {"point_reach", "toy_lift"}) {
    const auto env1 = poir::make_env(cfg_of(name, 0.02, 0.0));
    const auto env2 = poir::make_env(cfg_of(name, 0.02, 0.0));
    VecXd s1 = env1->reset(42);
    VecXd s2 = env2->reset(42);
    CHECK((s1.array() == s2.array()).all());
    // drive hard into the lower corner: trajectories stay identical and in-box
    const VecXd push = VecXd::Constant(env1->action_dim(), -1.0);
    for (int t = 0; t < 60; ++t) {
      s1 = env1->step(push).next_state;
      s2 = env2->step(push).next_state;
      CHECK((s1.array() == s2.array()).all());
      CHECK(s1.minCoeff() >= -1.0);
      CHECK(s1.maxCoeff() <= 1.0);
    }
  }
}

TEST_CASE("zero action from rest leaves the point mass in place") {
  const auto env = poir::make_env(cfg_of("point_reach", 0.0, 0.0));
  const VecXd before = env->reset(1);
  const VecXd after = env->step(VecXd::Zero(2)).next_state;
  CHECK((after.array() == before.array()).all());

  // at the goal with zero velocity the expert commands a zero action
  VecXd at_goal(6);
  at_goal << 0.55, 0.55, 0.0, 0.0, 0.55, 0.55;
  CHECK(env->expert_action(at_goal).norm() == 0.0);
}

TEST_CASE("toy_lift grasp, transport, and success latching") {
  const auto env = poir::make_env(cfg_of("toy_lift", 0.0, 0.0));
  VecXd s = env->reset(3);
  bool done = false;
  int first_success_step = -1;
  int t = 0;
  bool flag_dropped_after_latch = false;
  bool success_at_done = false;
  while (!done) {
    const StepResult r = env->step(env->expert_action(s));
    s = r.next_state;
    done = r.done;
    ++t;
    if (r.success && first_success_step < 0) first_success_step = t;
    if (first_success_step >= 0 && !r.success) flag_dropped_after_latch = true;
    if (done) success_at_done = r.success;
  }
  CHECK(success_at_done);
  CHECK(first_success_step > 0);
  CHECK(first_success_step < 60);        // grasp-and-lift happens well within T
  CHECK_FALSE(flag_dropped_after_latch);  // success is sticky
  CHECK(s[6] > 0.2);                      // object held above the threshold
  const double dist = (s.segment(0, 3) - s.segment(4, 3)).norm();
  CHECK(dist < 0.05);                     // still grasped at the end
  CHECK(s[3] < 0.3);                      // fingers closed
}

TEST_CASE("an ungrasped object falls back to the table") {
  const auto env = poir::make_env(cfg_of("toy_lift", 0.0, 0.0));
  VecXd s = env->reset(11);
  // lift the object by running the expert until success, then fly away open
  bool done = false;
  while (!done) {
    const StepResult r = env->step(env->expert_action(s));
    s = r.next_state;
    if (r.success) break;
    done = r.done;
  }
  REQUIRE(s[6] > 0.2);
  VecXd release(4);
  release << 0.0, 0.0, 1.0, 1.0;  // open the fingers while moving up
  // the grasp holds until the aperture crosses its threshold (a few opening
  // steps), then the object starts falling while the gripper keeps rising
  double prev = s[6];
  bool started_falling = false;
  for (int i = 0; i < 8 && !started_falling; ++i) {
    s = env->step(release).next_state;
    started_falling = s[6] < prev;
    prev = s[6];
  }
  CHECK(started_falling);
  for (int i = 0; i < 40; ++i) {
    s = env->step(VecXd::Zero(4)).next_state;
  }
  CHECK(s[6] == 0.0);  // back on the table
}

TEST_CASE("generate_demos returns chained successful episodes deterministically") {
  EnvConfig cfg = cfg_of("point_reach", 0.4, 0.1);  // deployment noise ignored
  const auto demos = poir::generate_demos(cfg, 20, 99);
  REQUIRE(demos.size() == 20);
  for (const auto& tr : demos) {
    CHECK(tr.success);
    CHECK(tr.length() == 100);
    tr.validate();  // throws on broken state/next_state chaining
  }
  const auto again = poir::generate_demos(cfg, 20, 99);
  for (std::size_t i = 0; i < demos.size(); ++i) {
    CHECK(demos[i].episode_seed == again[i].episode_seed);
    for (std::size_t t = 0; t < demos[i].states.size(); ++t) {
      CHECK((demos[i].states[t].array() == again[i].states[t].array()).all());
    }
  }
}

TEST_CASE("env validation rejects bad configs and bad actions") {
  CHECK_THROWS_AS(poir::make_env(cfg_of("cartpole", 0.02, 0.0)), poir::ConfigError);
  EnvConfig bad = cfg_of("point_reach", -0.1, 0.0);
  CHECK_THROWS_AS(poir::make_env(bad), poir::ConfigError);
  bad = cfg_of("point_reach", 0.02, 0.0);
  bad.horizon = 0;
  CHECK_THROWS_AS(poir::make_env(bad), poir::ConfigError);

  const auto env = poir::make_env(cfg_of("point_reach", 0.02, 0.0));
  env->reset(1);
  CHECK_THROWS_AS(env->step(VecXd::Zero(3)), std::invalid_argument);
  VecXd nan_action = VecXd::Constant(2, std::nan(""));
  CHECK_THROWS_AS(env->step(nan_action), std::invalid_argument);
  CHECK_THROWS_AS(poir::generate_demos(cfg_of("toy_lift", 0.02, 0.0), 0, 1),
                  std::invalid_argument);
}
