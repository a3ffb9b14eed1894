#include <cstdio>
#include <fstream>

#include <doctest.h>

#include "poir/dataset.hpp"
#include "poir/errors.hpp"
#include "poir/replay.hpp"

using namespace poir;

namespace {

VecXd vec2(double a, double b) {
  VecXd v(2);
  v << a, b;
  return v;
}

VecXd vec1(double a) {
  VecXd v(1);
  v << a;
  return v;
}

Trajectory make_traj(double base, int steps, bool success, std::uint64_t seed) {
  Trajectory tr;
  for (int t = 0; t <= steps; ++t) tr.states.push_back(vec2(base + t, base - t));
  for (int t = 0; t < steps; ++t) tr.actions.push_back(vec1(0.1 * t - base));
  tr.success = success;
  tr.episode_seed = seed;
  return tr;
}

}  // namespace

TEST_CASE("trajectory validation and transition chaining") {
  auto tr = make_traj(1.0, 5, true, 9);
  tr.validate();
  const auto ts = tr.transitions();
  REQUIRE(ts.size() == 5);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i)
    CHECK(ts[i].next_state == ts[i + 1].state);
  CHECK(ts.front().state == tr.states.front());
  CHECK(ts.back().next_state == tr.states.back());

  SUBCASE("state/action count mismatch is rejected") {
    tr.states.pop_back();
    CHECK_THROWS_AS(tr.validate(), std::invalid_argument);
  }
  SUBCASE("ragged dims are rejected") {
    tr.states[2] = vec1(3.0);
    CHECK_THROWS_AS(tr.validate(), std::invalid_argument);
  }
  SUBCASE("empty episode is rejected") {
    Trajectory empty;
    empty.states.push_back(vec2(0, 0));
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
  }
}

TEST_CASE("jsonl round-trip preserves every value") {
  std::vector<Trajectory> trajs;
  trajs.push_back(make_traj(0.25, 4, true, 101));
  trajs.push_back(make_traj(-1.75, 7, false, 202));
  // awkward doubles survive the text round-trip
  trajs[0].states[1][0] = 0.1 + 0.2;
  trajs[0].actions[0][0] = 1.0 / 3.0;

  const std::string path = "trajs_roundtrip_test.jsonl";
  save_trajectories_jsonl(path, trajs);
  const auto loaded = load_trajectories_jsonl(path);
  std::remove(path.c_str());

  REQUIRE(loaded.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(loaded[i].success == trajs[i].success);
    CHECK(loaded[i].episode_seed == trajs[i].episode_seed);
    REQUIRE(loaded[i].states.size() == trajs[i].states.size());
    for (std::size_t t = 0; t < trajs[i].states.size(); ++t)
      CHECK(loaded[i].states[t] == trajs[i].states[t]);
    for (std::size_t t = 0; t < trajs[i].actions.size(); ++t)
      CHECK(loaded[i].actions[t] == trajs[i].actions[t]);
  }
}

TEST_CASE("malformed jsonl lines name the offending line") {
  const std::string path = "trajs_malformed_test.jsonl";
  {
    std::vector<Trajectory> good{make_traj(0.5, 3, true, 1)};
    save_trajectories_jsonl(path, good);
    std::ofstream app(path, std::ios::app);
    app << "{\"states\": [[0.1, 0.2]], \"actions\": []}\n";  // line 2: truncated record
    app << "not json at all\n";                              // line 3: parse error
  }
  try {
    load_trajectories_jsonl(path);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  {
    // drop line 2, keep the unparseable line 3 -> reported as line 3
    std::ifstream in(path);
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    in.close();
    std::ofstream out(path);
    out << l1 << '\n' << l1 << '\n' << l3 << '\n';
  }
  try {
    load_trajectories_jsonl(path);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_trajectories_jsonl("missing_file.jsonl"), IoError);
}

TEST_CASE("normalizer statistics match hand-computed moments") {
  // two episodes, states chosen so moments are easy to verify
  Trajectory a, b;
  a.states = {vec2(1, 10), vec2(3, 10), vec2(5, 10)};
  a.actions = {vec1(2), vec1(4)};
  a.success = true;
  b.states = {vec2(7, 10), vec2(9, 10), vec2(11, 10)};
  b.actions = {vec1(6), vec1(8)};
  b.success = true;
  const std::vector<Trajectory> demos{a, b};

  auto n = Normalizer::fit_from(demos);
  CHECK(n.frozen());
  // dim 0 states: {1,3,5,7,9,11} -> mean 6, var 35/3
  CHECK(n.state_mean()[0] == doctest::Approx(6.0));
  CHECK(n.state_std()[0] == doctest::Approx(std::sqrt(35.0 / 3.0)));
  // dim 1 constant -> std floored
  CHECK(n.state_mean()[1] == doctest::Approx(10.0));
  CHECK(n.state_std()[1] == doctest::Approx(1e-6));
  // actions {2,4,6,8} -> mean 5, var 5
  CHECK(n.action_mean()[0] == doctest::Approx(5.0));
  CHECK(n.action_std()[0] == doctest::Approx(std::sqrt(5.0)));

  SUBCASE("normalize/denormalize round-trip") {
    const VecXd s = vec2(4.2, 10.0);
    const VecXd z = n.normalize_state(s);
    CHECK(z[0] == doctest::Approx((4.2 - 6.0) / std::sqrt(35.0 / 3.0)));
    const VecXd back = n.denormalize_state(z);
    CHECK(back[0] == doctest::Approx(s[0]).epsilon(1e-12));
    const VecXd an = n.normalize_action(vec1(7.0));
    CHECK(n.denormalize_action(an)[0] == doctest::Approx(7.0).epsilon(1e-12));
  }

  SUBCASE("normalized expert data has zero mean and unit variance") {
    double sum = 0, sumsq = 0;
    long cnt = 0;
    for (const auto& tr : demos)
      for (const auto& s : tr.states) {
        const double z = n.normalize_state(s)[0];
        sum += z;
        sumsq += z * z;
        ++cnt;
      }
    CHECK(std::abs(sum / cnt) < 1e-12);
    CHECK(sumsq / cnt == doctest::Approx(1.0));
  }

  SUBCASE("fitting twice is rejected") {
    CHECK_THROWS_AS(n.fit(demos), std::invalid_argument);
  }
  SUBCASE("dim mismatch is rejected") {
    CHECK_THROWS_AS(n.normalize_state(vec1(1.0)), std::invalid_argument);
  }
  SUBCASE("use before fit is rejected") {
    Normalizer unfit;
    CHECK_THROWS_AS(unfit.normalize_state(vec2(0, 0)), std::invalid_argument);
  }
  SUBCASE("identity passes values through") {
    auto id = Normalizer::identity(2, 1);
    const VecXd s = vec2(-3.5, 2.25);
    CHECK(id.normalize_state(s) == s);
    CHECK(id.denormalize_action(vec1(0.75)) == vec1(0.75));
  }
  SUBCASE("transition normalization applies state stats to both endpoints") {
    const Transition t{vec2(1, 10), vec1(2), vec2(3, 10)};
    const Transition z = n.normalize(t);
    CHECK(z.state == n.normalize_state(t.state));
    CHECK(z.next_state == n.normalize_state(t.next_state));
    CHECK(z.action == n.normalize_action(t.action));
  }
}

namespace {

// expert transitions have state[0] >= 100, agent transitions state[0] < 0
std::vector<Transition> tagged_transitions(double base, int n) {
  std::vector<Transition> ts;
  for (int i = 0; i < n; ++i)
    ts.push_back(Transition{vec2(base + i, 0), vec1(0.5), vec2(base + i + 1, 0)});
  return ts;
}

int count_agent(const std::vector<const Transition*>& batch) {
  int c = 0;
  for (const auto* t : batch)
    if (t->state[0] < 0) ++c;
  return c;
}

}  // namespace

TEST_CASE("replay mixture schedule") {
  SUBCASE("closed-form ratio at milestone counters") {
    const long counters[] = {0, 99, 100, 250, 999, 1000, 10000};
    const double expect[] = {0.0, 0.0, 0.05, 0.10, 0.45, 0.5, 0.5};
    for (int i = 0; i < 7; ++i)
      CHECK(ReplayBuffer::mixture_ratio_at(counters[i]) ==
            doctest::Approx(expect[i]));
  }

  SUBCASE("batch composition follows the ramp and the counter advances once per call") {
    ReplayBuffer buf(tagged_transitions(100.0, 50));
    for (auto& t : tagged_transitions(-1000.0, 500)) buf.push_agent(t);

    Rng rng(4);
    const int batch = 64;
    // counter 0..99: all-expert batches
    for (int c = 0; c < 100; ++c) {
      CHECK(buf.gradient_step_counter() == c);
      const auto b = buf.sample_mixed(batch, rng);
      CHECK(count_agent(b) == 0);
    }
    // counter 100: ratio 0.05 -> ceil(3.2) = 4 agent samples
    auto b = buf.sample_mixed(batch, rng);
    CHECK(count_agent(b) == 4);
    // advance to counter 250: ratio 0.10 -> ceil(6.4) = 7
    while (buf.gradient_step_counter() < 250) buf.sample_mixed(batch, rng);
    b = buf.sample_mixed(batch, rng);
    CHECK(count_agent(b) == 7);
    // far along: ratio saturates at 0.5 -> 32 of 64
    while (buf.gradient_step_counter() < 1000) buf.sample_mixed(batch, rng);
    b = buf.sample_mixed(batch, rng);
    CHECK(count_agent(b) == 32);
    CHECK(buf.mixture_ratio() == doctest::Approx(0.5));
  }

  SUBCASE("agent quota backfills from expert when the agent set is small") {
    ReplayBuffer buf(tagged_transitions(100.0, 50));
    for (auto& t : tagged_transitions(-1000.0, 3)) buf.push_agent(t);
    Rng rng(5);
    while (buf.gradient_step_counter() < 1000) buf.sample_mixed(8, rng);
    const auto b = buf.sample_mixed(64, rng);  // quota 32, only 3 available
    CHECK(count_agent(b) == 3);
    CHECK(static_cast<int>(b.size()) == 64);
  }

  SUBCASE("sampled agent fraction stays at the saturated ratio over many batches") {
    ReplayBuffer buf(tagged_transitions(100.0, 1000));
    for (auto& t : tagged_transitions(-2000.0, 1000)) buf.push_agent(t);
    Rng rng(6);
    while (buf.gradient_step_counter() < 1000) buf.sample_mixed(4, rng);
    long agent_total = 0, total = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto b = buf.sample_mixed(64, rng);
      agent_total += count_agent(b);
      total += static_cast<long>(b.size());
    }
    const double frac = static_cast<double>(agent_total) / total;
    CHECK(frac >= 0.48);
    CHECK(frac <= 0.52);
  }

  SUBCASE("argument validation") {
    CHECK_THROWS_AS(ReplayBuffer({}), std::invalid_argument);
    ReplayBuffer buf(tagged_transitions(100.0, 5));
    Rng rng(7);
    CHECK_THROWS_AS(buf.sample_mixed(0, rng), std::invalid_argument);
    CHECK_THROWS_AS(buf.push_agent(Transition{vec1(0), vec1(0), vec1(0)}),
                    std::invalid_argument);
  }
}
