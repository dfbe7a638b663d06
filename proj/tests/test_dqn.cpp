#include <catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <set>
#include <vector>

#include "test_util.hpp"
#include "toy_mdp.hpp"
#include "urllc/dqn.hpp"
#include "urllc/scheduler.hpp"

using namespace urllc;
using Catch::Approx;
using testutil::ToyMdp;
using testutil::ToyTrainer;

TEST_CASE("greedy action selection with tie toward ACTIVE") {
  Rng rng(1);
  CHECK(select_action(2.0, 1.0, 0.0, rng) == Action::kActive);
  CHECK(select_action(1.0, 2.0, 0.0, rng) == Action::kInactive);
  CHECK(select_action(1.0, 1.0, 0.0, rng) == Action::kActive);
}

TEST_CASE("full exploration is a fair coin") {
  Rng rng(42);
  int active = 0;
  for (int i = 0; i < 10000; ++i) {
    if (select_action(5.0, -5.0, 1.0, rng) == Action::kActive) ++active;
  }
  CHECK(active >= 4700);
  CHECK(active <= 5300);
}

namespace {

Experience tagged_experience(double reward) {
  Experience e;
  e.reward = reward;
  e.state = std::make_shared<const Matd>(1, 1);
  e.next_state = e.state;
  e.terminal = true;
  return e;
}

}  // namespace

TEST_CASE("replay buffer evicts strictly FIFO") {
  ReplayBuffer buffer(5);
  for (int i = 0; i < 6; ++i) buffer.push(tagged_experience(i));
  CHECK(buffer.size() == 5);
  std::multiset<double> rewards;
  for (std::size_t i = 0; i < buffer.size(); ++i) rewards.insert(buffer.at(i).reward);
  CHECK(rewards.count(0.0) == 0);  // oldest gone
  CHECK(rewards.count(5.0) == 1);  // newest present
  CHECK(rewards == std::multiset<double>{1.0, 2.0, 3.0, 4.0, 5.0});
}

TEST_CASE("sampling a full-size batch returns each item exactly once") {
  ReplayBuffer buffer(32);
  for (int i = 0; i < 32; ++i) buffer.push(tagged_experience(i));
  Rng rng(7);
  const auto batch = buffer.sample(32, rng);
  std::set<double> seen;
  for (const auto* e : batch) seen.insert(e->reward);
  CHECK(seen.size() == 32);
}

TEST_CASE("sampling an underfull buffer signals not-ready") {
  ReplayBuffer buffer(100);
  buffer.push(tagged_experience(0));
  Rng rng(3);
  CHECK_FALSE(buffer.ready(2));
  CHECK_THROWS_AS(buffer.sample(2, rng), std::runtime_error);
}

TEST_CASE("replay sampling is uniform within 3 sigma") {
  ReplayBuffer buffer(100);
  for (int i = 0; i < 100; ++i) buffer.push(tagged_experience(i));
  Rng rng(11);
  std::vector<int> count(100, 0);
  const int samples = 10000;  // 1e5 item draws at batch 10
  for (int s = 0; s < samples; ++s) {
    for (const auto* e : buffer.sample(10, rng)) {
      count[static_cast<int>(e->reward)] += 1;
    }
  }
  // each draw hits an item with p = 0.1; 3 sigma around 1000 is about 90
  for (int i = 0; i < 100; ++i) {
    INFO("item " << i << " count " << count[i]);
    CHECK(count[i] >= 910);
    CHECK(count[i] <= 1090);
  }
}

namespace {

// Net whose outputs are exactly its head biases, regardless of input.
GcnParams bias_only_net(int in, double q_active, double q_inactive) {
  GcnParams p = GcnParams::zeros({in, 8, 2});
  p.b_out = {q_active, q_inactive};
  return p;
}

std::shared_ptr<const Matd> one_node_state(double value) {
  Matd m(1, 2);
  m(0, 0) = value;
  m(0, 1) = 1.0 - value;
  return std::make_shared<const Matd>(std::move(m));
}

}  // namespace

TEST_CASE("bellman target") {
  ConflictGraph g(1);
  const auto adj = normalize_adjacency(g);
  const GcnParams target = bias_only_net(2, 2.0, 1.0);  // max next Q = 2

  Experience e;
  e.state = one_node_state(1.0);
  e.next_state = one_node_state(0.0);
  e.reward = 1.0;

  SECTION("terminal keeps the raw reward") {
    e.terminal = true;
    CHECK(bellman_target(e, adj, target, 0.99) == Approx(1.0));
  }
  SECTION("bootstrap uses the target network maximum") {
    CHECK(bellman_target(e, adj, target, 0.99) == Approx(2.98).margin(1e-12));
  }
  SECTION("gamma zero reduces to the reward") {
    CHECK(bellman_target(e, adj, target, 0.0) == Approx(1.0));
  }
}

TEST_CASE("train step propagates not-ready and computes the scalar loss") {
  ConflictGraph g(1);
  const auto adj = normalize_adjacency(g);
  GcnDims dims{2, 16, 2};
  GcnParams params = testutil::random_params<double>(dims, 1);
  const GcnParams target = testutil::random_params<double>(dims, 2);
  AdamState adam = AdamState::init(params);
  AgentConfig cfg;
  cfg.batch = 1;
  Rng rng(5);

  ReplayBuffer buffer(16);
  CHECK_FALSE(train_step(buffer, params, target, adam, adj, cfg, rng).has_value());

  Experience e;
  e.state = one_node_state(1.0);
  e.next_state = one_node_state(0.0);
  e.link = 0;
  e.action = Action::kActive;
  e.reward = 0.5;
  buffer.push(e);

  // hand-computed target and prediction
  const auto next_q = forward(*e.next_state, adj, target).q;
  const double y = 0.5 + cfg.gamma * std::max(next_q(0, 0), next_q(0, 1));
  const double pred = forward(*e.state, adj, params).q(0, 0);

  const auto loss = train_step(buffer, params, target, adam, adj, cfg, rng);
  REQUIRE(loss.has_value());
  CHECK(*loss == Approx((pred - y) * (pred - y)).epsilon(1e-12));
}

TEST_CASE("a perfectly predicted batch gives zero loss and no parameter motion") {
  ConflictGraph g(1);
  const auto adj = normalize_adjacency(g);
  GcnParams params = testutil::random_params<double>({2, 16, 2}, 3);
  const GcnParams target = params;
  AdamState adam = AdamState::init(params);
  AgentConfig cfg;
  cfg.batch = 4;
  Rng rng(9);

  ReplayBuffer buffer(16);
  for (int i = 0; i < 4; ++i) {
    Experience e;
    e.state = one_node_state(i % 2 == 0 ? 1.0 : 0.25);
    e.next_state = e.state;
    e.action = i % 2 == 0 ? Action::kActive : Action::kInactive;
    e.terminal = true;
    // reward equals the current prediction, so the target is already met
    e.reward = forward(*e.state, adj, params).q(0, static_cast<int>(e.action));
    buffer.push(e);
  }

  const auto before = flatten_params(params);
  const auto loss = train_step(buffer, params, target, adam, adj, cfg, rng);
  REQUIRE(loss.has_value());
  CHECK(*loss == Approx(0.0).margin(1e-20));
  CHECK(flatten_params(params) == before);
  CHECK(adam.step == 1);
}

TEST_CASE("train step never mutates the target network") {
  ConflictGraph g(1);
  const auto adj = normalize_adjacency(g);
  GcnParams params = testutil::random_params<double>({2, 16, 2}, 4);
  GcnParams target = testutil::random_params<double>({2, 16, 2}, 5);
  const auto target_before = flatten_params(target);
  AdamState adam = AdamState::init(params);
  AgentConfig cfg;
  cfg.batch = 2;
  Rng rng(13);

  ReplayBuffer buffer(8);
  for (int i = 0; i < 4; ++i) {
    Experience e;
    e.state = one_node_state(0.3 * i);
    e.next_state = one_node_state(0.3 * i + 0.1);
    e.action = Action::kActive;
    e.reward = 1.0;
    buffer.push(e);
  }
  for (int i = 0; i < 5; ++i) train_step(buffer, params, target, adam, adj, cfg, rng);
  CHECK(flatten_params(target) == target_before);
}

TEST_CASE("target sync is a hard copy on the interval") {
  GcnParams params = testutil::random_params<double>({2, 8, 2}, 6);
  GcnParams target = testutil::random_params<double>({2, 8, 2}, 7);

  sync_target(params, target, 99, 100);
  CHECK(flatten_params(target) != flatten_params(params));
  sync_target(params, target, 100, 100);
  CHECK(flatten_params(target) == flatten_params(params));

  // after another online change the copies diverge until the next boundary
  params.b_out[0] += 1.0;
  sync_target(params, target, 101, 100);
  CHECK(flatten_params(target) != flatten_params(params));

  // K = 1 keeps them glued
  sync_target(params, target, 7, 1);
  CHECK(flatten_params(target) == flatten_params(params));
}

TEST_CASE("toy MDP converges to the value-iteration optimum") {
  ToyTrainer trainer(0);
  int steps = 0;
  while (steps < 5000 && trainer.q_error() >= 0.05) {
    trainer.run(100);
    steps += 100;
  }
  INFO("converged after about " << steps << " steps, error " << trainer.q_error());
  CHECK(trainer.q_error() < 0.05);
}

TEST_CASE("toy MDP loss trends down over 500 steps") {
  ToyTrainer trainer(1);
  trainer.run(500);
  REQUIRE(trainer.losses.size() >= 100);
  const std::size_t window = 50;
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    first += trainer.losses[i];
    last += trainer.losses[trainer.losses.size() - window + i];
  }
  INFO("first-window " << first / window << " last-window " << last / window);
  CHECK(last <= first);
}

TEST_CASE("training is bit-deterministic per seed") {
  ToyTrainer a(3);
  ToyTrainer b(3);
  a.run(300);
  b.run(300);
  CHECK(flatten_params(a.params) == flatten_params(b.params));

  ToyTrainer c(4);
  c.run(300);
  CHECK(flatten_params(a.params) != flatten_params(c.params));
}
