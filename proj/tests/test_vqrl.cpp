#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qarc/baselines.hpp"
#include "qarc/session.hpp"
#include "qarc/vqrl.hpp"

using namespace qarc;

namespace {

vqrl::NetConfig tiny_net() {
  vqrl::NetConfig net;
  net.channels = 6;
  net.merge = 8;
  net.seed = 4;
  return net;
}

vqrl::AgentState sample_state(std::uint64_t seed) {
  vqrl::HistoryBuffers buffers;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    buffers.push(u(rng), u(rng) * 1.5, u(rng) * 1.5, u(rng) * 0.1 - 0.05, u(rng) * 0.2);
  }
  return vqrl::build_state(buffers, {0.2, 0.4, 0.6, 0.7, 0.8});
}

}  // namespace

TEST_CASE("n-step targets recursion") {
  auto t0 = vqrl::n_step_targets({1.0, 2.0, 3.0}, 9.0, 0.0);
  CHECK(t0 == std::vector<double>{1.0, 2.0, 3.0});

  auto t1 = vqrl::n_step_targets({1.0, 1.0}, 2.0, 0.99);
  CHECK(t1[1] == doctest::Approx(2.98).epsilon(1e-12));
  CHECK(t1[0] == doctest::Approx(1.0 + 0.99 * 2.98).epsilon(1e-12));

  auto tz = vqrl::n_step_targets({0.0, 0.0, 0.0}, 0.0, 0.5);
  for (double v : tz) CHECK(v == 0.0);

  auto ts = vqrl::n_step_targets({1.0, 2.0, 4.0}, 8.0, 1.0);
  CHECK(ts == std::vector<double>{15.0, 14.0, 12.0});  // suffix sums plus bootstrap
}

TEST_CASE("advantage arithmetic") {
  CHECK(vqrl::advantage(3.0, 3.0) == 0.0);
  CHECK(vqrl::advantage(1.0 + 0.99 * 2.0, 2.5) == doctest::Approx(0.48).epsilon(1e-12));
  CHECK(vqrl::advantage(1.0, 2.0) < 0.0);
}

TEST_CASE("action selection") {
  std::mt19937_64 rng(1);
  CHECK(vqrl::select_action({0.0, 0.0, 1.0, 0.0, 0.0}, vqrl::ActionMode::kGreedy, rng) == 2);
  CHECK(vqrl::select_action({0.0, 0.0, 1.0, 0.0, 0.0}, vqrl::ActionMode::kSample, rng) == 2);
  CHECK(vqrl::select_action({0.3, 0.3, 0.3}, vqrl::ActionMode::kGreedy, rng) == 0);  // ties

  std::array<std::size_t, 5> counts{};
  for (int i = 0; i < 10000; ++i) {
    counts[vqrl::select_action({0.2, 0.2, 0.2, 0.2, 0.2}, vqrl::ActionMode::kSample, rng)]++;
  }
  for (std::size_t c : counts) {
    CHECK(double(c) / 10000.0 > 0.18);
    CHECK(double(c) / 10000.0 < 0.22);
  }
  CHECK_THROWS(vqrl::select_action({}, vqrl::ActionMode::kGreedy, rng));
}

TEST_CASE("policy outputs live on the simplex for every backbone") {
  for (auto backbone :
       {vqrl::Backbone::kConv1d, vqrl::Backbone::kDense, vqrl::Backbone::kRecurrent}) {
    vqrl::NetConfig net = tiny_net();
    net.backbone = backbone;
    vqrl::PolicyNet policy(net);
    auto probs = policy.action_probs(sample_state(3));
    REQUIRE(probs.size() == 5);
    double sum = 0.0;
    for (double p : probs) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS(vqrl::backbone_from_string("mlp"));
  vqrl::NetConfig bad = tiny_net();
  bad.seq_len = 11;
  CHECK_THROWS([&] { vqrl::PolicyNet p(bad); }());
}

TEST_CASE("a positive-advantage update raises the taken action's probability") {
  vqrl::PolicyNet policy(tiny_net());
  policy.model().set_lr(1e-2);
  vqrl::Experience exp;
  exp.state = sample_state(7);
  exp.action = 3;
  exp.advantage = 1.0;
  const double before = policy.action_probs(exp.state)[3];
  vqrl::policy_update(policy, {exp}, 0.0);
  CHECK(policy.action_probs(exp.state)[3] > before);
  CHECK_THROWS(vqrl::policy_update(policy, {}, 0.0));
}

TEST_CASE("zero advantage and zero entropy weight leave the policy unchanged") {
  vqrl::PolicyNet policy(tiny_net());
  auto before = policy.model().flat_values();
  vqrl::Experience exp;
  exp.state = sample_state(8);
  exp.action = 1;
  exp.advantage = 0.0;
  vqrl::policy_update(policy, {exp}, 0.0);
  CHECK(policy.model().flat_values() == before);
}

TEST_CASE("a large entropy weight spreads a peaked policy") {
  vqrl::PolicyNet policy(tiny_net());
  policy.model().set_lr(1e-2);
  auto state = sample_state(9);
  // sharpen the policy first
  for (int i = 0; i < 60; ++i) {
    vqrl::Experience exp;
    exp.state = state;
    exp.action = 0;
    exp.advantage = 1.0;
    vqrl::policy_update(policy, {exp}, 0.0);
  }
  const double before = ag::entropy_value(policy.action_probs(state));
  for (int i = 0; i < 10; ++i) {
    vqrl::Experience exp;
    exp.state = state;
    exp.action = 0;
    exp.advantage = 0.0;
    vqrl::policy_update(policy, {exp}, 50.0);
  }
  CHECK(ag::entropy_value(policy.action_probs(state)) > before);
}

TEST_CASE("value updates descend on a fixed target") {
  vqrl::ValueNet value(tiny_net());
  value.model().set_lr(1e-2);
  vqrl::Experience exp;
  exp.state = sample_state(11);
  exp.q_target = 1.5;
  double prev = std::abs(value.value(exp.state) - 1.5);
  double last = prev;
  for (int i = 0; i < 50; ++i) {
    vqrl::value_update(value, {exp});
    last = std::abs(value.value(exp.state) - 1.5);
  }
  CHECK(last < prev);
  CHECK(last < 0.1);
  CHECK_THROWS(vqrl::value_update(value, {}));
}

TEST_CASE("env session mirrors run_session slot for slot") {
  trace::BandwidthTrace tr;
  for (int i = 0; i < 25; ++i) tr.entries.push_back({double(i), 0.9 + 0.02 * (i % 5)});
  auto curves = quality::gen_quality_curves(quality::Profile::kHybrid, 25, 13);
  netsim::SimConfig sim;
  sim.seed = 77;
  const qoe::QoeWeights w = qoe::QoeWeights::baseline();

  baselines::FixedBitratePolicy policy(2);
  auto steps = session::run_session(policy, tr, curves, sim, w);

  vqrl::EnvSession env(&tr, &curves, sim, w);
  std::size_t slot = 0;
  while (!env.done()) {
    auto state = env.observe();
    CHECK(state.past_quality == steps[slot].state.past_quality);
    CHECK(state.recv_rate == steps[slot].state.recv_rate);
    const double reward = env.step(2);
    CHECK(reward == doctest::Approx(steps[slot].reward).epsilon(1e-15));
    ++slot;
  }
  CHECK(slot == steps.size());
  CHECK_THROWS(env.step(2));
  env.reset();
  CHECK(env.slot() == 0);
  CHECK_THROWS(env.step(9));
}

TEST_CASE("worker rollouts have the documented shape") {
  trace::BandwidthTrace tr;
  for (int i = 0; i < 8; ++i) tr.entries.push_back({double(i), 1.0});
  auto curves = quality::gen_quality_curves(quality::Profile::kStatic, 8, 2);
  vqrl::EnvSession env(&tr, &curves, {}, qoe::QoeWeights::baseline());
  vqrl::PolicyNet policy(tiny_net());
  vqrl::ValueNet value(tiny_net());
  std::mt19937_64 rng(1);

  auto one = vqrl::worker_rollout(env, policy, value, 1, 0.99,
                                  vqrl::ActionMode::kSample, rng);
  REQUIRE(one.size() == 1);
  CHECK_NOTHROW(one[0].state.validate());
  CHECK(!one[0].terminal);

  auto rest = vqrl::worker_rollout(env, policy, value, 20, 0.99,
                                   vqrl::ActionMode::kSample, rng);
  CHECK(rest.size() == 7);  // env exhausted mid-rollout
  CHECK(rest.back().terminal);
  for (const auto& e : rest) CHECK_NOTHROW(e.state.validate());
}

TEST_CASE("central store versions and zero-gradient neutrality") {
  vqrl::CentralStore store(tiny_net(), 1e-4, 1e-3);
  auto snap0 = store.snapshot();
  CHECK(snap0->version == 0);

  vqrl::GradientMsg msg;
  msg.policy_grads.assign(snap0->policy_values.size(), 0.0);
  msg.value_grads.assign(snap0->value_values.size(), 0.0);
  CHECK(store.apply(msg) == 1);
  auto snap1 = store.snapshot();
  CHECK(snap1->version == 1);
  CHECK(snap1->policy_values == snap0->policy_values);
  CHECK(snap1->value_values == snap0->value_values);

  vqrl::GradientMsg bad;
  bad.policy_grads = {1.0};
  bad.value_grads = msg.value_grads;
  CHECK_THROWS(store.apply(bad));
}

namespace {

vqrl::TrainerConfig tiny_trainer(std::size_t iterations, std::size_t workers) {
  vqrl::TrainerConfig cfg;
  cfg.net = tiny_net();
  cfg.n_step = 5;
  cfg.workers = workers;
  cfg.iterations = iterations;
  cfg.seed = 6;
  return cfg;
}

}  // namespace

TEST_CASE("single-worker training is reproducible") {
  trace::BandwidthTrace tr;
  for (int i = 0; i < 20; ++i) tr.entries.push_back({double(i), 1.0});
  auto curves = quality::gen_quality_curves(quality::Profile::kHybrid, 20, 3);
  std::vector<trace::BandwidthTrace> traces = {tr};
  std::vector<quality::QualityCurveSeries> series = {curves};

  auto run = [&] {
    vqrl::CentralStore store(tiny_net(), 1e-3, 1e-3);
    return vqrl::train_agent(store, tiny_trainer(12, 1), traces, series, {},
                             qoe::QoeWeights::baseline());
  };
  auto a = run();
  auto b = run();
  REQUIRE(a.log.size() == b.log.size());
  CHECK(a.final_version == 12);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].mean_reward == b.log[i].mean_reward);
    CHECK(a.log[i].policy_loss == b.log[i].policy_loss);
    CHECK(a.log[i].value_loss == b.log[i].value_loss);
  }

  std::ostringstream out;
  vqrl::write_training_log(out, a.log);
  CHECK(out.str().rfind("iter,mean_reward,entropy,value_loss,policy_loss,version\n", 0) == 0);
}

TEST_CASE("multi-worker training completes the requested iterations") {
  trace::BandwidthTrace tr;
  for (int i = 0; i < 15; ++i) tr.entries.push_back({double(i), 1.0});
  auto curves = quality::gen_quality_curves(quality::Profile::kStatic, 15, 4);
  std::vector<trace::BandwidthTrace> traces = {tr, tr};
  std::vector<quality::QualityCurveSeries> series = {curves, curves};
  traces[1].id = "b";

  vqrl::CentralStore store(tiny_net(), 1e-3, 1e-3);
  auto result = vqrl::train_agent(store, tiny_trainer(16, 4), traces, series, {},
                                  qoe::QoeWeights::baseline());
  CHECK(result.final_version == 16);
  CHECK(result.log.size() == 16);
}
