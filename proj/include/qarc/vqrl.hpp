#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <random>
#include <vector>

#include "qarc/nn.hpp"
#include "qarc/qoe.hpp"
#include "qarc/quality.hpp"
#include "qarc/session.hpp"
#include "qarc/state.hpp"
#include "qarc/trace.hpp"

namespace qarc::vqrl {

enum class Backbone { kConv1d, kDense, kRecurrent };

Backbone backbone_from_string(const std::string& s);
std::string to_string(Backbone b);

struct NetConfig {
  Backbone backbone = Backbone::kConv1d;
  std::size_t seq_len = kHistoryLen;  // k: history suffix fed to the net (<= kHistoryLen)
  std::size_t channels = 64;          // c: conv channels / feature width
  std::size_t merge = 64;             // merge layer width
  std::uint64_t seed = 5;
};

// Shared backbone for the policy and value networks: one conv1d bank per
// history row (s, r, d, l, p), dense paths for the quality prediction v and
// the FFT features f, a dense merge layer, and a task head (5 logits or a
// scalar value).
class AgentNet {
 public:
  AgentNet(NetConfig config, std::size_t head_size, const std::string& prefix);

  nn::Var forward(nn::Graph& g, const AgentState& state);
  std::vector<double> forward_values(const AgentState& state);

  nn::Model& model() { return model_; }
  const NetConfig& config() const { return config_; }

 private:
  nn::Var history_path(nn::Graph& g, const std::array<double, kHistoryLen>& row,
                       std::size_t bank);

  NetConfig config_;
  nn::Model model_;
  std::vector<nn::Conv1d> banks_;
  nn::GruCell gru_;          // recurrent backbone
  nn::Dense dense_hist_;     // dense backbone
  nn::Dense v_path_, f_path_;
  nn::Dense merge_, head_;
};

class PolicyNet : public AgentNet {
 public:
  explicit PolicyNet(NetConfig config)
      : AgentNet(config, quality::kNumBitrates, "pi") {}
  std::vector<double> action_probs(const AgentState& state);
};

class ValueNet : public AgentNet {
 public:
  explicit ValueNet(NetConfig config) : AgentNet(config, 1, "v") {}
  double value(const AgentState& state);
};

enum class ActionMode { kSample, kGreedy };

// Sample draws from `probs`; greedy takes the argmax with lowest-index ties.
std::size_t select_action(const std::vector<double>& probs, ActionMode mode,
                          std::mt19937_64& rng);

// target_t = r_t + gamma * target_{t+1}, seeded with the bootstrap value.
std::vector<double> n_step_targets(const std::vector<double>& rewards, double bootstrap,
                                   double gamma);

inline double advantage(double q_target, double value_estimate) {
  return q_target - value_estimate;
}

struct Experience {
  AgentState state;
  std::size_t action = 0;
  double reward = 0.0;
  double q_target = 0.0;    // n-step return
  double advantage = 0.0;
  bool terminal = false;
};

struct UpdateReport {
  double policy_loss = 0.0;   // -(log pi * A + beta * H), summed
  double value_loss = 0.0;    // squared error, summed
  double mean_entropy = 0.0;
};

// Accumulates grad(log pi(a|s)) * A + beta * grad H(pi(.|s)) over the batch and
// applies one Adam step; advantages are treated as constants.
UpdateReport policy_update(PolicyNet& policy, const std::vector<Experience>& batch,
                           double beta);
// One Adam step on sum_t (V(s_t) - target_t)^2.
UpdateReport value_update(ValueNet& value_net, const std::vector<Experience>& batch);

// Stepwise view of a streaming session; mirrors session::run_session slot for
// slot so trained policies see the same dynamics they are evaluated on.
class EnvSession {
 public:
  EnvSession(const trace::BandwidthTrace* trace, const quality::QualityCurveSeries* curves,
             netsim::SimConfig sim_config, qoe::QoeWeights weights);

  AgentState observe() const;
  // Returns the per-slot reward; advances one slot.
  double step(std::size_t action);
  bool done() const;
  void reset(std::uint64_t seed_offset = 0);
  std::size_t slot() const { return slot_; }

 private:
  const trace::BandwidthTrace* trace_;
  const quality::QualityCurveSeries* curves_;
  netsim::SimConfig sim_config_;
  qoe::QoeWeights weights_;
  std::unique_ptr<netsim::LinkSimulator> sim_;
  HistoryBuffers buffers_;
  std::size_t slot_ = 0;
  double prev_quality_ = 0.0;
  bool have_prev_ = false;
};

// Fixed-length rollout under the current policy parameters; ends early when
// the environment is exhausted (terminal batch).
std::vector<Experience> worker_rollout(EnvSession& env, PolicyNet& policy,
                                       ValueNet& value_net, std::size_t rollout_len,
                                       double gamma, ActionMode mode,
                                       std::mt19937_64& rng);

struct GradientMsg {
  std::vector<double> policy_grads;
  std::vector<double> value_grads;
  double mean_reward = 0.0;
  double mean_entropy = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  std::uint64_t snapshot_version = 0;
};

struct ParamSnapshot {
  std::vector<double> policy_values;
  std::vector<double> value_values;
  std::uint64_t version = 0;
};

struct LogRow {
  std::size_t iter = 0;
  double mean_reward = 0.0;
  double entropy = 0.0;
  double value_loss = 0.0;
  double policy_loss = 0.0;
  std::uint64_t version = 0;
};

// Parameter server: workers pull consistent snapshots and push gradient
// messages; apply() updates atomically with respect to snapshot(), so readers
// never observe a half-applied update. Stale gradients are accepted.
class CentralStore {
 public:
  CentralStore(NetConfig net_config, double lr_actor, double lr_critic);

  std::shared_ptr<const ParamSnapshot> snapshot() const;
  std::uint64_t apply(const GradientMsg& msg);  // returns the new version

  std::vector<LogRow> take_log();
  PolicyNet& policy() { return policy_; }
  ValueNet& value_net() { return value_; }

 private:
  void publish_locked();

  PolicyNet policy_;
  ValueNet value_;
  mutable std::mutex mu_;
  std::shared_ptr<const ParamSnapshot> snap_;
  std::uint64_t version_ = 0;
  std::vector<LogRow> log_;
};

struct TrainerConfig {
  NetConfig net;
  double gamma = 0.99;
  double entropy_beta_start = 0.5;
  double entropy_beta_end = 0.1;
  std::size_t n_step = 20;       // rollout length
  double lr_actor = 1e-4;
  double lr_critic = 1e-3;
  std::size_t workers = 8;
  std::size_t iterations = 5000;  // gradient applications in total
  std::uint64_t seed = 0;
};

struct TrainResult {
  std::vector<LogRow> log;
  std::uint64_t final_version = 0;
};

// Asynchronous A3C training over a corpus of (trace, curves) pairs. With
// workers == 1 the run is fully deterministic for a fixed seed.
TrainResult train_agent(CentralStore& store, const TrainerConfig& config,
                        const std::vector<trace::BandwidthTrace>& traces,
                        const std::vector<quality::QualityCurveSeries>& curves,
                        const netsim::SimConfig& sim_config,
                        const qoe::QoeWeights& weights);

// CSV "iter,mean_reward,entropy,value_loss,policy_loss,version"
void write_training_log(std::ostream& out, const std::vector<LogRow>& log);

// Greedy policy adapter for evaluation via session::run_session.
class NetPolicy : public session::Policy {
 public:
  NetPolicy(PolicyNet& net, ActionMode mode, std::uint64_t seed = 0)
      : net_(net), mode_(mode), rng_(seed) {}
  std::size_t act(const AgentState& state, const netsim::SlotReport&) override;

 private:
  PolicyNet& net_;
  ActionMode mode_;
  std::mt19937_64 rng_;
};

}  // namespace qarc::vqrl
