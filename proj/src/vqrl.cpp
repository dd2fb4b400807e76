#include "qarc/vqrl.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace qarc::vqrl {

using nn::Graph;
using nn::Var;

Backbone backbone_from_string(const std::string& s) {
  if (s == "conv1d") return Backbone::kConv1d;
  if (s == "dense") return Backbone::kDense;
  if (s == "recurrent") return Backbone::kRecurrent;
  throw std::invalid_argument("unknown backbone: " + s);
}

std::string to_string(Backbone b) {
  switch (b) {
    case Backbone::kConv1d: return "conv1d";
    case Backbone::kDense: return "dense";
    default: return "recurrent";
  }
}

namespace {
constexpr std::size_t kHistoryRows = 5;  // s, r, d, l, p
}

AgentNet::AgentNet(NetConfig config, std::size_t head_size, const std::string& prefix)
    : config_(config) {
  if (config_.seq_len < 2 || config_.seq_len > kHistoryLen) {
    throw std::invalid_argument("AgentNet: seq_len must be in [2, " +
                                std::to_string(kHistoryLen) + "]");
  }
  std::mt19937_64 rng(config_.seed);
  const std::size_t k = config_.seq_len;
  const std::size_t c = config_.channels;
  std::size_t hist_feat = 0;
  switch (config_.backbone) {
    case Backbone::kConv1d: {
      const std::size_t ker = std::min<std::size_t>(4, k);
      for (std::size_t row = 0; row < kHistoryRows; ++row) {
        banks_.push_back(nn::Conv1d::create(model_, prefix + ".bank" + std::to_string(row),
                                            ker, 1, c, 1, rng));
      }
      hist_feat = kHistoryRows * (k - ker + 1) * c;
      break;
    }
    case Backbone::kDense:
      dense_hist_ = nn::Dense::create(model_, prefix + ".hist", kHistoryRows * k, c, rng);
      hist_feat = c;
      break;
    case Backbone::kRecurrent:
      gru_ = nn::GruCell::create(model_, prefix + ".gru", kHistoryRows, c, rng);
      hist_feat = c;
      break;
  }
  v_path_ = nn::Dense::create(model_, prefix + ".v", quality::kNumBitrates, c, rng);
  f_path_ = nn::Dense::create(model_, prefix + ".f", kFftBins, c, rng);
  merge_ = nn::Dense::create(model_, prefix + ".merge", hist_feat + 2 * c, config_.merge, rng);
  head_ = nn::Dense::create(model_, prefix + ".head", config_.merge, head_size, rng);
}

Var AgentNet::history_path(Graph& g, const std::array<double, kHistoryLen>& row,
                           std::size_t bank) {
  const std::size_t k = config_.seq_len;
  Tensor in({k, 1});
  for (std::size_t i = 0; i < k; ++i) in.values[i] = row[kHistoryLen - k + i];
  return g.flatten(g.relu(banks_[bank].apply(g, model_, g.input(std::move(in)))));
}

Var AgentNet::forward(Graph& g, const AgentState& state) {
  const std::size_t k = config_.seq_len;
  const std::array<const std::array<double, kHistoryLen>*, kHistoryRows> rows = {
      &state.send_rate, &state.recv_rate, &state.delay_grad, &state.loss,
      &state.past_quality};
  Var hist;
  switch (config_.backbone) {
    case Backbone::kConv1d: {
      std::vector<Var> parts;
      for (std::size_t i = 0; i < kHistoryRows; ++i) {
        parts.push_back(history_path(g, *rows[i], i));
      }
      hist = g.concat(parts);
      break;
    }
    case Backbone::kDense: {
      std::vector<double> flat;
      flat.reserve(kHistoryRows * k);
      for (const auto* row : rows) {
        for (std::size_t i = kHistoryLen - k; i < kHistoryLen; ++i) {
          flat.push_back((*row)[i]);
        }
      }
      hist = g.relu(dense_hist_.apply(g, model_, g.input(std::move(flat))));
      break;
    }
    case Backbone::kRecurrent: {
      Var h = g.input(Tensor({config_.channels}));
      for (std::size_t t = kHistoryLen - k; t < kHistoryLen; ++t) {
        std::vector<double> x(kHistoryRows);
        for (std::size_t i = 0; i < kHistoryRows; ++i) x[i] = (*rows[i])[t];
        h = gru_.step(g, model_, g.input(std::move(x)), h);
      }
      hist = h;
      break;
    }
  }
  Var v = g.relu(v_path_.apply(
      g, model_,
      g.input(std::vector<double>(state.predicted_quality.begin(),
                                  state.predicted_quality.end()))));
  Var f = g.relu(f_path_.apply(
      g, model_, g.input(std::vector<double>(state.fft.begin(), state.fft.end()))));
  Var merged = g.relu(merge_.apply(g, model_, g.concat({hist, v, f})));
  return head_.apply(g, model_, merged);
}

std::vector<double> AgentNet::forward_values(const AgentState& state) {
  Graph g;
  return forward(g, state).values();
}

std::vector<double> PolicyNet::action_probs(const AgentState& state) {
  return ag::softmax_value(forward_values(state));
}

double ValueNet::value(const AgentState& state) { return forward_values(state)[0]; }

std::size_t select_action(const std::vector<double>& probs, ActionMode mode,
                          std::mt19937_64& rng) {
  if (probs.empty()) throw std::invalid_argument("select_action: empty distribution");
  if (mode == ActionMode::kGreedy) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
      if (probs[i] > probs[best]) best = i;
    }
    return best;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

std::vector<double> n_step_targets(const std::vector<double>& rewards, double bootstrap,
                                   double gamma) {
  std::vector<double> targets(rewards.size());
  double next = bootstrap;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    next = rewards[i] + gamma * next;
    targets[i] = next;
  }
  return targets;
}

namespace {

UpdateReport accumulate_policy_grads(PolicyNet& policy, const std::vector<Experience>& batch,
                                     double beta) {
  if (batch.empty()) throw std::invalid_argument("policy_update: empty batch");
  UpdateReport report;
  for (const Experience& exp : batch) {
    Graph g;
    Var probs = g.softmax(policy.forward(g, exp.state));
    Var logp = g.log(g.pick(probs, exp.action));
    Var ent = g.entropy(probs);
    // maximize A*log pi + beta*H  ==  minimize the negation
    Var loss = g.scale(g.add(g.scale(logp, exp.advantage), g.scale(ent, beta)), -1.0);
    g.backward(loss);
    report.policy_loss += loss.scalar();
    report.mean_entropy += ent.scalar();
  }
  report.mean_entropy /= static_cast<double>(batch.size());
  return report;
}

UpdateReport accumulate_value_grads(ValueNet& value_net, const std::vector<Experience>& batch) {
  if (batch.empty()) throw std::invalid_argument("value_update: empty batch");
  UpdateReport report;
  for (const Experience& exp : batch) {
    Graph g;
    Var v = value_net.forward(g, exp.state);
    Var err = g.sub(v, g.constant(exp.q_target));
    Var loss = g.sumsq(err);
    g.backward(loss);
    report.value_loss += loss.scalar();
  }
  return report;
}

}  // namespace

UpdateReport policy_update(PolicyNet& policy, const std::vector<Experience>& batch,
                           double beta) {
  policy.model().zero_grad();
  UpdateReport report = accumulate_policy_grads(policy, batch, beta);
  for (Parameter& p : policy.model().params()) adam_step(p);
  return report;
}

UpdateReport value_update(ValueNet& value_net, const std::vector<Experience>& batch) {
  value_net.model().zero_grad();
  UpdateReport report = accumulate_value_grads(value_net, batch);
  for (Parameter& p : value_net.model().params()) adam_step(p);
  return report;
}

EnvSession::EnvSession(const trace::BandwidthTrace* trace,
                       const quality::QualityCurveSeries* curves,
                       netsim::SimConfig sim_config, qoe::QoeWeights weights)
    : trace_(trace), curves_(curves), sim_config_(sim_config), weights_(weights) {
  reset();
}

void EnvSession::reset(std::uint64_t seed_offset) {
  netsim::SimConfig cfg = sim_config_;
  cfg.seed = sim_config_.seed + seed_offset;
  sim_ = std::make_unique<netsim::LinkSimulator>(cfg);
  buffers_ = HistoryBuffers{};
  slot_ = 0;
  prev_quality_ = 0.0;
  have_prev_ = false;
}

AgentState EnvSession::observe() const {
  return build_state(buffers_, curves_->slots[std::min(slot_, curves_->size() - 1)]);
}

bool EnvSession::done() const {
  return slot_ >= std::min(trace_->size(), curves_->size());
}

double EnvSession::step(std::size_t action) {
  if (done()) throw std::logic_error("EnvSession: step past end of trace");
  if (action >= quality::kNumBitrates) {
    throw std::out_of_range("EnvSession: action " + std::to_string(action));
  }
  const double send_mbps = quality::kBitratesMbps[action];
  const netsim::SlotReport rep =
      sim_->step_slot(send_mbps, trace_->entries[slot_].bandwidth_mbps);
  const double delivered = curves_->slots[slot_][action] * (1.0 - rep.loss_ratio);
  if (!have_prev_) {
    prev_quality_ = delivered;
    have_prev_ = true;
  }
  const double reward = qoe::per_step_reward(prev_quality_, delivered, send_mbps,
                                             rep.delay_gradient_s, weights_);
  prev_quality_ = delivered;
  buffers_.push(delivered, send_mbps, rep.recv_rate_mbps, rep.delay_gradient_s,
                rep.loss_ratio);
  ++slot_;
  return reward;
}

std::vector<Experience> worker_rollout(EnvSession& env, PolicyNet& policy,
                                       ValueNet& value_net, std::size_t rollout_len,
                                       double gamma, ActionMode mode,
                                       std::mt19937_64& rng) {
  std::vector<Experience> batch;
  std::vector<double> rewards;
  for (std::size_t i = 0; i < rollout_len && !env.done(); ++i) {
    Experience exp;
    exp.state = env.observe();
    exp.action = select_action(policy.action_probs(exp.state), mode, rng);
    exp.reward = env.step(exp.action);
    rewards.push_back(exp.reward);
    batch.push_back(std::move(exp));
  }
  if (batch.empty()) return batch;
  const bool terminal = env.done();
  batch.back().terminal = terminal;
  const double bootstrap = terminal ? 0.0 : value_net.value(env.observe());
  const std::vector<double> targets = n_step_targets(rewards, bootstrap, gamma);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    batch[i].q_target = targets[i];
    batch[i].advantage = advantage(targets[i], value_net.value(batch[i].state));
  }
  return batch;
}

CentralStore::CentralStore(NetConfig net_config, double lr_actor, double lr_critic)
    : policy_(net_config), value_(net_config) {
  policy_.model().set_lr(lr_actor);
  value_.model().set_lr(lr_critic);
  publish_locked();
}

void CentralStore::publish_locked() {
  auto snap = std::make_shared<ParamSnapshot>();
  snap->policy_values = policy_.model().flat_values();
  snap->value_values = value_.model().flat_values();
  snap->version = version_;
  snap_ = std::move(snap);
}

std::shared_ptr<const ParamSnapshot> CentralStore::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return snap_;
}

std::uint64_t CentralStore::apply(const GradientMsg& msg) {
  std::lock_guard<std::mutex> lock(mu_);
  policy_.model().adam_step_flat(msg.policy_grads);
  value_.model().adam_step_flat(msg.value_grads);
  ++version_;
  publish_locked();
  log_.push_back({static_cast<std::size_t>(version_), msg.mean_reward, msg.mean_entropy,
                  msg.value_loss, msg.policy_loss, version_});
  return version_;
}

std::vector<LogRow> CentralStore::take_log() {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<LogRow> out = std::move(log_);
  log_.clear();
  return out;
}

namespace {

struct WorkerContext {
  PolicyNet policy;
  ValueNet value;
  std::vector<EnvSession> envs;
  std::size_t env_idx = 0;
  std::mt19937_64 rng;
  std::uint64_t episode = 0;

  WorkerContext(const NetConfig& net, std::uint64_t seed)
      : policy(net), value(net), rng(seed) {}
};

void worker_iteration(WorkerContext& ctx, CentralStore& store, const TrainerConfig& config) {
  const auto snap = store.snapshot();
  ctx.policy.model().set_flat_values(snap->policy_values);
  ctx.value.model().set_flat_values(snap->value_values);

  EnvSession& env = ctx.envs[ctx.env_idx];
  if (env.done()) {
    ctx.env_idx = (ctx.env_idx + 1) % ctx.envs.size();
    ctx.envs[ctx.env_idx].reset(++ctx.episode);
  }
  EnvSession& active = ctx.envs[ctx.env_idx];
  std::vector<Experience> batch =
      worker_rollout(active, ctx.policy, ctx.value, config.n_step, config.gamma,
                     ActionMode::kSample, ctx.rng);
  if (batch.empty()) return;

  const double progress =
      std::min(1.0, static_cast<double>(snap->version) /
                        static_cast<double>(std::max<std::size_t>(1, config.iterations)));
  const double beta = config.entropy_beta_start +
                      (config.entropy_beta_end - config.entropy_beta_start) * progress;

  GradientMsg msg;
  ctx.policy.model().zero_grad();
  UpdateReport pol = accumulate_policy_grads(ctx.policy, batch, beta);
  msg.policy_grads = ctx.policy.model().take_flat_grads();
  ctx.value.model().zero_grad();
  UpdateReport val = accumulate_value_grads(ctx.value, batch);
  msg.value_grads = ctx.value.model().take_flat_grads();

  double reward_sum = 0.0;
  for (const Experience& e : batch) reward_sum += e.reward;
  msg.mean_reward = reward_sum / static_cast<double>(batch.size());
  msg.mean_entropy = pol.mean_entropy;
  msg.policy_loss = pol.policy_loss;
  msg.value_loss = val.value_loss;
  msg.snapshot_version = snap->version;
  store.apply(msg);
}

}  // namespace

TrainResult train_agent(CentralStore& store, const TrainerConfig& config,
                        const std::vector<trace::BandwidthTrace>& traces,
                        const std::vector<quality::QualityCurveSeries>& curves,
                        const netsim::SimConfig& sim_config,
                        const qoe::QoeWeights& weights) {
  if (traces.empty() || traces.size() != curves.size()) {
    throw std::invalid_argument("train_agent: need one quality series per trace");
  }
  auto make_context = [&](std::size_t worker_id) {
    auto ctx = std::make_unique<WorkerContext>(config.net,
                                               config.seed + 1000003 * (worker_id + 1));
    for (std::size_t i = 0; i < traces.size(); ++i) {
      netsim::SimConfig cfg = sim_config;
      cfg.seed = config.seed + worker_id * 7919 + i * 131;
      ctx->envs.emplace_back(&traces[i], &curves[i], cfg, weights);
    }
    ctx->env_idx = worker_id % ctx->envs.size();
    return ctx;
  };

  if (config.workers <= 1) {
    auto ctx = make_context(0);
    for (std::size_t iter = 0; iter < config.iterations; ++iter) {
      worker_iteration(*ctx, store, config);
    }
  } else {
    std::atomic<std::size_t> remaining{config.iterations};
    std::vector<std::thread> threads;
    threads.reserve(config.workers);
    for (std::size_t w = 0; w < config.workers; ++w) {
      threads.emplace_back([&, w] {
        auto ctx = make_context(w);
        while (true) {
          std::size_t left = remaining.load(std::memory_order_relaxed);
          while (left > 0 &&
                 !remaining.compare_exchange_weak(left, left - 1,
                                                  std::memory_order_relaxed)) {
          }
          if (left == 0) break;
          worker_iteration(*ctx, store, config);
        }
      });
    }
    for (std::thread& t : threads) t.join();
  }
  TrainResult result;
  result.log = store.take_log();
  result.final_version = store.snapshot()->version;
  return result;
}

void write_training_log(std::ostream& out, const std::vector<LogRow>& log) {
  out << "iter,mean_reward,entropy,value_loss,policy_loss,version\n";
  out.precision(17);
  for (const LogRow& r : log) {
    out << r.iter << ',' << r.mean_reward << ',' << r.entropy << ',' << r.value_loss
        << ',' << r.policy_loss << ',' << r.version << '\n';
  }
}

std::size_t NetPolicy::act(const AgentState& state, const netsim::SlotReport&) {
  return select_action(net_.action_probs(state), mode_, rng_);
}

}  // namespace qarc::vqrl
