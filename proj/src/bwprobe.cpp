#include "qarc/bwprobe.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qarc/state.hpp"
#include "qarc/vqpn.hpp"

namespace qarc::bwprobe {

using nn::Graph;
using nn::Var;

BandwidthEstimator::BandwidthEstimator(ProbeConfig config) : config_(config) {
  std::mt19937_64 rng(config_.seed);
  conv_ = nn::Conv1d::create(model_, "conv", 3, 3, config_.channels, 1, rng);
  const std::size_t flat = (kProbeHistory - 3 + 1) * config_.channels;
  fc_ = nn::Dense::create(model_, "fc", flat, config_.hidden, rng);
  head_ = nn::Dense::create(model_, "head", config_.hidden, 1, rng);
  model_.set_lr(config_.lr);
}

Var BandwidthEstimator::forward(Graph& g, const ProbeSample& sample) {
  Tensor in({kProbeHistory, 3});
  for (std::size_t t = 0; t < kProbeHistory; ++t) {
    in.values[t * 3 + 0] = sample.send_mbps[t] / vqrl::kRateCeilMbps;
    in.values[t * 3 + 1] = sample.recv_mbps[t] / vqrl::kRateCeilMbps;
    in.values[t * 3 + 2] = std::clamp(sample.delay_grad_s[t], -1.0, 1.0);
  }
  Var x = g.relu(conv_.apply(g, model_, g.input(std::move(in))));
  x = g.relu(fc_.apply(g, model_, g.flatten(x)));
  // linear head, scaled back to Mbps
  return g.scale(head_.apply(g, model_, x), vqrl::kRateCeilMbps);
}

double BandwidthEstimator::predict(const ProbeSample& sample) {
  Graph g;
  return forward(g, sample).scalar();
}

std::vector<ProbeSample> make_probe_samples(const std::vector<trace::BandwidthTrace>& traces,
                                            const netsim::SimConfig& sim_config,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> send_dist(0.01, vqrl::kRateCeilMbps);
  std::vector<ProbeSample> samples;
  for (const trace::BandwidthTrace& tr : traces) {
    if (tr.size() <= kProbeHistory) continue;
    netsim::SimConfig cfg = sim_config;
    cfg.seed = rng();
    netsim::LinkSimulator sim(cfg);
    std::vector<double> send, recv, dgrad;
    for (const trace::TraceEntry& e : tr.entries) {
      const double s = send_dist(rng);
      const netsim::SlotReport rep = sim.step_slot(s, e.bandwidth_mbps);
      send.push_back(s);
      recv.push_back(rep.recv_rate_mbps);
      dgrad.push_back(rep.delay_gradient_s);
    }
    for (std::size_t t = kProbeHistory; t < tr.size(); ++t) {
      ProbeSample smp;
      for (std::size_t i = 0; i < kProbeHistory; ++i) {
        smp.send_mbps[i] = send[t - kProbeHistory + i];
        smp.recv_mbps[i] = recv[t - kProbeHistory + i];
        smp.delay_grad_s[i] = dgrad[t - kProbeHistory + i];
      }
      smp.target_mbps = tr.entries[t].bandwidth_mbps;
      samples.push_back(smp);
    }
  }
  return samples;
}

ProbeTrainReport train_probe(BandwidthEstimator& est,
                             const std::vector<ProbeSample>& train_set,
                             const std::vector<ProbeSample>& test_set,
                             std::size_t epochs, std::uint64_t shuffle_seed) {
  if (train_set.empty() || test_set.empty()) {
    throw std::invalid_argument("train_probe: insufficient data");
  }
  std::mt19937_64 rng(shuffle_seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  ProbeTrainReport report;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t idx : order) {
      const ProbeSample& s = train_set[idx];
      Graph g;
      Var pred = est.forward(g, s);
      Var loss = g.mse_l2_loss(pred, {s.target_mbps}, {}, 0.0);
      est.model().zero_grad();
      g.backward(loss);
      for (Parameter& p : est.model().params()) adam_step(p);
      total += loss.scalar();
    }
    report.final_train_loss = total / static_cast<double>(train_set.size());
  }
  report.epochs = epochs;
  report.heldout_smape_pct = eval_probe_smape(est, test_set);
  std::vector<double> forecast, actual;
  for (const ProbeSample& s : test_set) {
    forecast.push_back(s.recv_mbps.back());
    actual.push_back(s.target_mbps);
  }
  report.persistence_smape_pct = vqpn::smape(forecast, actual);
  return report;
}

double eval_probe_smape(BandwidthEstimator& est, const std::vector<ProbeSample>& samples) {
  std::vector<double> forecast, actual;
  for (const ProbeSample& s : samples) {
    forecast.push_back(est.predict(s));
    actual.push_back(s.target_mbps);
  }
  return vqpn::smape(forecast, actual);
}

}  // namespace qarc::bwprobe
