#include "qarc/qoe.hpp"

#include <cmath>

#include "qarc/baselines.hpp"

namespace qarc::qoe {

double qoe_eval(const SessionTrajectory& traj, const QoeWeights& w) {
  if (traj.empty()) throw std::invalid_argument("qoe_eval: empty trajectory");
  double total = 0.0;
  for (const TrajectorySlot& s : traj) {
    total += s.quality - w.alpha * s.bitrate_mbps - w.beta * s.delay_s;
  }
  for (std::size_t n = 1; n < traj.size(); ++n) {
    total -= w.gamma * std::abs(traj[n].quality - traj[n - 1].quality);
  }
  return total;
}

double per_step_reward(double prev_quality, double quality, double bitrate_mbps,
                       double delay_s, const QoeWeights& w) {
  return quality - w.alpha * bitrate_mbps - w.beta * delay_s -
         w.gamma * std::abs(quality - prev_quality);
}

}  // namespace qarc::qoe

namespace qarc::baselines {

FixedBitratePolicy::FixedBitratePolicy(std::size_t index) : index_(index) {
  if (index >= quality::kNumBitrates) {
    throw std::out_of_range("FixedBitratePolicy: index " + std::to_string(index));
  }
}

std::size_t FixedBitratePolicy::act(const vqrl::AgentState&, const netsim::SlotReport&) {
  return index_;
}

LossBasedPolicy::LossBasedPolicy(double low, double high) : low_(low), high_(high) {}

void LossBasedPolicy::reset() { level_ = 0; }

std::size_t LossBasedPolicy::act(const vqrl::AgentState&, const netsim::SlotReport& last) {
  if (last.loss_ratio >= high_) {
    if (level_ > 0) --level_;
  } else if (last.loss_ratio <= low_) {
    if (level_ + 1 < quality::kNumBitrates) ++level_;
  }
  return level_;
}

DelayBasedPolicy::DelayBasedPolicy(double epsilon_s) : epsilon_s_(epsilon_s) {}

void DelayBasedPolicy::reset() { level_ = 0; }

std::size_t DelayBasedPolicy::act(const vqrl::AgentState&, const netsim::SlotReport& last) {
  const bool queue_empty = last.mean_qdelay_s <= 0.0;
  if (last.delay_gradient_s > epsilon_s_) {
    if (level_ > 0) --level_;
  } else if (last.delay_gradient_s < -epsilon_s_ || queue_empty) {
    if (level_ + 1 < quality::kNumBitrates) ++level_;
  }
  return level_;
}

std::size_t offline_optimal_action(double bandwidth_mbps) {
  std::size_t best = 0;  // lowest candidate as fallback
  for (std::size_t i = 0; i < quality::kNumBitrates; ++i) {
    if (quality::kBitratesMbps[i] <= bandwidth_mbps) best = i;
  }
  return best;
}

namespace {

class OfflineOptimalPolicy : public session::Policy {
 public:
  explicit OfflineOptimalPolicy(const trace::BandwidthTrace& trace) : trace_(trace) {}
  std::size_t act(const vqrl::AgentState&, const netsim::SlotReport&) override {
    return offline_optimal_action(trace_.entries[slot_++].bandwidth_mbps);
  }
  void reset() override { slot_ = 0; }

 private:
  const trace::BandwidthTrace& trace_;
  std::size_t slot_ = 0;
};

}  // namespace

std::vector<session::SessionStep> offline_optimal_high_bitrate(
    const trace::BandwidthTrace& trace, const quality::QualityCurveSeries& curves,
    const netsim::SimConfig& config, const qoe::QoeWeights& weights) {
  OfflineOptimalPolicy policy(trace);
  return session::run_session(policy, trace, curves, config, weights);
}

}  // namespace qarc::baselines
