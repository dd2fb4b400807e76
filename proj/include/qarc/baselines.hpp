#pragma once

#include "qarc/session.hpp"

namespace qarc::baselines {

class FixedBitratePolicy : public session::Policy {
 public:
  explicit FixedBitratePolicy(std::size_t index);
  std::size_t act(const vqrl::AgentState&, const netsim::SlotReport&) override;

 private:
  std::size_t index_;
};

// Ratchets up one level while loss stays below `low`, backs off one level once
// it reaches `high`, holds inside the hysteresis band.
class LossBasedPolicy : public session::Policy {
 public:
  explicit LossBasedPolicy(double low = 0.01, double high = 0.1);
  std::size_t act(const vqrl::AgentState&, const netsim::SlotReport& last) override;
  void reset() override;

 private:
  double low_, high_;
  std::size_t level_ = 0;
};

// Steps down when the delay gradient exceeds +epsilon, steps up when it is
// below -epsilon or the queue drained empty, otherwise holds.
class DelayBasedPolicy : public session::Policy {
 public:
  explicit DelayBasedPolicy(double epsilon_s = 0.005);
  std::size_t act(const vqrl::AgentState&, const netsim::SlotReport& last) override;
  void reset() override;

 private:
  double epsilon_s_;
  std::size_t level_ = 0;
};

// Chooses the largest candidate bitrate at most the chosen slot's bandwidth
// (known in advance); falls back to the lowest candidate when none fits.
std::size_t offline_optimal_action(double bandwidth_mbps);

// Simulates the bitrate-first oracle over the whole trace.
std::vector<session::SessionStep> offline_optimal_high_bitrate(
    const trace::BandwidthTrace& trace, const quality::QualityCurveSeries& curves,
    const netsim::SimConfig& config, const qoe::QoeWeights& weights);

}  // namespace qarc::baselines
