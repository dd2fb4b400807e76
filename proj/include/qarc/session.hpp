#pragma once

#include <functional>
#include <iosfwd>
#include <memory>

#include "qarc/netsim.hpp"
#include "qarc/qoe.hpp"
#include "qarc/quality.hpp"
#include "qarc/state.hpp"
#include "qarc/trace.hpp"

namespace qarc::session {

class Policy {
 public:
  virtual ~Policy() = default;
  // Pick a bitrate index for the upcoming slot. `last` is the previous slot's
  // report (zero-initialized before the first slot).
  virtual std::size_t act(const vqrl::AgentState& state,
                          const netsim::SlotReport& last) = 0;
  virtual void reset() {}
};

struct SessionStep {
  vqrl::AgentState state;   // observation the action was taken on
  std::size_t action = 0;
  netsim::SlotReport report;
  double quality = 0.0;     // delivered quality credited for the slot
  double reward = 0.0;
};

// Per-slot quality forecast fed into the agent state; defaults to the ground
// truth curve of the slot about to be sent.
using QualityPredictor =
    std::function<std::array<double, quality::kNumBitrates>(std::size_t slot)>;

// Drives a policy over a trace slot by slot. The chosen bitrate is the slot's
// sending rate; delivered quality is the curve value of the chosen bitrate
// scaled by (1 - loss_ratio); rewards come from qoe::per_step_reward.
std::vector<SessionStep> run_session(Policy& policy, const trace::BandwidthTrace& trace,
                                     const quality::QualityCurveSeries& curves,
                                     const netsim::SimConfig& config,
                                     const qoe::QoeWeights& weights,
                                     const QualityPredictor& predictor = {});

qoe::SessionTrajectory to_trajectory(const std::vector<SessionStep>& steps);

// CSV "slot,send_kbps,recv_kbps,mean_qdelay_s,p95_qdelay_s,delay_grad_s,loss,quality,reward"
void write_trajectory_csv(std::ostream& out, const std::vector<SessionStep>& steps);

}  // namespace qarc::session
