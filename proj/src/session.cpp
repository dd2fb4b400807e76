#include "qarc/session.hpp"

#include <ostream>
#include <stdexcept>

namespace qarc::session {

std::vector<SessionStep> run_session(Policy& policy, const trace::BandwidthTrace& trace,
                                     const quality::QualityCurveSeries& curves,
                                     const netsim::SimConfig& config,
                                     const qoe::QoeWeights& weights,
                                     const QualityPredictor& predictor) {
  trace.validate();
  const std::size_t n = std::min(trace.size(), curves.size());
  if (n < 1) throw std::invalid_argument("run_session: empty trace or quality series");

  QualityPredictor predict = predictor;
  if (!predict) {
    predict = [&curves](std::size_t slot) { return curves.slots[slot]; };
  }

  netsim::LinkSimulator sim(config);
  vqrl::HistoryBuffers buffers;
  netsim::SlotReport last_report;
  policy.reset();

  std::vector<SessionStep> steps;
  steps.reserve(n);
  double prev_quality = 0.0;
  bool have_prev = false;
  for (std::size_t t = 0; t < n; ++t) {
    SessionStep step;
    step.state = vqrl::build_state(buffers, predict(t));
    step.action = policy.act(step.state, last_report);
    if (step.action >= quality::kNumBitrates) {
      throw std::out_of_range("run_session: policy returned action " +
                              std::to_string(step.action));
    }
    const double send_mbps = quality::kBitratesMbps[step.action];
    step.report = sim.step_slot(send_mbps, trace.entries[t].bandwidth_mbps);
    // loss-corrupted frames do not deliver the full curve quality
    step.quality = curves.slots[t][step.action] * (1.0 - step.report.loss_ratio);
    if (!have_prev) {
      prev_quality = step.quality;
      have_prev = true;
    }
    step.reward = qoe::per_step_reward(prev_quality, step.quality, send_mbps,
                                       step.report.delay_gradient_s, weights);
    prev_quality = step.quality;
    buffers.push(step.quality, send_mbps, step.report.recv_rate_mbps,
                 step.report.delay_gradient_s, step.report.loss_ratio);
    last_report = step.report;
    steps.push_back(std::move(step));
  }
  return steps;
}

qoe::SessionTrajectory to_trajectory(const std::vector<SessionStep>& steps) {
  qoe::SessionTrajectory traj;
  traj.reserve(steps.size());
  for (const SessionStep& s : steps) {
    traj.push_back({s.quality, quality::kBitratesMbps[s.action],
                    s.report.delay_gradient_s});
  }
  return traj;
}

void write_trajectory_csv(std::ostream& out, const std::vector<SessionStep>& steps) {
  out << "slot,send_kbps,recv_kbps,mean_qdelay_s,p95_qdelay_s,delay_grad_s,loss,quality,reward\n";
  out.precision(17);
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const SessionStep& s = steps[t];
    out << t << ',' << quality::kBitratesKbps[s.action] << ','
        << s.report.recv_rate_mbps * 1000.0 << ',' << s.report.mean_qdelay_s << ','
        << s.report.p95_qdelay_s << ',' << s.report.delay_gradient_s << ','
        << s.report.loss_ratio << ',' << s.quality << ',' << s.reward << '\n';
  }
}

}  // namespace qarc::session
