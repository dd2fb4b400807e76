#pragma once

#include <stdexcept>
#include <vector>

namespace qarc::qoe {

struct QoeWeights {
  double alpha = 0.2;  // bitrate penalty per Mbps
  double beta = 1.0;   // delay penalty per second
  double gamma = 1.0;  // smoothness penalty per quality unit

  static QoeWeights baseline() { return {0.2, 1.0, 1.0}; }
  static QoeWeights beta10() { return {0.2, 10.0, 1.0}; }
};

struct TrajectorySlot {
  double quality = 0.0;        // V_n in [0,1]
  double bitrate_mbps = 0.0;   // B_n
  double delay_s = 0.0;        // D_n, the slot's delay gradient
};

using SessionTrajectory = std::vector<TrajectorySlot>;

// sum_n (V_n - alpha*B_n - beta*D_n) - gamma * sum_{n>=1} |V_n - V_{n-1}|
double qoe_eval(const SessionTrajectory& traj, const QoeWeights& w);

// Per-slot decomposition that telescopes back to qoe_eval exactly. The first
// slot passes prev_quality = its own quality (zero smoothness term).
double per_step_reward(double prev_quality, double quality, double bitrate_mbps,
                       double delay_s, const QoeWeights& w);

}  // namespace qarc::qoe
