#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "qarc/trace.hpp"

namespace qarc::netsim {

struct SimConfig {
  double slot_s = 1.0;
  std::size_t packet_size_bytes = 1500;
  // 0 means "derive per slot": max(10, round(0.5 s of packets at slot bandwidth))
  std::size_t queue_capacity = 0;
  std::uint64_t seed = 0;
};

struct QueueState {
  std::deque<double> enqueued;  // enqueue timestamps, FIFO
  std::size_t dropped_count = 0;  // within the current slot
  double clock_s = 0.0;
};

struct SlotReport {
  double send_rate_mbps = 0.0;
  double recv_rate_mbps = 0.0;
  double mean_qdelay_s = 0.0;
  double p95_qdelay_s = 0.0;
  double delay_gradient_s = 0.0;
  double loss_ratio = 0.0;
};

// Difference of mean per-slot queuing delays; clock-offset free since it only
// ever subtracts delays.
double delay_gradient(double prev_mean_delay_s, double this_mean_delay_s);

// Magnitudes of the k-point DFT, bins 0..floor(k/2), each divided by k.
std::vector<double> fft_magnitudes(const std::vector<double>& sequence);

// One slot of the Fig.-5 style queue: Poisson arrivals at the sending rate,
// Poisson service opportunities at the link bandwidth, merged in time order.
// Arrivals beyond capacity are dropped and counted in loss_ratio.
class LinkSimulator {
 public:
  explicit LinkSimulator(SimConfig config);

  SlotReport step_slot(double send_rate_mbps, double bandwidth_mbps);
  void reset();

  const QueueState& queue() const { return queue_; }
  const SimConfig& config() const { return config_; }
  std::size_t capacity_for(double bandwidth_mbps) const;

 private:
  SimConfig config_;
  QueueState queue_;
  std::mt19937_64 rng_;
  double prev_mean_delay_s_ = 0.0;
  bool have_prev_ = false;
};

}  // namespace qarc::netsim
