#include "qarc/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qarc::netsim {

double delay_gradient(double prev_mean_delay_s, double this_mean_delay_s) {
  return this_mean_delay_s - prev_mean_delay_s;
}

std::vector<double> fft_magnitudes(const std::vector<double>& sequence) {
  const std::size_t k = sequence.size();
  if (k < 2) throw std::invalid_argument("fft_magnitudes: need at least 2 samples");
  for (double v : sequence) {
    if (!std::isfinite(v)) throw std::invalid_argument("fft_magnitudes: non-finite input");
  }
  std::vector<double> mags(k / 2 + 1);
  for (std::size_t j = 0; j < mags.size(); ++j) {
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < k; ++n) {
      const double ang = -2.0 * M_PI * static_cast<double>(j) * static_cast<double>(n) /
                         static_cast<double>(k);
      re += sequence[n] * std::cos(ang);
      im += sequence[n] * std::sin(ang);
    }
    mags[j] = std::sqrt(re * re + im * im) / static_cast<double>(k);
  }
  return mags;
}

LinkSimulator::LinkSimulator(SimConfig config) : config_(config), rng_(config.seed) {
  if (config_.slot_s <= 0.0 || config_.packet_size_bytes == 0) {
    throw std::invalid_argument("LinkSimulator: invalid config");
  }
}

void LinkSimulator::reset() {
  queue_ = QueueState{};
  rng_.seed(config_.seed);
  prev_mean_delay_s_ = 0.0;
  have_prev_ = false;
}

std::size_t LinkSimulator::capacity_for(double bandwidth_mbps) const {
  if (config_.queue_capacity > 0) return config_.queue_capacity;
  const double pkts_per_s =
      bandwidth_mbps * 1e6 / (8.0 * static_cast<double>(config_.packet_size_bytes));
  return std::max<std::size_t>(10, static_cast<std::size_t>(std::llround(0.5 * pkts_per_s)));
}

SlotReport LinkSimulator::step_slot(double send_rate_mbps, double bandwidth_mbps) {
  if (send_rate_mbps < 0.0 || bandwidth_mbps <= 0.0) {
    throw std::invalid_argument("step_slot: send_rate >= 0 and bandwidth > 0 required");
  }
  const double pkt_bits = 8.0 * static_cast<double>(config_.packet_size_bytes);
  const double lambda = send_rate_mbps * 1e6 / pkt_bits;
  const double mu = bandwidth_mbps * 1e6 / pkt_bits;
  const std::size_t capacity = capacity_for(bandwidth_mbps);
  const double slot_end = queue_.clock_s + config_.slot_s;

  std::exponential_distribution<double> arr_gap(lambda > 0.0 ? lambda : 1.0);
  std::exponential_distribution<double> dep_gap(mu);
  const double inf = std::numeric_limits<double>::infinity();

  double next_arrival = lambda > 0.0 ? queue_.clock_s + arr_gap(rng_) : inf;
  double next_departure = queue_.clock_s + dep_gap(rng_);

  queue_.dropped_count = 0;
  std::size_t arrivals = 0;
  std::size_t dequeued = 0;
  std::vector<double> delays;

  while (std::min(next_arrival, next_departure) < slot_end) {
    if (next_arrival <= next_departure) {
      ++arrivals;
      if (queue_.enqueued.size() < capacity) {
        queue_.enqueued.push_back(next_arrival);
      } else {
        ++queue_.dropped_count;
      }
      next_arrival += arr_gap(rng_);
    } else {
      // a service opportunity; idles away if the queue is empty
      if (!queue_.enqueued.empty()) {
        delays.push_back(next_departure - queue_.enqueued.front());
        queue_.enqueued.pop_front();
        ++dequeued;
      }
      next_departure += dep_gap(rng_);
    }
  }
  queue_.clock_s = slot_end;

  SlotReport report;
  report.send_rate_mbps = send_rate_mbps;
  report.recv_rate_mbps =
      static_cast<double>(dequeued) * pkt_bits / config_.slot_s / 1e6;
  if (!delays.empty()) {
    double sum = 0.0;
    for (double d : delays) sum += d;
    report.mean_qdelay_s = sum / static_cast<double>(delays.size());
    std::sort(delays.begin(), delays.end());
    const auto idx = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(delays.size()))) - 1;
    report.p95_qdelay_s = delays[idx];
  }
  report.loss_ratio = arrivals > 0
                          ? static_cast<double>(queue_.dropped_count) /
                                static_cast<double>(arrivals)
                          : 0.0;
  report.delay_gradient_s =
      delay_gradient(have_prev_ ? prev_mean_delay_s_ : 0.0, report.mean_qdelay_s);
  prev_mean_delay_s_ = report.mean_qdelay_s;
  have_prev_ = true;
  return report;
}

}  // namespace qarc::netsim
