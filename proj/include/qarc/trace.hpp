#pragma once

#include <algorithm>
#include <iosfwd>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qarc::trace {

struct TraceEntry {
  double timestamp_s = 0.0;
  double bandwidth_mbps = 0.0;
};

struct BandwidthTrace {
  std::string id;
  std::vector<TraceEntry> entries;

  std::size_t size() const { return entries.size(); }
  void validate() const;  // strictly increasing timestamps, positive bandwidth
};

struct PacketRecord {
  double send_ts_ms = 0.0;
  double recv_ts_ms = 0.0;
  std::size_t size_bytes = 0;
};

struct MarkovTraceConfig {
  std::vector<double> state_mbps;
  std::vector<std::vector<double>> transition;  // row-stochastic
  double noise_std_mbps = 0.0;
  double slot_s = 1.0;
  std::size_t length = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Text format: "timestamp_s bandwidth_mbps" per line, '#' comments allowed.
BandwidthTrace parse_bandwidth_trace(std::istream& in, const std::string& id = "");
BandwidthTrace parse_bandwidth_trace_file(const std::string& path);
void serialize_bandwidth_trace(std::ostream& out, const BandwidthTrace& trace);
void write_bandwidth_trace_file(const std::string& path, const BandwidthTrace& trace);

// CSV "send_ts_ms,recv_ts_ms,size_bytes" with header.
std::vector<PacketRecord> parse_packet_csv(std::istream& in);
std::vector<PacketRecord> parse_packet_csv_file(const std::string& path);

// Raw per-window receive rates in Mbps; empty windows are 0.
// sum(rate_i) * period * 1e6 / 8 equals total received bytes exactly.
std::vector<double> packets_to_windows(const std::vector<PacketRecord>& records,
                                       double period_s);
// Windowed bandwidth with empty windows filled by linear interpolation
// between their non-empty neighbours (nearest value at the edges).
BandwidthTrace packets_to_bandwidth(const std::vector<PacketRecord>& records,
                                    double period_s, const std::string& id = "");

BandwidthTrace gen_markov_trace(const MarkovTraceConfig& config,
                                const std::string& id = "");

// Seeded shuffle split; outputs are disjoint and exhaustive.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_dataset(const std::vector<T>& items,
                                                        double train_fraction,
                                                        std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split_dataset: fraction must be in (0,1)");
  }
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(items.size())));
  std::pair<std::vector<T>, std::vector<T>> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.first : out.second).push_back(items[order[i]]);
  }
  return out;
}

}  // namespace qarc::trace
