#include "qarc/trace.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace qarc::trace {

void BandwidthTrace::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].bandwidth_mbps <= 0.0) {
      throw ParseError("trace " + id + ": non-positive bandwidth at entry " +
                       std::to_string(i));
    }
    if (i > 0 && entries[i].timestamp_s <= entries[i - 1].timestamp_s) {
      throw ParseError("trace " + id + ": non-increasing timestamp at entry " +
                       std::to_string(i));
    }
  }
}

void MarkovTraceConfig::validate() const {
  if (state_mbps.empty() || transition.size() != state_mbps.size()) {
    throw std::invalid_argument("markov config: need one transition row per state");
  }
  for (double s : state_mbps) {
    if (s <= 0.0) throw std::invalid_argument("markov config: states must be positive");
  }
  for (const auto& row : transition) {
    if (row.size() != state_mbps.size()) {
      throw std::invalid_argument("markov config: transition matrix must be square");
    }
    double sum = 0.0;
    for (double p : row) {
      if (p < 0.0) throw std::invalid_argument("markov config: negative transition probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("markov config: transition row does not sum to 1");
    }
  }
}

BandwidthTrace parse_bandwidth_trace(std::istream& in, const std::string& id) {
  BandwidthTrace trace;
  trace.id = id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double ts, bw;
    if (!(ls >> ts)) continue;  // blank or comment-only line
    if (!(ls >> bw)) {
      throw ParseError("trace " + id + ": malformed line " + std::to_string(line_no));
    }
    if (bw <= 0.0) {
      throw ParseError("trace " + id + ": non-positive bandwidth at line " +
                       std::to_string(line_no));
    }
    if (!trace.entries.empty() && ts <= trace.entries.back().timestamp_s) {
      throw ParseError("trace " + id + ": non-increasing timestamp at line " +
                       std::to_string(line_no));
    }
    trace.entries.push_back({ts, bw});
  }
  return trace;
}

BandwidthTrace parse_bandwidth_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file " + path);
  return parse_bandwidth_trace(in, path);
}

void serialize_bandwidth_trace(std::ostream& out, const BandwidthTrace& trace) {
  out.precision(17);
  for (const TraceEntry& e : trace.entries) {
    out << e.timestamp_s << ' ' << e.bandwidth_mbps << '\n';
  }
}

void write_bandwidth_trace_file(const std::string& path, const BandwidthTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open trace file " + path + " for writing");
  serialize_bandwidth_trace(out, trace);
}

std::vector<PacketRecord> parse_packet_csv(std::istream& in) {
  std::vector<PacketRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) continue;  // header
    if (line.empty()) continue;
    std::istringstream ls(line);
    PacketRecord r;
    char c1, c2;
    long long size;
    if (!(ls >> r.send_ts_ms >> c1 >> r.recv_ts_ms >> c2 >> size) || c1 != ',' ||
        c2 != ',' || size <= 0) {
      throw ParseError("packet csv: malformed line " + std::to_string(line_no));
    }
    if (r.recv_ts_ms < r.send_ts_ms) {
      throw ParseError("packet csv: recv before send at line " + std::to_string(line_no));
    }
    r.size_bytes = static_cast<std::size_t>(size);
    records.push_back(r);
  }
  return records;
}

std::vector<PacketRecord> parse_packet_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open packet file " + path);
  return parse_packet_csv(in);
}

std::vector<double> packets_to_windows(const std::vector<PacketRecord>& records,
                                       double period_s) {
  if (period_s <= 0.0) throw std::invalid_argument("packets_to_windows: period must be positive");
  if (records.empty()) return {};
  const double t0 = records.front().recv_ts_ms;
  const double t1 = records.back().recv_ts_ms;
  const auto n_windows =
      static_cast<std::size_t>(std::floor((t1 - t0) / (period_s * 1000.0))) + 1;
  std::vector<double> bytes(n_windows, 0.0);
  for (const PacketRecord& r : records) {
    if (r.recv_ts_ms < t0) throw std::invalid_argument("packets_to_windows: records not sorted by recv_ts");
    auto w = static_cast<std::size_t>((r.recv_ts_ms - t0) / (period_s * 1000.0));
    if (w >= n_windows) w = n_windows - 1;
    bytes[w] += static_cast<double>(r.size_bytes);
  }
  std::vector<double> mbps(n_windows);
  for (std::size_t i = 0; i < n_windows; ++i) {
    mbps[i] = bytes[i] * 8.0 / period_s / 1e6;
  }
  return mbps;
}

BandwidthTrace packets_to_bandwidth(const std::vector<PacketRecord>& records,
                                    double period_s, const std::string& id) {
  std::vector<double> mbps = packets_to_windows(records, period_s);
  // fill empty windows from their non-empty neighbours
  std::vector<std::size_t> filled;
  for (std::size_t i = 0; i < mbps.size(); ++i) {
    if (mbps[i] > 0.0) filled.push_back(i);
  }
  BandwidthTrace trace;
  trace.id = id;
  if (filled.empty()) return trace;
  for (std::size_t i = 0; i < mbps.size(); ++i) {
    double v = mbps[i];
    if (v <= 0.0) {
      auto next = std::lower_bound(filled.begin(), filled.end(), i);
      if (next == filled.begin()) {
        v = mbps[*next];
      } else if (next == filled.end()) {
        v = mbps[*(next - 1)];
      } else {
        const std::size_t lo = *(next - 1), hi = *next;
        const double t = static_cast<double>(i - lo) / static_cast<double>(hi - lo);
        v = mbps[lo] + t * (mbps[hi] - mbps[lo]);
      }
    }
    trace.entries.push_back({static_cast<double>(i) * period_s, v});
  }
  trace.validate();
  return trace;
}

BandwidthTrace gen_markov_trace(const MarkovTraceConfig& config, const std::string& id) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, config.noise_std_mbps);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t state = 0;
  BandwidthTrace trace;
  trace.id = id;
  trace.entries.reserve(config.length);
  for (std::size_t slot = 0; slot < config.length; ++slot) {
    double bw = config.state_mbps[state];
    if (config.noise_std_mbps > 0.0) bw += noise(rng);
    bw = std::max(bw, 0.05);
    trace.entries.push_back({static_cast<double>(slot) * config.slot_s, bw});
    const double u = unif(rng);
    double acc = 0.0;
    std::size_t next = config.state_mbps.size() - 1;
    for (std::size_t s = 0; s < config.transition[state].size(); ++s) {
      acc += config.transition[state][s];
      if (u < acc) {
        next = s;
        break;
      }
    }
    state = next;
  }
  return trace;
}

}  // namespace qarc::trace
