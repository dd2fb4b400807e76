#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "qarc/quality.hpp"

namespace qarc::vqrl {

inline constexpr std::size_t kHistoryLen = 10;   // k slots of history
inline constexpr std::size_t kFftBins = kHistoryLen / 2 + 1;
inline constexpr double kRateCeilMbps = 1.8;     // sending-rate ceiling

// Observation for the rate-control agent: per-slot histories (oldest first),
// the predicted per-bitrate quality for the next slot, and FFT magnitudes of
// the receive-rate history.
struct AgentState {
  std::array<double, kHistoryLen> past_quality{};   // p, in [0,1]
  std::array<double, quality::kNumBitrates> predicted_quality{};  // v
  std::array<double, kHistoryLen> send_rate{};      // s, normalized by the ceiling
  std::array<double, kHistoryLen> recv_rate{};      // r, normalized
  std::array<double, kHistoryLen> delay_grad{};     // d, clamped to [-1,1] s
  std::array<double, kHistoryLen> loss{};           // l, in [0,1]
  std::array<double, kFftBins> fft{};               // f, over normalized r

  void validate() const;  // finiteness + range invariants
};

// Raw per-slot observations; build_state consumes the most recent kHistoryLen
// entries and zero-pads on the old side during warmup.
struct HistoryBuffers {
  std::vector<double> quality;
  std::vector<double> send_mbps;
  std::vector<double> recv_mbps;
  std::vector<double> delay_grad_s;
  std::vector<double> loss;

  void push(double q, double send, double recv, double dgrad, double l);
  std::size_t size() const { return quality.size(); }
};

AgentState build_state(const HistoryBuffers& buffers,
                       const std::array<double, quality::kNumBitrates>& prediction);

}  // namespace qarc::vqrl
