#include "qarc/state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qarc/netsim.hpp"

namespace qarc::vqrl {

void AgentState::validate() const {
  auto check_finite = [](const auto& arr, const char* name) {
    for (double v : arr) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string("AgentState: non-finite ") + name);
      }
    }
  };
  check_finite(past_quality, "p");
  check_finite(predicted_quality, "v");
  check_finite(send_rate, "s");
  check_finite(recv_rate, "r");
  check_finite(delay_grad, "d");
  check_finite(loss, "l");
  check_finite(fft, "f");
  for (double v : past_quality) {
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("AgentState: p out of [0,1]");
  }
  for (double v : predicted_quality) {
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("AgentState: v out of [0,1]");
  }
  for (double v : loss) {
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("AgentState: l out of [0,1]");
  }
}

void HistoryBuffers::push(double q, double send, double recv, double dgrad, double l) {
  quality.push_back(q);
  send_mbps.push_back(send);
  recv_mbps.push_back(recv);
  delay_grad_s.push_back(dgrad);
  loss.push_back(l);
}

namespace {

template <std::size_t N>
void fill_window(std::array<double, N>& out, const std::vector<double>& src) {
  // most recent N entries, zero-padded on the old side
  out.fill(0.0);
  const std::size_t take = std::min(N, src.size());
  for (std::size_t i = 0; i < take; ++i) {
    out[N - take + i] = src[src.size() - take + i];
  }
}

}  // namespace

AgentState build_state(const HistoryBuffers& buffers,
                       const std::array<double, quality::kNumBitrates>& prediction) {
  AgentState state;
  fill_window(state.past_quality, buffers.quality);
  fill_window(state.send_rate, buffers.send_mbps);
  fill_window(state.recv_rate, buffers.recv_mbps);
  fill_window(state.delay_grad, buffers.delay_grad_s);
  fill_window(state.loss, buffers.loss);
  state.predicted_quality = prediction;

  for (double& v : state.send_rate) v = std::clamp(v / kRateCeilMbps, 0.0, 1.0);
  for (double& v : state.recv_rate) v = std::clamp(v / kRateCeilMbps, 0.0, 1.0);
  for (double& v : state.delay_grad) v = std::clamp(v, -1.0, 1.0);

  const std::vector<double> recv(state.recv_rate.begin(), state.recv_rate.end());
  const std::vector<double> mags = netsim::fft_magnitudes(recv);
  std::copy(mags.begin(), mags.end(), state.fft.begin());

  state.validate();
  return state;
}

}  // namespace qarc::vqrl
