#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qarc/netsim.hpp"
#include "qarc/nn.hpp"
#include "qarc/trace.hpp"

namespace qarc::bwprobe {

inline constexpr std::size_t kProbeHistory = 5;  // past slots fed to the probe

// One supervised example: past (send, recv, delay-gradient) slots and the
// next slot's available bandwidth as the target.
struct ProbeSample {
  std::array<double, kProbeHistory> send_mbps{};
  std::array<double, kProbeHistory> recv_mbps{};
  std::array<double, kProbeHistory> delay_grad_s{};
  double target_mbps = 0.0;
};

struct ProbeConfig {
  std::size_t channels = 64;
  std::size_t hidden = 64;
  double lr = 1e-4;
  std::uint64_t seed = 3;
};

// 1-D convolutional regressor of next-slot bandwidth from probe history.
class BandwidthEstimator {
 public:
  explicit BandwidthEstimator(ProbeConfig config);

  double predict(const ProbeSample& sample);
  nn::Var forward(nn::Graph& g, const ProbeSample& sample);
  nn::Model& model() { return model_; }

 private:
  ProbeConfig config_;
  nn::Model model_;
  nn::Conv1d conv_;
  nn::Dense fc_, head_;
};

// Random sending rates in [0.01, 1.8] Mbps are replayed through the link
// simulator over each trace to produce the probe's observations.
std::vector<ProbeSample> make_probe_samples(const std::vector<trace::BandwidthTrace>& traces,
                                            const netsim::SimConfig& sim_config,
                                            std::uint64_t seed);

struct ProbeTrainReport {
  std::size_t epochs = 0;
  double final_train_loss = 0.0;
  double heldout_smape_pct = 0.0;
  double persistence_smape_pct = 0.0;  // recv-rate persistence baseline
};

ProbeTrainReport train_probe(BandwidthEstimator& est,
                             const std::vector<ProbeSample>& train_set,
                             const std::vector<ProbeSample>& test_set,
                             std::size_t epochs, std::uint64_t shuffle_seed);

double eval_probe_smape(BandwidthEstimator& est, const std::vector<ProbeSample>& samples);

}  // namespace qarc::bwprobe
