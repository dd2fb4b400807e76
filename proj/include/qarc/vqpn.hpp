#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qarc/nn.hpp"
#include "qarc/quality.hpp"

namespace qarc::vqpn {

enum class InputMode { kFrames, kCurves };

InputMode mode_from_string(const std::string& s);
std::string to_string(InputMode m);

struct VqpnConfig {
  InputMode mode = InputMode::kCurves;
  std::size_t filters = 64;  // conv filters (frame mode) / slot feature width (curve mode)
  std::size_t hidden = 64;   // GRU hidden units, two stacked layers
  double lr = 1e-4;
  double lambda = 1e-4;      // L2 coefficient in the training loss
  std::uint64_t seed = 1;
};

// One supervised example: evidence from the past 5 slots and the next slot's
// per-bitrate quality vector as the target.
struct QualitySample {
  InputMode mode = InputMode::kCurves;
  std::vector<Tensor> frames;                    // 25 frames (frame mode)
  std::vector<quality::QualitySlot> past_curves; // 5 slots (curve mode)
  quality::QualitySlot target{};
};

inline constexpr std::size_t kPastSlots = 5;
inline constexpr std::size_t kInputFrames = 25;  // 5 slots x 5 frames

// Quality predictor of Fig.-4 shape: feature extraction per frame (conv,
// avg-pool, conv, max-pool, dense 128, dense 64), a two-layer GRU over the
// sequence, and a sigmoid head over the 5 candidate bitrates. Curve mode
// replaces the convolutional path with a per-slot dense embedding.
class VqpnModel {
 public:
  explicit VqpnModel(VqpnConfig config);

  std::array<double, quality::kNumBitrates> predict(const QualitySample& sample);

  nn::Var forward(nn::Graph& g, const QualitySample& sample);
  std::vector<nn::Var> bound_params(nn::Graph& g);  // for the L2 term

  nn::Model& model() { return model_; }
  const VqpnConfig& config() const { return config_; }

 private:
  nn::Var frame_features(nn::Graph& g, const Tensor& frame);

  VqpnConfig config_;
  nn::Model model_;
  nn::Conv2d conv1_, conv2_;
  nn::Dense fc1_, fc2_;       // frame mode: flatten -> 128 -> 64
  nn::Dense slot_fc_;         // curve mode: 5 -> filters
  nn::GruCell gru1_, gru2_;
  nn::Dense head_;
};

struct TrainOptions {
  std::size_t max_epochs = 50;
  std::size_t patience = 5;  // non-improving validation rounds tolerated
  std::uint64_t shuffle_seed = 7;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double best_val_loss = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  double best_val_loss = 0.0;
  std::size_t best_epoch = 0;
};

// Adam on the MSE + L2 objective with early stopping on validation loss;
// leaves the model at the best-validation parameters.
TrainReport train(VqpnModel& model, const std::vector<QualitySample>& train_set,
                  const std::vector<QualitySample>& val_set, const TrainOptions& opts);

// (100/n) * sum |F - A| / ((|A| + |F|)/2); a term with F = A = 0 counts as 0.
double smape(const std::vector<double>& forecast, const std::vector<double>& actual);

// Held-out SMAPE of the model's next-slot forecasts over a sample set.
double eval_smape(VqpnModel& model, const std::vector<QualitySample>& samples);
// SMAPE of predicting the next slot as a copy of the current one.
double persistence_smape(const std::vector<QualitySample>& samples);

// Sliding-window samples from a curve series (curve mode) or clip (frame mode).
std::vector<QualitySample> samples_from_series(const quality::QualityCurveSeries& series);
std::vector<QualitySample> samples_from_clip(const quality::FrameClip& clip,
                                             const quality::QualityCurveSeries& series);

struct SweepCell {
  std::size_t filters = 0;
  std::size_t hidden = 0;
  double lr = 0.0;
  double smape_pct = 0.0;
  std::uint64_t seed = 0;
};

// One trained model per (filters, hidden) pair x learning rate; SMAPE is
// measured on the validation set.
std::vector<SweepCell> sweep_hyperparams(
    const std::vector<std::pair<std::size_t, std::size_t>>& filter_hidden_pairs,
    const std::vector<double>& lr_grid, const std::vector<QualitySample>& train_set,
    const std::vector<QualitySample>& val_set, const TrainOptions& opts,
    VqpnConfig base);

// The 6x4 grid of filter/hidden pairs and learning rates used by the stock sweep.
std::vector<std::pair<std::size_t, std::size_t>> default_sweep_pairs();
std::vector<double> default_sweep_lrs();

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells);

}  // namespace qarc::vqpn
