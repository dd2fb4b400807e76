#include "qarc/vqpn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace qarc::vqpn {

using nn::Graph;
using nn::Var;

InputMode mode_from_string(const std::string& s) {
  if (s == "frames") return InputMode::kFrames;
  if (s == "curves") return InputMode::kCurves;
  throw std::invalid_argument("unknown vqpn mode: " + s);
}

std::string to_string(InputMode m) {
  return m == InputMode::kFrames ? "frames" : "curves";
}

VqpnModel::VqpnModel(VqpnConfig config) : config_(config) {
  std::mt19937_64 rng(config_.seed);
  const std::size_t f = config_.filters;
  const std::size_t h = config_.hidden;
  std::size_t gru_in = 0;
  if (config_.mode == InputMode::kFrames) {
    conv1_ = nn::Conv2d::create(model_, "feat.conv1", 5, 3, f, 1, rng);
    conv2_ = nn::Conv2d::create(model_, "feat.conv2", 3, f, f, 1, rng);
    // 64x36 -> conv5 -> 60x32 -> avgpool3 -> 20x10 -> conv3 -> 18x8 -> maxpool2 -> 9x4
    const std::size_t flat = 9 * 4 * f;
    fc1_ = nn::Dense::create(model_, "feat.fc1", flat, 128, rng);
    fc2_ = nn::Dense::create(model_, "feat.fc2", 128, 64, rng);
    gru_in = 64;
  } else {
    slot_fc_ = nn::Dense::create(model_, "feat.slot", quality::kNumBitrates, f, rng);
    gru_in = f;
  }
  gru1_ = nn::GruCell::create(model_, "gru1", gru_in, h, rng);
  gru2_ = nn::GruCell::create(model_, "gru2", h, h, rng);
  head_ = nn::Dense::create(model_, "head", h, quality::kNumBitrates, rng);
  model_.set_lr(config_.lr);
}

Var VqpnModel::frame_features(Graph& g, const Tensor& frame) {
  Var x = g.input(frame);
  x = g.relu(conv1_.apply(g, model_, x));
  x = g.avg_pool2d(x, 3);
  x = g.relu(conv2_.apply(g, model_, x));
  x = g.max_pool2d(x, 2);
  x = g.flatten(x);
  x = g.relu(fc1_.apply(g, model_, x));
  return g.relu(fc2_.apply(g, model_, x));
}

Var VqpnModel::forward(Graph& g, const QualitySample& sample) {
  if (sample.mode != config_.mode) {
    throw std::invalid_argument("vqpn: sample mode does not match model mode");
  }
  std::vector<Var> sequence;
  if (config_.mode == InputMode::kFrames) {
    if (sample.frames.size() != kInputFrames) {
      throw ShapeError("vqpn: expected " + std::to_string(kInputFrames) + " frames, got " +
                       std::to_string(sample.frames.size()));
    }
    for (const Tensor& frame : sample.frames) {
      sequence.push_back(frame_features(g, frame));
    }
  } else {
    if (sample.past_curves.size() != kPastSlots) {
      throw ShapeError("vqpn: expected " + std::to_string(kPastSlots) + " past slots, got " +
                       std::to_string(sample.past_curves.size()));
    }
    for (const quality::QualitySlot& slot : sample.past_curves) {
      Var x = g.input(std::vector<double>(slot.begin(), slot.end()));
      sequence.push_back(g.relu(slot_fc_.apply(g, model_, x)));
    }
  }
  Var h1 = g.input(Tensor({config_.hidden}));
  Var h2 = g.input(Tensor({config_.hidden}));
  for (const Var& x : sequence) {
    h1 = gru1_.step(g, model_, x, h1);
    h2 = gru2_.step(g, model_, h1, h2);
  }
  return g.sigmoid(head_.apply(g, model_, h2));
}

std::vector<Var> VqpnModel::bound_params(Graph& g) {
  std::vector<Var> vars;
  for (Parameter& p : model_.params()) vars.push_back(g.param(p));
  return vars;
}

std::array<double, quality::kNumBitrates> VqpnModel::predict(const QualitySample& sample) {
  Graph g;
  Var out = forward(g, sample);
  std::array<double, quality::kNumBitrates> result;
  std::copy(out.values().begin(), out.values().end(), result.begin());
  return result;
}

namespace {

double sample_loss(VqpnModel& model, const QualitySample& sample, double lambda,
                   bool backward) {
  Graph g;
  Var pred = model.forward(g, sample);
  std::vector<Var> reg;
  if (lambda > 0.0) reg = model.bound_params(g);
  Var loss = g.mse_l2_loss(pred, {sample.target.begin(), sample.target.end()}, reg, lambda);
  if (backward) g.backward(loss);
  return loss.scalar();
}

double mean_val_loss(VqpnModel& model, const std::vector<QualitySample>& val_set) {
  double total = 0.0;
  for (const QualitySample& s : val_set) {
    total += sample_loss(model, s, 0.0, false);
  }
  return total / static_cast<double>(val_set.size());
}

}  // namespace

TrainReport train(VqpnModel& model, const std::vector<QualitySample>& train_set,
                  const std::vector<QualitySample>& val_set, const TrainOptions& opts) {
  if (train_set.empty() || val_set.empty()) {
    throw std::invalid_argument("vqpn::train: empty dataset");
  }
  std::mt19937_64 rng(opts.shuffle_seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> best_values = model.model().flat_values();
  std::size_t evals_since_improve = 0;

  for (std::size_t epoch = 1; epoch <= opts.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double train_total = 0.0;
    for (std::size_t idx : order) {
      model.model().zero_grad();
      train_total += sample_loss(model, train_set[idx], model.config().lambda, true);
      for (Parameter& p : model.model().params()) adam_step(p);
    }
    const double train_loss = train_total / static_cast<double>(train_set.size());
    const double val_loss = mean_val_loss(model, val_set);
    if (val_loss < best_val) {
      best_val = val_loss;
      best_values = model.model().flat_values();
      report.best_epoch = epoch;
      evals_since_improve = 0;
    } else {
      ++evals_since_improve;
    }
    report.epochs.push_back({epoch, train_loss, val_loss, best_val});
    if (evals_since_improve >= opts.patience) break;
  }
  model.model().set_flat_values(best_values);
  report.best_val_loss = best_val;
  return report;
}

double smape(const std::vector<double>& forecast, const std::vector<double>& actual) {
  if (forecast.size() != actual.size()) {
    throw std::invalid_argument("smape: length mismatch");
  }
  if (forecast.empty()) throw std::invalid_argument("smape: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    const double denom = (std::abs(actual[i]) + std::abs(forecast[i])) / 2.0;
    if (denom == 0.0) {
      if (forecast[i] == 0.0 && actual[i] == 0.0) continue;  // 0/0 counts as 0
      throw std::invalid_argument("smape: zero denominator at index " + std::to_string(i));
    }
    total += std::abs(forecast[i] - actual[i]) / denom;
  }
  return 100.0 * total / static_cast<double>(forecast.size());
}

double eval_smape(VqpnModel& model, const std::vector<QualitySample>& samples) {
  std::vector<double> forecast, actual;
  for (const QualitySample& s : samples) {
    const auto pred = model.predict(s);
    forecast.insert(forecast.end(), pred.begin(), pred.end());
    actual.insert(actual.end(), s.target.begin(), s.target.end());
  }
  return smape(forecast, actual);
}

double persistence_smape(const std::vector<QualitySample>& samples) {
  std::vector<double> forecast, actual;
  for (const QualitySample& s : samples) {
    if (s.past_curves.empty()) {
      throw std::invalid_argument("persistence_smape: needs curve-mode samples");
    }
    const quality::QualitySlot& last = s.past_curves.back();
    forecast.insert(forecast.end(), last.begin(), last.end());
    actual.insert(actual.end(), s.target.begin(), s.target.end());
  }
  return smape(forecast, actual);
}

std::vector<QualitySample> samples_from_series(const quality::QualityCurveSeries& series) {
  std::vector<QualitySample> samples;
  if (series.size() <= kPastSlots) return samples;
  for (std::size_t t = kPastSlots; t < series.size(); ++t) {
    QualitySample s;
    s.mode = InputMode::kCurves;
    s.past_curves.assign(series.slots.begin() + static_cast<std::ptrdiff_t>(t - kPastSlots),
                         series.slots.begin() + static_cast<std::ptrdiff_t>(t));
    s.target = series.slots[t];
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<QualitySample> samples_from_clip(const quality::FrameClip& clip,
                                             const quality::QualityCurveSeries& series) {
  std::vector<QualitySample> samples;
  const std::size_t fps = quality::FrameClip::kFramesPerSlot;
  const std::size_t slots = clip.frames.size() / fps;
  if (slots != series.size()) {
    throw std::invalid_argument("samples_from_clip: clip and series length mismatch");
  }
  if (slots <= kPastSlots) return samples;
  for (std::size_t t = kPastSlots; t < slots; ++t) {
    QualitySample s;
    s.mode = InputMode::kFrames;
    s.frames.assign(clip.frames.begin() + static_cast<std::ptrdiff_t>((t - kPastSlots) * fps),
                    clip.frames.begin() + static_cast<std::ptrdiff_t>(t * fps));
    s.target = series.slots[t];
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<SweepCell> sweep_hyperparams(
    const std::vector<std::pair<std::size_t, std::size_t>>& filter_hidden_pairs,
    const std::vector<double>& lr_grid, const std::vector<QualitySample>& train_set,
    const std::vector<QualitySample>& val_set, const TrainOptions& opts,
    VqpnConfig base) {
  std::vector<SweepCell> cells;
  for (const auto& [filters, hidden] : filter_hidden_pairs) {
    for (double lr : lr_grid) {
      VqpnConfig cfg = base;
      cfg.filters = filters;
      cfg.hidden = hidden;
      cfg.lr = lr;
      VqpnModel model(cfg);
      train(model, train_set, val_set, opts);
      cells.push_back({filters, hidden, lr, eval_smape(model, val_set), cfg.seed});
    }
  }
  return cells;
}

std::vector<std::pair<std::size_t, std::size_t>> default_sweep_pairs() {
  return {{32, 32}, {32, 128}, {64, 64}, {64, 128}, {128, 64}, {128, 128}};
}

std::vector<double> default_sweep_lrs() { return {1e-3, 1e-4, 1e-5, 6e-6}; }

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "filters,hidden,lr,smape_pct,seed\n";
  out.precision(17);
  for (const SweepCell& c : cells) {
    out << c.filters << ',' << c.hidden << ',' << c.lr << ',' << c.smape_pct << ','
        << c.seed << '\n';
  }
}

}  // namespace qarc::vqpn
