#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qarc/vqpn.hpp"

using namespace qarc;

TEST_CASE("smape closed forms") {
  CHECK(vqpn::smape({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
  CHECK(vqpn::smape({1.0}, {3.0}) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(vqpn::smape({3.0}, {1.0}) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(vqpn::smape({0.0, 1.0}, {0.0, 1.0}) == 0.0);  // 0/0 term counts as zero
  CHECK_THROWS(vqpn::smape({0.0}, {1.0, 2.0}));
  CHECK_THROWS(vqpn::smape({}, {}));
  // a one-sided zero keeps a positive denominator
  CHECK(vqpn::smape({0.0}, {2.0}) == doctest::Approx(200.0).epsilon(1e-12));
}

namespace {

vqpn::VqpnConfig small_config() {
  vqpn::VqpnConfig cfg;
  cfg.filters = 8;
  cfg.hidden = 8;
  cfg.lr = 1e-2;
  cfg.lambda = 0.0;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("curve-mode predictions are deterministic and inside (0,1)") {
  vqpn::VqpnModel model(small_config());
  auto series = quality::gen_quality_curves(quality::Profile::kHybrid, 12, 6);
  auto samples = vqpn::samples_from_series(series);
  REQUIRE(samples.size() == 12 - vqpn::kPastSlots);
  auto p1 = model.predict(samples[0]);
  auto p2 = model.predict(samples[0]);
  CHECK(p1 == p2);
  for (double v : p1) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("zeroed head weights pin the output at one half") {
  vqpn::VqpnModel model(small_config());
  for (Parameter& p : model.model().params()) {
    if (p.name.rfind("head", 0) == 0) {
      std::fill(p.tensor.values.begin(), p.tensor.values.end(), 0.0);
    }
  }
  auto series = quality::gen_quality_curves(quality::Profile::kStatic, 8, 1);
  auto samples = vqpn::samples_from_series(series);
  for (double v : model.predict(samples[0])) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("training overfits a constant target and descends") {
  quality::QualityCurveSeries series;
  series.id = "const";
  for (int i = 0; i < 20; ++i) series.slots.push_back({0.3, 0.5, 0.65, 0.75, 0.8});
  auto samples = vqpn::samples_from_series(series);
  vqpn::VqpnModel model(small_config());
  vqpn::TrainOptions opts;
  opts.max_epochs = 40;
  opts.patience = 40;
  auto report = vqpn::train(model, samples, samples, opts);
  REQUIRE(!report.epochs.empty());
  CHECK(report.epochs.back().train_loss < report.epochs.front().train_loss);
  auto pred = model.predict(samples[0]);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    CHECK(std::abs(pred[i] - samples[0].target[i]) < 0.05);
  }
}

TEST_CASE("early stopping semantics") {
  auto series = quality::gen_quality_curves(quality::Profile::kHybrid, 16, 2);
  auto samples = vqpn::samples_from_series(series);
  vqpn::VqpnModel model(small_config());

  vqpn::TrainOptions one_eval;
  one_eval.max_epochs = 50;
  one_eval.patience = 0;
  auto report = vqpn::train(model, samples, samples, one_eval);
  CHECK(report.epochs.size() == 1);

  vqpn::VqpnModel model2(small_config());
  vqpn::TrainOptions normal;
  normal.max_epochs = 8;
  normal.patience = 2;
  auto r2 = vqpn::train(model2, samples, samples, normal);
  double best = r2.epochs.front().best_val_loss;
  for (const auto& e : r2.epochs) {
    CHECK(e.best_val_loss <= best + 1e-15);  // best column is monotone
    best = e.best_val_loss;
    CHECK(e.best_val_loss <= e.val_loss + 1e-15);
  }
  CHECK_THROWS(vqpn::train(model2, {}, samples, normal));
}

TEST_CASE("a dominant l2 term shrinks parameter norms") {
  auto series = quality::gen_quality_curves(quality::Profile::kHybrid, 12, 9);
  auto samples = vqpn::samples_from_series(series);
  vqpn::VqpnConfig cfg = small_config();
  cfg.lambda = 1e3;
  cfg.lr = 1e-3;
  vqpn::VqpnModel model(cfg);
  auto norm = [&] {
    double n = 0.0;
    for (const Parameter& p : model.model().params()) {
      for (double v : p.tensor.values) n += v * v;
    }
    return n;
  };
  const double before = norm();
  vqpn::TrainOptions opts;
  opts.max_epochs = 3;
  opts.patience = 3;
  vqpn::train(model, samples, samples, opts);
  CHECK(norm() < before);
}

TEST_CASE("frame mode runs the full convolutional path") {
  auto series = quality::gen_quality_curves(quality::Profile::kHybrid, 7, 4);
  auto clip = quality::gen_frame_clip(series, 4);
  auto samples = vqpn::samples_from_clip(clip, series);
  REQUIRE(samples.size() == 2);
  REQUIRE(samples[0].frames.size() == vqpn::kInputFrames);

  vqpn::VqpnConfig cfg = small_config();
  cfg.mode = vqpn::InputMode::kFrames;
  cfg.filters = 4;
  vqpn::VqpnModel model(cfg);
  auto pred = model.predict(samples[0]);
  for (double v : pred) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  CHECK_THROWS(model.predict(vqpn::QualitySample{}));  // wrong mode
}

TEST_CASE("persistence baseline and sweep output") {
  auto series = quality::gen_quality_curves(quality::Profile::kDynamic, 20, 5);
  auto samples = vqpn::samples_from_series(series);
  CHECK(vqpn::persistence_smape(samples) >= 0.0);

  vqpn::TrainOptions opts;
  opts.max_epochs = 1;
  opts.patience = 0;
  auto cells = vqpn::sweep_hyperparams({{4, 4}}, {1e-3}, samples, samples, opts,
                                       small_config());
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].filters == 4);
  CHECK(cells[0].smape_pct >= 0.0);

  CHECK(vqpn::default_sweep_pairs().size() == 6);
  CHECK(vqpn::default_sweep_lrs().size() == 4);

  std::ostringstream out;
  vqpn::write_sweep_csv(out, cells);
  CHECK(out.str().rfind("filters,hidden,lr,smape_pct,seed\n", 0) == 0);
}
