#include <doctest.h>

#include <cmath>

#include "qarc/bwprobe.hpp"
#include "qarc/trace.hpp"

using namespace qarc;

namespace {

std::vector<trace::BandwidthTrace> constant_traces(double mbps, std::size_t count,
                                                   std::size_t len) {
  std::vector<trace::BandwidthTrace> traces;
  for (std::size_t i = 0; i < count; ++i) {
    trace::BandwidthTrace tr;
    tr.id = "const" + std::to_string(i);
    for (std::size_t t = 0; t < len; ++t) tr.entries.push_back({double(t), mbps});
    traces.push_back(std::move(tr));
  }
  return traces;
}

}  // namespace

TEST_CASE("probe samples carry the simulator observations") {
  auto traces = constant_traces(1.0, 2, 20);
  auto samples = bwprobe::make_probe_samples(traces, {}, 5);
  REQUIRE(samples.size() == 2 * (20 - bwprobe::kProbeHistory));
  for (const auto& s : samples) {
    CHECK(s.target_mbps == 1.0);
    for (double v : s.send_mbps) {
      CHECK(v >= 0.01);
      CHECK(v <= 1.8);
    }
    for (double v : s.recv_mbps) CHECK(std::isfinite(v));
  }
}

TEST_CASE("probe learns a constant bandwidth family") {
  auto train_traces = constant_traces(1.0, 6, 30);
  auto test_traces = constant_traces(1.0, 2, 30);
  netsim::SimConfig sim;
  auto train_set = bwprobe::make_probe_samples(train_traces, sim, 1);
  auto test_set = bwprobe::make_probe_samples(test_traces, sim, 2);

  bwprobe::ProbeConfig cfg;
  cfg.channels = 8;
  cfg.hidden = 16;
  cfg.lr = 1e-2;
  bwprobe::BandwidthEstimator est(cfg);
  auto report = bwprobe::train_probe(est, train_set, test_set, 10, 3);
  CHECK(report.heldout_smape_pct < 5.0);
  CHECK(report.persistence_smape_pct >= 0.0);
  for (const auto& s : test_set) CHECK(std::isfinite(est.predict(s)));
}

TEST_CASE("probe training rejects empty datasets") {
  bwprobe::BandwidthEstimator est({});
  CHECK_THROWS(bwprobe::train_probe(est, {}, {}, 1, 0));
}
