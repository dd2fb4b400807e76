#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qarc/netsim.hpp"

using namespace qarc;

TEST_CASE("delay gradient arithmetic") {
  CHECK(netsim::delay_gradient(0.10, 0.15) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(netsim::delay_gradient(0.2, 0.2) == 0.0);
  CHECK(netsim::delay_gradient(0.3, 0.1) < 0.0);
}

TEST_CASE("fft magnitudes against a naive dft oracle") {
  SUBCASE("constant sequence is DC only") {
    std::vector<double> x(10, 2.5);
    auto mags = netsim::fft_magnitudes(x);
    REQUIRE(mags.size() == 6);
    CHECK(mags[0] == doctest::Approx(2.5).epsilon(1e-9));
    for (std::size_t i = 1; i < mags.size(); ++i) CHECK(mags[i] < 1e-9);
  }
  SUBCASE("pure cosine lands in its bin") {
    std::vector<double> x(10);
    for (std::size_t i = 0; i < 10; ++i) {
      x[i] = std::cos(2.0 * std::numbers::pi * 2.0 * double(i) / 10.0);
    }
    auto mags = netsim::fft_magnitudes(x);
    CHECK(mags[2] == doctest::Approx(0.5).epsilon(1e-9));
    for (std::size_t i = 0; i < mags.size(); ++i) {
      if (i != 2) CHECK(mags[i] < 1e-9);
    }
  }
  SUBCASE("random sequence matches an independent dft") {
    std::vector<double> x = {0.3, -1.2, 2.4, 0.0, 1.1, -0.7, 0.9};
    auto mags = netsim::fft_magnitudes(x);
    REQUIRE(mags.size() == 4);
    const std::size_t k = x.size();
    for (std::size_t j = 0; j < mags.size(); ++j) {
      double re = 0, im = 0;
      for (std::size_t i = 0; i < k; ++i) {
        const double ang = -2.0 * std::numbers::pi * double(j) * double(i) / double(k);
        re += x[i] * std::cos(ang);
        im += x[i] * std::sin(ang);
      }
      CHECK(mags[j] == doctest::Approx(std::hypot(re, im) / double(k)).epsilon(1e-9));
    }
  }
  SUBCASE("adding a constant changes only bin zero") {
    std::vector<double> x = {1.0, 0.2, -0.5, 0.8, 0.1, 0.0};
    auto a = netsim::fft_magnitudes(x);
    for (double& v : x) v += 3.0;
    auto b = netsim::fft_magnitudes(x);
    for (std::size_t i = 1; i < a.size(); ++i) {
      CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
    }
    CHECK(b[0] > a[0]);
  }
  SUBCASE("short sequences rejected") { CHECK_THROWS(netsim::fft_magnitudes({1.0})); }
}

TEST_CASE("zero send rate on an empty queue reports all zeros") {
  netsim::LinkSimulator sim({1.0, 1500, 0, 1});
  auto rep = sim.step_slot(0.0, 2.0);
  CHECK(rep.send_rate_mbps == 0.0);
  CHECK(rep.recv_rate_mbps == 0.0);
  CHECK(rep.mean_qdelay_s == 0.0);
  CHECK(rep.loss_ratio == 0.0);
}

TEST_CASE("overload produces loss and a full queue") {
  netsim::SimConfig cfg;
  cfg.queue_capacity = 20;
  cfg.seed = 2;
  netsim::LinkSimulator sim(cfg);
  double total_loss = 0.0;
  for (int i = 0; i < 20; ++i) {
    total_loss += sim.step_slot(1.0, 0.5).loss_ratio;
  }
  CHECK(total_loss > 0.0);
  CHECK(sim.queue().enqueued.size() == 20);
}

TEST_CASE("underload keeps delays bounded over 1000 slots") {
  netsim::LinkSimulator sim({1.0, 1500, 0, 3});
  double early = 0.0, late = 0.0;
  for (int i = 0; i < 1000; ++i) {
    auto rep = sim.step_slot(0.5, 1.2);
    CHECK(rep.mean_qdelay_s >= 0.0);
    CHECK(rep.p95_qdelay_s >= rep.mean_qdelay_s - 1e-12);
    if (i < 100) early += rep.p95_qdelay_s;
    if (i >= 900) late += rep.p95_qdelay_s;
  }
  CHECK(late < early + 2.0);  // no drift
  CHECK(late / 100.0 < 0.5);
}

TEST_CASE("session byte conservation bound") {
  netsim::SimConfig cfg;
  cfg.queue_capacity = 50;
  cfg.seed = 4;
  netsim::LinkSimulator sim(cfg);
  double recv_bytes = 0.0;
  const double bw = 0.9;
  const int slots = 200;
  for (int i = 0; i < slots; ++i) {
    recv_bytes += sim.step_slot(1.4, bw).recv_rate_mbps * 1e6 / 8.0;
  }
  // service opportunities are Poisson, so allow a five-sigma fluctuation over
  // the expected packet budget plus whatever the queue could hold
  const double expect_pkts = slots * bw * 1e6 / 8.0 / 1500.0;
  const double slack_pkts = 5.0 * std::sqrt(expect_pkts) + 50.0;
  CHECK(recv_bytes <= (expect_pkts + slack_pkts) * 1500.0);
}

TEST_CASE("same seed gives identical slot reports") {
  netsim::LinkSimulator a({1.0, 1500, 0, 9});
  netsim::LinkSimulator b({1.0, 1500, 0, 9});
  for (int i = 0; i < 50; ++i) {
    auto ra = a.step_slot(0.8, 1.0);
    auto rb = b.step_slot(0.8, 1.0);
    CHECK(ra.recv_rate_mbps == rb.recv_rate_mbps);
    CHECK(ra.mean_qdelay_s == rb.mean_qdelay_s);
    CHECK(ra.loss_ratio == rb.loss_ratio);
  }
}

TEST_CASE("sustained 0.4 load sits near the m/m/1 sojourn time") {
  // quick version with 3 seeds; the acceptance suite runs the full check
  const double bw = 1.2;
  const double mu = bw * 1e6 / (8.0 * 1500);
  const double rho = 0.4;
  const double w_expected = 1.0 / (mu * (1.0 - rho));
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    netsim::LinkSimulator sim({1.0, 1500, 1000000, seed});
    double mean = 0.0;
    for (int i = 0; i < 100; ++i) {
      mean += sim.step_slot(rho * bw, bw).mean_qdelay_s;
    }
    mean /= 100.0;
    CHECK(mean < 3.0 * w_expected);
    CHECK(mean > w_expected / 3.0);
  }
}
