#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "qarc/trace.hpp"

using namespace qarc;

TEST_CASE("bandwidth trace parsing and validation") {
  std::istringstream ok("0.0 1.0\n1.0 1.0\n");
  auto tr = trace::parse_bandwidth_trace(ok, "t");
  REQUIRE(tr.size() == 2);
  CHECK(tr.entries[1].timestamp_s == 1.0);
  CHECK(tr.entries[1].bandwidth_mbps == 1.0);

  std::istringstream bad("0.0 1.0\n0.5 -2\n");
  try {
    trace::parse_bandwidth_trace(bad);
    FAIL("expected parse error");
  } catch (const trace::ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  std::istringstream comments("# header\n0.0 2.5\n\n1.0 2.0\n");
  CHECK(trace::parse_bandwidth_trace(comments).size() == 2);

  std::istringstream nonmono("0.0 1.0\n0.0 1.0\n");
  CHECK_THROWS_AS(trace::parse_bandwidth_trace(nonmono), trace::ParseError);
}

TEST_CASE("trace serialization round-trips 1000 entries") {
  trace::BandwidthTrace tr;
  tr.id = "big";
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> bw(0.1, 10.0);
  for (int i = 0; i < 1000; ++i) {
    tr.entries.push_back({i * 0.5, bw(rng)});
  }
  std::ostringstream out;
  trace::serialize_bandwidth_trace(out, tr);
  std::istringstream in(out.str());
  auto back = trace::parse_bandwidth_trace(in, "big");
  REQUIRE(back.size() == 1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    CHECK(back.entries[i].timestamp_s == tr.entries[i].timestamp_s);
    CHECK(back.entries[i].bandwidth_mbps == tr.entries[i].bandwidth_mbps);
  }
}

TEST_CASE("packets_to_windows rate arithmetic and byte conservation") {
  std::vector<trace::PacketRecord> records;
  for (int i = 0; i < 10; ++i) {
    records.push_back({0.0, 50.0 + i * 10.0, 1500});
  }
  auto windows = trace::packets_to_windows(records, 1.0);
  REQUIRE(windows.size() == 1);
  CHECK(windows[0] == doctest::Approx(0.12).epsilon(1e-12));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ts(0.0, 9000.0);
  std::uniform_int_distribution<std::size_t> sz(100, 1500);
  std::vector<trace::PacketRecord> random_records;
  std::size_t total_bytes = 0;
  for (int i = 0; i < 500; ++i) {
    const double t = ts(rng);
    const std::size_t s = sz(rng);
    random_records.push_back({t, t + 5.0, s});
    total_bytes += s;
  }
  std::sort(random_records.begin(), random_records.end(),
            [](const auto& a, const auto& b) { return a.recv_ts_ms < b.recv_ts_ms; });
  auto w = trace::packets_to_windows(random_records, 0.5);
  double sum = 0.0;
  for (double r : w) sum += r;
  CHECK(sum * 0.5 * 1e6 / 8.0 == doctest::Approx(double(total_bytes)).epsilon(1e-9));
}

TEST_CASE("packets_to_bandwidth interpolates empty windows") {
  std::vector<trace::PacketRecord> records = {
      {0.0, 100.0, 1500},   // window 0
      {0.0, 2100.0, 4500},  // window 2
  };
  auto tr = trace::packets_to_bandwidth(records, 1.0, "x");
  REQUIRE(tr.size() == 3);
  const double w0 = 1500 * 8 / 1e6;
  const double w2 = 4500 * 8 / 1e6;
  CHECK(tr.entries[0].bandwidth_mbps == doctest::Approx(w0));
  CHECK(tr.entries[1].bandwidth_mbps == doctest::Approx((w0 + w2) / 2));
  CHECK(tr.entries[2].bandwidth_mbps == doctest::Approx(w2));

  CHECK(trace::packets_to_bandwidth({{0.0, 10.0, 1200}}, 1.0).size() == 1);
  CHECK(trace::packets_to_bandwidth({}, 1.0).size() == 0);
}

TEST_CASE("markov trace generation") {
  trace::MarkovTraceConfig single;
  single.state_mbps = {1.0};
  single.transition = {{1.0}};
  single.length = 20;
  single.seed = 3;
  auto tr = trace::gen_markov_trace(single, "one");
  for (const auto& e : tr.entries) CHECK(e.bandwidth_mbps == doctest::Approx(1.0));

  trace::MarkovTraceConfig two;
  two.state_mbps = {1.0, 3.0};
  two.transition = {{0.9, 0.1}, {0.1, 0.9}};
  two.length = 10000;
  two.seed = 11;
  auto t2 = trace::gen_markov_trace(two);
  auto t2b = trace::gen_markov_trace(two);
  for (std::size_t i = 0; i < t2.size(); ++i) {
    CHECK(t2.entries[i].bandwidth_mbps == t2b.entries[i].bandwidth_mbps);
  }
  std::size_t switches = 0;
  for (std::size_t i = 1; i < t2.size(); ++i) {
    const bool hi_prev = t2.entries[i - 1].bandwidth_mbps > 2.0;
    const bool hi_now = t2.entries[i].bandwidth_mbps > 2.0;
    if (hi_prev != hi_now) ++switches;
  }
  const double freq = double(switches) / double(t2.size() - 1);
  CHECK(freq > 0.08);
  CHECK(freq < 0.12);

  trace::MarkovTraceConfig bad = two;
  bad.transition = {{0.9, 0.2}, {0.1, 0.9}};
  CHECK_THROWS(trace::gen_markov_trace(bad));
}

TEST_CASE("split_dataset is disjoint, exhaustive, and seeded") {
  std::vector<int> items = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  auto [train, test] = trace::split_dataset(items, 0.8, 5);
  CHECK(train.size() == 8);
  CHECK(test.size() == 2);
  std::vector<int> all = train;
  all.insert(all.end(), test.begin(), test.end());
  std::sort(all.begin(), all.end());
  CHECK(all == items);

  auto [train2, test2] = trace::split_dataset(items, 0.8, 5);
  CHECK(train == train2);
  CHECK(test == test2);
  CHECK_THROWS(trace::split_dataset(items, 1.0, 5));
}
