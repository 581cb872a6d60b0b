#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "jarvis/control_proxy.hpp"
#include "jarvis/record.hpp"

using namespace jarvis;

namespace {

Batch make_batch(int n) {
  Batch b;
  for (int i = 0; i < n; ++i) {
    Record r;
    r.event_time_ms = i;
    r.wire_size = 86;
    b.push_back(r);
  }
  return b;
}

}  // namespace

TEST_CASE("route splits 100 records at p=0.83 into 83 forwarded, 17 drained") {
  ProxyConfig cfg;
  cfg.load_factor = 0.83;
  cfg.target_operator_id = 2;
  RouteResult res = route(make_batch(100), cfg, 0.0);
  CHECK(res.forward.size() == 83);
  CHECK(res.drain.size() == 17);
}

TEST_CASE("route boundary cases p=0 and p=1") {
  ProxyConfig cfg;
  cfg.load_factor = 0.0;
  RouteResult all_drain = route(make_batch(25), cfg, 0.0);
  CHECK(all_drain.forward.empty());
  CHECK(all_drain.drain.size() == 25);

  cfg.load_factor = 1.0;
  RouteResult all_fwd = route(make_batch(25), cfg, 0.0);
  CHECK(all_fwd.forward.size() == 25);
  CHECK(all_fwd.drain.empty());
}

TEST_CASE("route at p=0.25 from zero carry forwards exactly records 4 and 8") {
  ProxyConfig cfg;
  cfg.load_factor = 0.25;
  RouteResult res = route(make_batch(10), cfg, 0.0);
  REQUIRE(res.forward.size() == 2);
  // event_time encodes the 0-based position; spec positions 4 and 8 are 1-based
  CHECK(res.forward[0].event_time_ms == 3);
  CHECK(res.forward[1].event_time_ms == 7);
}

TEST_CASE("route error accumulation stays within one record of p*n") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    ProxyConfig cfg;
    cfg.load_factor = std::uniform_real_distribution<>(0.0, 1.0)(rng);
    int n = 1 + static_cast<int>(rng() % 500);
    double carry = std::uniform_real_distribution<>(0.0, 1.0)(rng);
    RouteResult res = route(make_batch(n), cfg, carry);
    CHECK(res.forward.size() + res.drain.size() == static_cast<std::size_t>(n));
    double expect = cfg.load_factor * n;
    CHECK(std::abs(static_cast<double>(res.forward.size()) - expect) < 1.0 + 1e-9);
    CHECK(res.carry >= -1e-12);
    CHECK(res.carry < 1.0 + 1e-12);
  }
}

TEST_CASE("route is deterministic in (batch, p, carry)") {
  ProxyConfig cfg;
  cfg.load_factor = 0.4711;
  Batch b = make_batch(321);
  RouteResult a = route(b, cfg, 0.25);
  RouteResult c = route(b, cfg, 0.25);
  CHECK(a.forward.size() == c.forward.size());
  CHECK(a.carry == c.carry);
  for (std::size_t i = 0; i < a.forward.size(); ++i)
    CHECK(a.forward[i].event_time_ms == c.forward[i].event_time_ms);
}

TEST_CASE("route rejects load factors outside [0,1]") {
  ProxyConfig cfg;
  cfg.load_factor = 1.5;
  CHECK_THROWS_AS(route(make_batch(1), cfg, 0.0), std::invalid_argument);
}

TEST_CASE("flush_backpressure drains everything and empties the queue") {
  Batch pending = make_batch(12);
  Batch drained = flush_backpressure(std::move(pending));
  CHECK(drained.size() == 12);
  CHECK(flush_backpressure({}).empty());
}

TEST_CASE("classify thresholds") {
  ProxyConfig cfg;  // drained_thres 0.05, idle_thres 0.20
  ProxyStats s;
  s.arrived = 100;

  s.drained_backpressure = 10;  // fraction 0.10 > 0.05
  CHECK(classify(s, cfg, 100, 1.0) == ProxyVerdict::Congested);

  s.drained_backpressure = 0;
  s.idle_time = 0.30;  // fraction 0.30 > 0.20
  CHECK(classify(s, cfg, 100, 1.0) == ProxyVerdict::Idle);

  s.drained_backpressure = 2;  // 0.02
  s.idle_time = 0.05;
  CHECK(classify(s, cfg, 100, 1.0) == ProxyVerdict::Stable);
}

TEST_CASE("classify treats an epoch with no records as idle") {
  ProxyConfig cfg;
  ProxyStats s;
  CHECK(classify(s, cfg, 0, 1.0) == ProxyVerdict::Idle);
}

TEST_CASE("classify congested takes precedence over idle") {
  ProxyConfig cfg;
  ProxyStats s;
  s.arrived = 100;
  s.drained_backpressure = 50;
  s.idle_time = 0.9;
  CHECK(classify(s, cfg, 100, 1.0) == ProxyVerdict::Congested);
}

TEST_CASE("replicate_watermark copies to both paths and rejects regressions") {
  WatermarkPair wp = replicate_watermark(Watermark{10'000}, 9'000);
  CHECK(wp.forward.time_ms == 10'000);
  CHECK(wp.drain.time_ms == 10'000);
  CHECK_THROWS_AS(replicate_watermark(Watermark{9'000}, 10'000), std::invalid_argument);
}

TEST_CASE("stats accounting identity holds across route plus flush") {
  ProxyConfig cfg;
  cfg.load_factor = 0.6;
  Batch in = make_batch(173);
  RouteResult res = route(in, cfg, 0.0);
  // downstream processes only some of the forwarded records; rest flushed
  std::size_t processed = res.forward.size() / 2;
  Batch pending(res.forward.begin() + processed, res.forward.end());
  Batch flushed = flush_backpressure(std::move(pending));

  ProxyStats s;
  s.arrived = static_cast<std::int64_t>(in.size());
  s.forwarded = static_cast<std::int64_t>(processed);
  s.drained_by_policy = static_cast<std::int64_t>(res.drain.size());
  s.drained_backpressure = static_cast<std::int64_t>(flushed.size());
  CHECK(s.arrived == s.forwarded + s.drained_by_policy + s.drained_backpressure);
}
