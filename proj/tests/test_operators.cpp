#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "jarvis/operators.hpp"
#include "jarvis/workloads.hpp"

using namespace jarvis;

namespace {

Record ping(std::int64_t t_ms, std::uint32_t src, std::uint32_t dst, std::int32_t rtt,
            std::uint8_t err) {
  Record r;
  r.event_time_ms = t_ms;
  r.wire_size = kPingWireBytes;
  PingPayload p;
  p.src_ip = src;
  p.dst_ip = dst;
  p.rtt_us = rtt;
  p.err_code = err;
  r.payload = p;
  return r;
}

CostModel flat_cost(double per_record) {
  CostModel cm;
  for (OpKind k : {OpKind::Filter, OpKind::Map, OpKind::GroupAggregate, OpKind::JoinStatic,
                   OpKind::Project})
    cm.per_record[k] = per_record;
  return cm;
}

}  // namespace

TEST_CASE("filter keeps 86 of 100 records when 14 carry error codes") {
  Batch in;
  for (int i = 0; i < 100; ++i)
    in.push_back(ping(i, 1, 2, 100, i < 14 ? 1 : 0));
  OperatorSpec f = build_s2sprobe().operators[0];
  OperatorState st;
  OperatorResult res = run_operator(f, in, st, 1.0, flat_cost(1e-6));
  CHECK(res.processed == 100);
  CHECK(res.output.size() == 86);
  CHECK(res.pending.empty());
  CHECK(res.consumed == doctest::Approx(100e-6));
}

TEST_CASE("zero budget processes nothing and leaves all input pending") {
  Batch in;
  for (int i = 0; i < 10; ++i) in.push_back(ping(i, 1, 2, 100, 0));
  for (const OperatorSpec& op : build_t2tprobe().operators) {
    OperatorState st;
    st.table = make_tor_table(64, 4);
    OperatorResult res = run_operator(op, in, st, 0.0, flat_cost(1e-6));
    CHECK(res.processed == 0);
    CHECK(res.output.empty());
    CHECK(res.consumed == 0.0);
    CHECK(res.pending.size() == in.size());
  }
}

TEST_CASE("group aggregate emits one row per group at window close") {
  Batch in = {ping(0, 7, 9, 10, 0), ping(1, 7, 9, 30, 0)};
  assign_windows(in, 10.0);
  OperatorSpec g = build_s2sprobe().operators[1];
  OperatorState st;
  OperatorResult res = run_operator(g, in, st, 1.0, flat_cost(1e-6));
  CHECK(res.output.empty());  // nothing mid-window
  CHECK(res.processed == 2);
  Batch rows = take_state(g, st, 10.0);
  REQUIRE(rows.size() == 1);
  const auto& row = std::get<GroupRowPayload>(rows[0].payload);
  CHECK(row.count == 2);
  CHECK(row.sum == 40);  // avg 20
  CHECK(row.max == 30);
  CHECK(row.min == 10);
  CHECK(st.windows.empty());  // take_state clears
}

TEST_CASE("mid-budget cutoff is lossless: processed + pending == input") {
  std::mt19937_64 rng(11);
  OperatorSpec f = build_s2sprobe().operators[0];
  for (int trial = 0; trial < 50; ++trial) {
    Batch in;
    int n = 1 + static_cast<int>(rng() % 200);
    for (int i = 0; i < n; ++i)
      in.push_back(ping(i, 1, 2, 100, rng() % 5 == 0 ? 1 : 0));
    double budget = std::uniform_real_distribution<>(0.0, 2e-4)(rng);
    OperatorState st;
    OperatorResult res = run_operator(f, in, st, budget, flat_cost(1e-6));
    CHECK(res.processed + res.pending.size() == in.size());
    CHECK(res.consumed <= budget + 1e-15);
    // pending is the unprocessed suffix, in order
    for (std::size_t i = 0; i < res.pending.size(); ++i)
      CHECK(res.pending[i].event_time_ms == in[res.processed + i].event_time_ms);
  }
}

TEST_CASE("merge_partials adds counts and sums, takes max/min") {
  PartialAggregate a{1, 3, 30, 15, 5};
  PartialAggregate b{1, 1, 20, 20, 20};
  PartialAggregate m = merge_partials(a, b);
  CHECK(m.count == 4);
  CHECK(m.sum_rtt == 50);
  CHECK(m.max_rtt == 20);
  CHECK(m.min_rtt == 5);
}

TEST_CASE("merge_partials identity and key mismatch") {
  PartialAggregate x{9, 5, 100, 40, 10};
  PartialAggregate id{9, 0, 0, 0, 0};
  PartialAggregate m = merge_partials(x, id);
  CHECK(m.count == x.count);
  CHECK(m.sum_rtt == x.sum_rtt);
  CHECK(m.max_rtt == x.max_rtt);
  CHECK(m.min_rtt == x.min_rtt);
  PartialAggregate other{10, 1, 1, 1, 1};
  CHECK_THROWS_AS(merge_partials(x, other), std::invalid_argument);
}

TEST_CASE("merge_partials is commutative and associative on random pairs") {
  std::mt19937_64 rng(5);
  auto rand_pa = [&] {
    PartialAggregate p;
    p.group_key = 42;
    p.count = 1 + rng() % 100;
    p.max_rtt = static_cast<std::int64_t>(rng() % 10000);
    p.min_rtt = std::min<std::int64_t>(p.max_rtt, rng() % 10000);
    p.sum_rtt = p.count * (p.min_rtt + p.max_rtt) / 2;
    return p;
  };
  auto eq = [](const PartialAggregate& a, const PartialAggregate& b) {
    return a.count == b.count && a.sum_rtt == b.sum_rtt && a.max_rtt == b.max_rtt &&
           a.min_rtt == b.min_rtt;
  };
  for (int i = 0; i < 200; ++i) {
    PartialAggregate a = rand_pa(), b = rand_pa(), c = rand_pa();
    CHECK(eq(merge_partials(a, b), merge_partials(b, a)));
    CHECK(eq(merge_partials(merge_partials(a, b), c), merge_partials(a, merge_partials(b, c))));
  }
}

TEST_CASE("merged average equals the average over concatenated raw records") {
  std::mt19937_64 rng(17);
  std::vector<std::int64_t> rtts;
  PartialAggregate left{1, 0, 0, INT64_MIN, INT64_MAX};
  PartialAggregate right{1, 0, 0, INT64_MIN, INT64_MAX};
  for (int i = 0; i < 1000; ++i) {
    std::int64_t rtt = static_cast<std::int64_t>(rng() % 100000);
    rtts.push_back(rtt);
    PartialAggregate& side = i % 2 ? right : left;
    side.count += 1;
    side.sum_rtt += rtt;
    side.max_rtt = std::max(side.max_rtt, rtt);
    side.min_rtt = std::min(side.min_rtt, rtt);
  }
  PartialAggregate m = merge_partials(left, right);
  std::int64_t sum = 0;
  for (auto v : rtts) sum += v;
  CHECK(m.count == 1000);
  CHECK(m.sum_rtt == sum);  // avg from (count,sum) is exact
  CHECK(m.max_rtt == *std::max_element(rtts.begin(), rtts.end()));
  CHECK(m.min_rtt == *std::min_element(rtts.begin(), rtts.end()));
}

TEST_CASE("observe_relay_ratio basics") {
  CHECK(observe_relay_ratio(86 * kPingWireBytes, 100 * kPingWireBytes) ==
        doctest::Approx(0.86));
  CHECK(observe_relay_ratio(500, 500) == 1.0);
  CHECK(observe_relay_ratio(1000, 500) == 1.0);  // clamped
  CHECK(observe_relay_ratio(0, 500) == 0.0);
  CHECK_THROWS_AS(observe_relay_ratio(10, 0), std::invalid_argument);
}

TEST_CASE("group aggregate collapsing 1000 records into 50 groups relays about 0.05") {
  Batch in;
  for (int i = 0; i < 1000; ++i) in.push_back(ping(i, i % 50, 1, 100, 0));
  assign_windows(in, 10.0);
  OperatorSpec g = build_s2sprobe().operators[1];
  OperatorState st;
  run_operator(g, in, st, 1.0, flat_cost(1e-6));
  Batch rows = take_state(g, st, 10.0);
  REQUIRE(rows.size() == 50);
  double r = observe_relay_ratio(batch_bytes(rows), batch_bytes(in));
  // 50 group rows of 40 bytes vs 1000 ping records of 86 bytes
  CHECK(r == doctest::Approx(50.0 * 40 / (1000.0 * 86)).epsilon(1e-9));
}

TEST_CASE("cost model: per-op override and monotone lookup scaling") {
  CostModel cm = flat_cost(1e-6);
  OperatorSpec f = OperatorSpec::filter(1);
  CHECK(cm.record_cost(f, 0, 0) == doctest::Approx(1e-6));
  cm.per_op_override[1] = 5e-6;
  CHECK(cm.record_cost(f, 0, 0) == doctest::Approx(5e-6));

  CostModel g = flat_cost(1e-6);
  g.group_lookup_scale = 1e-8;
  OperatorSpec agg = build_s2sprobe().operators[1];
  double c_small = g.record_cost(agg, 10, 0);
  double c_big = g.record_cost(agg, 10000, 0);
  CHECK(c_big > c_small);

  CostModel j = flat_cost(1e-6);
  j.join_lookup_scale = 1e-8;
  OperatorSpec join = OperatorSpec::join_static(1, "t");
  CHECK(j.record_cost(join, 0, 5000) > j.record_cost(join, 0, 500));
}

TEST_CASE("join static maps ips through the table and unknown operator throws") {
  auto table = make_tor_table(256, 8);  // 32 ips per tor
  OperatorSpec join = build_t2tprobe().operators[1];
  OperatorState st;
  st.table = table;
  Batch in = {ping(0, 37, 200, 100, 0)};
  OperatorResult res = run_operator(join, in, st, 1.0, flat_cost(1e-6));
  REQUIRE(res.output.size() == 1);
  const auto& p = std::get<PingTorPayload>(res.output[0].payload);
  CHECK(p.src_tor == 37 / 32);

  OperatorSpec bad = OperatorSpec::stream_stream_join(1);
  OperatorState st2;
  CHECK_THROWS(run_operator(bad, in, st2, 1.0, flat_cost(1e-6)));
}
