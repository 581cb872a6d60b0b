#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jarvis/profile.hpp"
#include "jarvis/workloads.hpp"

using namespace jarvis;

namespace {

InstrumentedPlan s2s_plan() {
  QueryPlan p = build_s2sprobe();
  p.source_eligible_len = apply_source_rules(p);
  return instrument(p);
}

Batch epoch_batch(std::int64_t epoch = 0) {
  PingmeshGenConfig cfg;
  Batch b = gen_pingmesh(cfg, epoch);
  assign_windows(b, 10.0);
  return b;
}

}  // namespace

TEST_CASE("ample-budget profile recovers the calibrated filter cost and relay ratio") {
  InstrumentedPlan plan = s2s_plan();
  Batch in = epoch_batch();
  CostModel cost = calibrated_cost_s2s();
  std::vector<OperatorState> states = make_states(plan.plan);
  ProfileRun run = profile_epoch(plan, in, 10.0, cost, states, nullptr);

  REQUIRE(run.est.c.size() == 2);
  // filter: 13% of a core at the full 26.2 Mbps input rate
  double n = static_cast<double>(in.size());
  CHECK(run.est.c[0] * n == doctest::Approx(0.13).epsilon(0.01));
  CHECK(run.est.r[0] == doctest::Approx(0.86).epsilon(0.005));
  // aggregate: 80% of a core on the filter's output
  CHECK(run.est.c[1] * 0.86 * n == doctest::Approx(0.80).epsilon(0.02));
  CHECK(run.est.confidence[0] == doctest::Approx(1.0));
  CHECK(run.est.confidence[1] == doctest::Approx(1.0));
  CHECK(run.est.n_records == n);
  // nothing left over under an ample budget
  for (const Batch& d : run.drained) CHECK(d.empty());
}

TEST_CASE("zero-budget profile reuses the previous estimate with zero confidence") {
  InstrumentedPlan plan = s2s_plan();
  Batch in = epoch_batch();
  CostModel cost = calibrated_cost_s2s();
  std::vector<OperatorState> states = make_states(plan.plan);

  ProfileEstimate prev;
  prev.c = {1e-6, 2e-5};
  prev.r = {0.86, 0.02};
  prev.budget_C = 0.8;
  prev.n_records = 100.0;
  prev.confidence = {1.0, 1.0};

  ProfileRun run = profile_epoch(plan, in, 0.0, cost, states, &prev);
  CHECK(run.est.c == prev.c);
  CHECK(run.est.r == prev.r);
  CHECK(run.est.confidence[0] == 0.0);
  CHECK(run.est.confidence[1] == 0.0);
  CHECK(run.consumed == 0.0);
  // every record drained losslessly at the first proxy
  std::size_t drained = 0;
  for (const Batch& d : run.drained) drained += d.size();
  CHECK(drained == in.size());
}

TEST_CASE("half-budget aggregate profile: extrapolated cost, confidence about one half") {
  // single-operator plan: the aggregate alone, so the budget split is trivial
  QueryPlan p;
  p.operators = {OperatorSpec::group_aggregate(1, {"src_ip", "dst_ip"},
                                               {Aggregate::Avg, Aggregate::Max,
                                                Aggregate::Min})};
  p.window_s = 10.0;
  p.source_eligible_len = apply_source_rules(p);
  InstrumentedPlan plan = instrument(p);

  Batch in = epoch_batch();
  CostModel cost = calibrated_cost_s2s();
  std::vector<OperatorState> full_states = make_states(p);
  ProfileRun full = profile_epoch(plan, in, 10.0, cost, full_states, nullptr);
  REQUIRE(full.est.confidence[0] == doctest::Approx(1.0));

  std::vector<OperatorState> half_states = make_states(p);
  double half_budget = full.consumed * 0.5;
  ProfileRun half = profile_epoch(plan, in, half_budget, cost, half_states, nullptr);
  CHECK(half.est.confidence[0] == doctest::Approx(0.5).epsilon(0.03));
  // per-record cost extrapolated from the processed half matches the full run
  CHECK(half.est.c[0] == doctest::Approx(full.est.c[0]).epsilon(0.05));
  // the unprocessed suffix is drained, not lost
  CHECK(half.drained[0].size() + static_cast<std::size_t>(
                                     half.est.confidence[0] * static_cast<double>(in.size()) +
                                     0.5) == in.size());
}

TEST_CASE("profile budget is split across operators and consumption never exceeds it") {
  InstrumentedPlan plan = s2s_plan();
  Batch in = epoch_batch();
  CostModel cost = calibrated_cost_s2s();
  for (double budget : {0.05, 0.2, 0.5, 0.93}) {
    std::vector<OperatorState> states = make_states(plan.plan);
    ProfileRun run = profile_epoch(plan, in, budget, cost, states, nullptr);
    CHECK(run.consumed <= budget + 1e-9);
    // lossless: processed-forward plus drained covers the whole input at proxy 1
    CHECK(run.est.confidence[0] <= 1.0);
    for (double conf : run.est.confidence) CHECK(conf >= 0.0);
  }
}

TEST_CASE("profile weights the split by previous costs on a re-profile") {
  InstrumentedPlan plan = s2s_plan();
  Batch in = epoch_batch();
  CostModel cost = calibrated_cost_s2s();

  std::vector<OperatorState> s1 = make_states(plan.plan);
  ProfileRun uniform = profile_epoch(plan, in, 0.4, cost, s1, nullptr);

  // seed with the true cost shape: the aggregate gets most of the budget
  ProfileEstimate prev = uniform.est;
  std::vector<OperatorState> s2 = make_states(plan.plan);
  ProfileRun weighted = profile_epoch(plan, in, 0.4, cost, s2, &prev);

  // the weighted split profiles more aggregate records than the uniform one
  CHECK(weighted.est.confidence[1] >= uniform.est.confidence[1]);
}
