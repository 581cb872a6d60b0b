#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "jarvis/baselines.hpp"
#include "jarvis/lp_partition.hpp"
#include "jarvis/workloads.hpp"

using namespace jarvis;

namespace {

ProfileEstimate probe_estimate(double budget) {
  ProfileEstimate est;
  double n = 38081.0;
  est.c = {0.13 / n, 0.80 / (0.86 * n)};
  est.r = {0.86, 0.011};
  est.budget_C = budget;
  est.n_records = n;
  est.confidence = {1.0, 1.0};
  return est;
}

}  // namespace

TEST_CASE("all_sp and all_src produce the constant vectors") {
  CHECK(all_sp(2) == std::vector<double>{0.0, 0.0});
  CHECK(all_sp(1) == std::vector<double>{0.0});
  CHECK(all_sp(4) == std::vector<double>(4, 0.0));
  CHECK(all_src(2) == std::vector<double>{1.0, 1.0});
  CHECK(all_src(1) == std::vector<double>{1.0});
  CHECK(all_src(4) == std::vector<double>(4, 1.0));
}

TEST_CASE("filter_src keeps the leading filter run local") {
  QueryPlan fg;
  fg.operators = {OperatorSpec::filter(1),
                  OperatorSpec::group_aggregate(2, {"k"}, {Aggregate::Count})};
  CHECK(filter_src(fg) == std::vector<double>{1.0, 0.0});

  QueryPlan mf;
  mf.operators = {OperatorSpec::map(1), OperatorSpec::filter(2)};
  CHECK(filter_src(mf) == std::vector<double>{0.0, 0.0});

  QueryPlan ffm;
  ffm.operators = {OperatorSpec::filter(1), OperatorSpec::filter(2), OperatorSpec::map(3)};
  CHECK(filter_src(ffm) == std::vector<double>{1.0, 1.0, 0.0});
}

TEST_CASE("best_op picks the largest affordable all-or-nothing prefix") {
  // F costs 13% of the core, G+R 80% more: 55% affords only F
  CHECK(best_op(probe_estimate(0.55)) == std::vector<double>{1.0, 0.0});
  // a full core affords both
  CHECK(best_op(probe_estimate(1.0)) == std::vector<double>{1.0, 1.0});
  // 5% affords nothing
  CHECK(best_op(probe_estimate(0.05)) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("best_op requires an estimate") {
  ProfileEstimate empty;
  CHECK_THROWS_AS(best_op(empty), std::invalid_argument);
}

TEST_CASE("lb_dp splits the first proxy proportionally to compute") {
  auto lf = lb_dp(0.60, 0.25);
  REQUIRE(lf.size() >= 1);
  CHECK(lf[0] == doctest::Approx(0.60 / 0.85).epsilon(1e-9));
  for (std::size_t i = 1; i < lf.size(); ++i) CHECK(lf[i] == 1.0);

  CHECK(lb_dp(0.60, 0.0)[0] == doctest::Approx(1.0));
  CHECK(lb_dp(0.0, 0.25)[0] == doctest::Approx(0.0));
  CHECK_THROWS_AS(lb_dp(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("policy names round-trip") {
  for (PolicyKind k : {PolicyKind::AllSP, PolicyKind::AllSrc, PolicyKind::FilterSrc,
                       PolicyKind::BestOP, PolicyKind::LBDP, PolicyKind::Jarvis})
    CHECK(policy_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(policy_from_string("nonsense"), std::invalid_argument);
}

TEST_CASE("dominance: the LP's drained fraction never exceeds best_op's") {
  std::mt19937_64 rng(88);
  std::uniform_real_distribution<> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    int m = 1 + static_cast<int>(rng() % 4);
    ProfileEstimate est;
    est.n_records = 1000.0;
    for (int i = 0; i < m; ++i) {
      est.c.push_back(unit(rng) * 1e-3);
      est.r.push_back(unit(rng));
    }
    est.budget_C = unit(rng) * 1.2;
    est.confidence.assign(m, 1.0);

    PartitionProblem prob = est.to_problem();
    double lp_drained = solve_lp(prob).drained_fraction;
    double bo_drained = objective(prob, best_op(est));
    CHECK(lp_drained <= bo_drained + kLpTolerance);
    // the best_op vector itself must be budget-feasible
    CHECK(compute_usage(prob, best_op(est)) <= prob.budget_per_record() + kLpTolerance);
  }
}

TEST_CASE("exact_joint: zero budgets force everything remote") {
  JointInstance inst;
  inst.m = 2;
  inst.rc = {2.0, 1.0};
  for (int n = 0; n < 2; ++n) {
    JointNode node;
    node.budget = 0.0;
    node.rate = 1000.0;
    node.cost = {1e-3, 1e-3};
    node.relay = {0.9, 0.5};
    node.out_bytes = {86.0, 86.0, 40.0};
    node.link_bw = 1e9;
    inst.nodes.push_back(node);
  }
  CHECK(exact_joint(inst) == std::vector<int>{0, 0});
}

TEST_CASE("exact_joint: a node that affords full local execution gets b = M") {
  JointInstance inst;
  inst.m = 2;
  inst.rc = {2.0, 1.0};
  JointNode rich;
  rich.budget = 10.0;
  rich.rate = 1000.0;
  rich.cost = {1e-3, 1e-3};
  rich.relay = {0.9, 0.5};
  rich.out_bytes = {86.0, 86.0, 40.0};
  rich.link_bw = 100.0;  // slow link: local execution beats draining
  JointNode poor = rich;
  poor.budget = 0.0;
  inst.nodes = {rich, poor};
  auto b = exact_joint(inst);
  CHECK(b[0] == 2);
  CHECK(b[1] == 0);
}

TEST_CASE("exact_joint guards instance size and rc ordering") {
  JointInstance inst;
  inst.m = 5;
  inst.rc = {5, 4, 3, 2, 1};
  inst.nodes.resize(1);
  CHECK_THROWS_AS(exact_joint(inst), std::invalid_argument);

  JointInstance bad;
  bad.m = 2;
  bad.rc = {1.0, 2.0};  // not decreasing
  JointNode node;
  node.budget = 1.0;
  node.rate = 10.0;
  node.cost = {1e-3, 1e-3};
  node.relay = {0.9, 0.5};
  node.out_bytes = {86.0, 86.0, 40.0};
  node.link_bw = 1e9;
  bad.nodes = {node};
  CHECK_THROWS_AS(exact_joint(bad), std::invalid_argument);
}

TEST_CASE("exact_joint result satisfies every node's drain-time constraint") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    JointInstance inst;
    inst.m = 2;
    inst.rc = {2.0, 1.0};
    int nd = 1 + static_cast<int>(rng() % 3);
    for (int n = 0; n < nd; ++n) {
      JointNode node;
      node.budget = unit(rng);
      node.rate = 100.0 + unit(rng) * 900.0;
      node.cost = {unit(rng) * 1e-3, unit(rng) * 1e-3};
      node.relay = {0.5 + 0.5 * unit(rng), unit(rng)};
      node.out_bytes = {86.0, 86.0 * node.relay[0], 40.0};
      node.link_bw = 1e4 + unit(rng) * 1e6;
      inst.nodes.push_back(node);
    }
    auto b = exact_joint(inst);
    REQUIRE(b.size() == inst.nodes.size());
    for (int v : b) {
      CHECK(v >= 0);
      CHECK(v <= inst.m);
    }
    // b = 0 is always feasible, so a solution always exists
  }
}
