#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "jarvis/cli_config.hpp"

using namespace jarvis;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "test.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("an empty file parses to the default config") {
  ExperimentConfig cfg = parse_config("", "empty.cfg");
  CHECK(cfg == ExperimentConfig{});
}

TEST_CASE("section keys land in the right fields") {
  const std::string text =
      "[experiment]\n"
      "query = t2tprobe\n"
      "policy = best-op\n"
      "epochs = 120\n"
      "warmup_epochs = 40\n"
      "seed = 9\n"
      "\n"
      "[topology]\n"
      "n_sources = 4\n"
      "n_queries = 2\n"
      "link_per_query_mbps = 40\n"
      "sp_ingest_mbps = 460.8\n"
      "\n"
      "[workload]\n"
      "rate_mbps = 13.1\n"
      "peer_count = 5000\n"
      "table_size = 500\n"
      "table_size_steps = 20:5000\n"
      "\n"
      "[adaptation]\n"
      "cpu_budget_cores = 0.3\n"
      "cpu_budget_steps = 60:0.9\n"
      "lp_init = false\n"
      "\n"
      "[costs]\n"
      "op2_per_record_s = 1e-6\n";
  ExperimentConfig cfg = parse_config(text, "t.cfg");
  CHECK(cfg.query == "t2tprobe");
  CHECK(cfg.policy == PolicyKind::BestOP);
  CHECK(cfg.epochs == 120);
  CHECK(cfg.warmup_epochs == 40);
  CHECK(cfg.seed == 9);
  CHECK(cfg.n_sources == 4);
  CHECK(cfg.n_queries == 2);
  CHECK(cfg.link_mbps == 40.0);
  CHECK(cfg.sp_ingest_mbps == 460.8);
  CHECK(cfg.rate_mbps.base == 13.1);
  CHECK(cfg.peer_count == 5000);
  CHECK(cfg.table_size.base == 500.0);
  REQUIRE(cfg.table_size.steps.size() == 1);
  CHECK(cfg.table_size.steps[0].first == 20);
  CHECK(cfg.table_size.steps[0].second == 5000.0);
  CHECK(cfg.cpu_budget.base == 0.3);
  REQUIRE(cfg.cpu_budget.steps.size() == 1);
  CHECK(cfg.cpu_budget.steps[0] == std::pair<std::int64_t, double>{60, 0.9});
  CHECK_FALSE(cfg.lp_init);
  REQUIRE(cfg.cost_per_op.count(2) == 1);
  CHECK(cfg.cost_per_op.at(2) == 1e-6);
}

TEST_CASE("round trip: parse(serialize(cfg)) == cfg") {
  ExperimentConfig cfg;
  cfg.query = "loganalytics";
  cfg.policy = PolicyKind::LBDP;
  cfg.epochs = 77;
  cfg.warmup_epochs = 13;
  cfg.n_sources = 3;
  cfg.cpu_budget = StepSchedule{0.123456789, {{10, 0.9}, {40, 0.7}}};
  cfg.rate_mbps = StepSchedule{49.6, {{25, 99.2}}};
  cfg.link_mbps = 20.48;
  cfg.sp_ingest_mbps = 40.96;
  cfg.seed = 1234567890123ull;
  cfg.error_rate = 0.1375;
  cfg.lbdp_sp_share = 0.256;
  cfg.cost_per_op[3] = 2.5e-7;
  cfg.lp_init = false;
  cfg.fine_tune = false;
  ExperimentConfig back = parse_config(serialize_config(cfg), "rt.cfg");
  CHECK(back == cfg);
}

TEST_CASE("round trip preserves the default config too") {
  ExperimentConfig cfg;
  CHECK(parse_config(serialize_config(cfg), "rt2.cfg") == cfg);
}

TEST_CASE("errors carry the file and line") {
  CHECK(error_of("[experiment]\nbogus = 1\n").find("test.cfg:2:") == 0);
  CHECK(error_of("[nonsense]\n").find("test.cfg:1:") == 0);
  CHECK(error_of("[experiment]\nepochs = owl\n").find("test.cfg:2:") == 0);
  CHECK(error_of("[experiment]\nepochs 5\n").find("test.cfg:2:") == 0);
  // keys outside a section
  CHECK(error_of("epochs = 5\n").find("test.cfg:1:") == 0);
}

TEST_CASE("semantic validation failures are config errors") {
  CHECK_THROWS_AS(parse_config("[experiment]\nepochs = 0\n", "v.cfg"), ConfigError);
  CHECK_THROWS_AS(
      parse_config("[experiment]\nepochs = 10\n[adaptation]\ncpu_budget_steps = 50:0.9\n",
                   "v.cfg"),
      ConfigError);
}

TEST_CASE("load_config reports missing files as config errors") {
  CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("comments and blank lines are ignored") {
  ExperimentConfig cfg = parse_config(
      "# comment\n\n[experiment]\n# inner\nepochs = 50\nwarmup_epochs = 5\n", "c.cfg");
  CHECK(cfg.epochs == 50);
  CHECK(cfg.warmup_epochs == 5);
}

TEST_CASE("lp instance files parse into partition problems") {
  const std::string text =
      "m 2\n"
      "n_records 100\n"
      "budget 0.3\n"
      "c 0.001 0.004\n"
      "r 0.86 0.05\n";
  PartitionProblem prob = parse_instance(text, "i.txt");
  CHECK(prob.m == 2);
  CHECK(prob.n_records == 100.0);
  CHECK(prob.budget == 0.3);
  CHECK(prob.c == std::vector<double>{0.001, 0.004});
  CHECK(prob.r == std::vector<double>{0.86, 0.05});
}

TEST_CASE("lp instance errors are line-anchored") {
  try {
    parse_instance("m 2\nn_records 100\nbudget 0.3\nc 0.001\nr 0.86 0.05\n", "i.txt");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("i.txt") == 0);
  }
}
