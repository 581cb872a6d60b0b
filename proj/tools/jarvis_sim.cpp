#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "jarvis/cli_config.hpp"
#include "jarvis/profile.hpp"
#include "jarvis/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNonConvergence = 3;

int log_level() {
  static const int level = [] {
    const char* v = std::getenv("JARVIS_SIM_LOG");
    if (!v) return 0;
    if (std::string(v) == "debug" || std::string(v) == "2") return 2;
    if (std::string(v) == "info" || std::string(v) == "1") return 1;
    return 0;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[jarvis-sim] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[jarvis-sim] " << msg << "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

int cmd_run(const std::string& config_path, const std::string& csv_path,
            const std::string& summary_path, long seed_override, bool require_convergence) {
  jarvis::ExperimentConfig cfg = jarvis::load_config(config_path);
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  log_debug("config:\n" + jarvis::serialize_config(cfg));
  log_info("running " + cfg.query + " / " + jarvis::to_string(cfg.policy));
  jarvis::RunResult run = jarvis::run_experiment(cfg);
  std::ostringstream csv;
  jarvis::write_csv(run, csv);
  if (csv_path.empty() || csv_path == "-")
    std::cout << csv.str();
  else
    write_file(csv_path, csv.str());
  const std::string summary = jarvis::summarize(cfg, run);
  if (summary_path.empty() || summary_path == "-")
    std::cerr << summary;
  else
    write_file(summary_path, summary);
  if (run.non_convergence) {
    log_info("non-convergence event logged");
    if (require_convergence) return kExitNonConvergence;
  }
  return kExitOk;
}

struct SweepRow {
  double value = 0.0;
  double throughput = 0.0;
  double outbound = 0.0;
  bool non_convergence = false;
};

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<double>& values, int jobs, const std::string& csv_path) {
  if (values.empty()) throw jarvis::ConfigError("sweep: empty value list");
  const jarvis::ExperimentConfig base = jarvis::load_config(config_path);
  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::string error;
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < values.size(); i = next.fetch_add(1)) {
      try {
        jarvis::ExperimentConfig cfg = base;
        if (axis == "cpu_budget") {
          cfg.cpu_budget = {values[i], {}};
        } else if (axis == "n_sources") {
          cfg.n_sources = static_cast<int>(values[i]);
        } else {  // input_scale
          cfg.rate_mbps.base *= values[i];
          for (auto& [e, v] : cfg.rate_mbps.steps) v *= values[i];
        }
        jarvis::validate(cfg);
        jarvis::RunResult run = jarvis::run_experiment(cfg);
        rows[i] = SweepRow{values[i],
                           jarvis::measure_throughput(run, cfg.latency_bound_s,
                                                      cfg.warmup_epochs),
                           jarvis::mean_outbound_mbps(run, cfg.warmup_epochs),
                           run.non_convergence};
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (error.empty()) error = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(values.size())));
  log_info("sweep over " + axis + ", " + std::to_string(values.size()) + " points, " +
           std::to_string(n_threads) + " jobs");
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (!error.empty()) throw jarvis::ConfigError(error);

  std::ostringstream os;
  os << "# jarvis-sim sweep v1\n" << axis << ",throughput_mbps,outbound_mbps,non_convergence\n";
  for (const SweepRow& r : rows)
    os << r.value << ',' << r.throughput << ',' << r.outbound << ','
       << (r.non_convergence ? "true" : "false") << '\n';
  if (csv_path.empty() || csv_path == "-")
    std::cout << os.str();
  else
    write_file(csv_path, os.str());
  return kExitOk;
}

int cmd_compare(const std::string& config_path, const std::vector<std::string>& policies) {
  if (policies.size() < 2) throw jarvis::ConfigError("compare: need at least 2 policies");
  const jarvis::ExperimentConfig base = jarvis::load_config(config_path);
  std::vector<double> tput(policies.size());
  for (std::size_t i = 0; i < policies.size(); ++i) {
    jarvis::ExperimentConfig cfg = base;
    cfg.policy = jarvis::policy_from_string(policies[i]);  // throws on unknown
    log_info("compare: running " + policies[i]);
    jarvis::RunResult run = jarvis::run_experiment(cfg);
    tput[i] = jarvis::measure_throughput(run, cfg.latency_bound_s, cfg.warmup_epochs);
  }
  std::printf("policy,throughput_mbps\n");
  for (std::size_t i = 0; i < policies.size(); ++i)
    std::printf("%s,%.4f\n", policies[i].c_str(), tput[i]);
  for (std::size_t i = 1; i < policies.size(); ++i)
    std::printf("ratio %s/%s = %.4f\n", policies[0].c_str(), policies[i].c_str(),
                tput[i] > 0.0 ? tput[0] / tput[i] : 0.0);
  return kExitOk;
}

int cmd_solve(const std::string& instance_path) {
  jarvis::PartitionProblem prob = jarvis::load_instance(instance_path);
  jarvis::PartitionSolution sol = jarvis::solve_lp(prob);
  std::printf("e =");
  for (double v : sol.e) std::printf(" %.6f", v);
  std::printf("\np =");
  for (double v : sol.p) std::printf(" %.6f", v);
  std::printf("\ndrained_fraction = %.6f\ncompute_used_per_record = %.6g\n",
              sol.drained_fraction, sol.compute_used);
  return kExitOk;
}

int cmd_gen(const std::string& config_path, std::int64_t epoch, std::int64_t max_records) {
  jarvis::ExperimentConfig cfg = jarvis::load_config(config_path);
  jarvis::Batch batch;
  if (cfg.query == "loganalytics") {
    jarvis::LogGenConfig g;
    g.rate_mbps = cfg.rate_mbps.at(epoch);
    g.tenant_count = cfg.tenant_count;
    g.pattern_hit_rate = cfg.pattern_hit_rate;
    g.seed = cfg.seed;
    batch = jarvis::gen_log(g, epoch);
  } else {
    jarvis::PingmeshGenConfig g;
    g.rate_mbps = cfg.rate_mbps.at(epoch);
    g.error_rate = cfg.error_rate;
    g.peer_count = cfg.peer_count;
    g.spike_every_s = cfg.spike_every_s;
    g.spike_duration_s = cfg.spike_duration_s;
    g.seed = cfg.seed;
    batch = jarvis::gen_pingmesh(g, epoch);
  }
  std::printf("# jarvis-sim gen v1\nevent_time_ms,wire_size,payload\n");
  std::int64_t n = 0;
  for (const jarvis::Record& r : batch) {
    if (max_records >= 0 && n++ >= max_records) break;
    std::printf("%lld,%d,%s\n", static_cast<long long>(r.event_time_ms), r.wire_size,
                jarvis::payload_to_string(r.payload).c_str());
  }
  return kExitOk;
}

int cmd_explain_costs(const std::string& query, const std::string& config_path) {
  jarvis::ExperimentConfig cfg;
  if (!config_path.empty())
    cfg = jarvis::load_config(config_path);
  else
    cfg.query = query;
  jarvis::validate(cfg);
  const jarvis::QueryPlan plan = cfg.query == "s2sprobe"   ? jarvis::build_s2sprobe()
                                 : cfg.query == "t2tprobe" ? jarvis::build_t2tprobe()
                                                           : jarvis::build_loganalytics();
  jarvis::CostModel cost = cfg.query == "s2sprobe"   ? jarvis::calibrated_cost_s2s()
                           : cfg.query == "t2tprobe" ? jarvis::calibrated_cost_t2t()
                                                     : jarvis::calibrated_cost_log();
  for (const auto& [id, v] : cfg.cost_per_op) cost.per_op_override[id] = v;
  std::printf("query: %s\n", cfg.query.c_str());
  std::printf("group_lookup_scale = %.6g\njoin_lookup_scale = %.6g\n", cost.group_lookup_scale,
              cost.join_lookup_scale);
  std::printf("operator,kind,per_record_s,source\n");
  for (const jarvis::OperatorSpec& op : plan.operators) {
    const auto it = cost.per_op_override.find(op.id);
    const bool overridden = it != cost.per_op_override.end();
    const auto kind_it = cost.per_record.find(op.kind);
    const double v = overridden ? it->second
                     : kind_it != cost.per_record.end() ? kind_it->second
                                                        : 0.0;
    std::printf("%d,%s,%.9g,%s\n", op.id, jarvis::to_string(op.kind), v,
                overridden ? "config" : "calibrated");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jarvis-sim: adaptive query-partitioning simulator"};
  app.require_subcommand(1);

  std::string config_path, csv_path, summary_path, axis, instance_path, query = "s2sprobe";
  std::vector<double> values;
  std::vector<std::string> policies;
  long seed_override = -1;
  std::int64_t epoch = 0, max_records = -1;
  int jobs = 1;
  bool require_convergence = false;

  auto* run = app.add_subcommand("run", "run one experiment; emit metrics CSV + summary");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--csv", csv_path, "metrics CSV path (default stdout)");
  run->add_option("--summary", summary_path, "summary path (default stderr)");
  run->add_option("--seed", seed_override, "override the config seed");
  run->add_flag("--require-convergence", require_convergence,
                "exit 3 if a non-convergence event is logged");

  auto* sweep = app.add_subcommand("sweep", "run one experiment per axis value");
  sweep->add_option("--config", config_path, "experiment config file")->required();
  sweep->add_option("--axis", axis, "cpu_budget | n_sources | input_scale")
      ->required()
      ->check(CLI::IsMember({"cpu_budget", "n_sources", "input_scale"}));
  sweep->add_option("--values", values, "axis values")->required()->delimiter(',');
  sweep->add_option("--jobs", jobs, "max concurrent experiments")->default_val(1);
  sweep->add_option("--csv", csv_path, "output CSV path (default stdout)");

  auto* compare = app.add_subcommand("compare", "run several policies on identical seeds");
  compare->add_option("--config", config_path, "experiment config file")->required();
  compare->add_option("--policies", policies, "policy names")->required()->delimiter(',');

  auto* solve = app.add_subcommand("solve", "solve one LP partitioning instance");
  solve->add_option("--instance", instance_path, "instance file")->required();

  auto* gen = app.add_subcommand("gen", "dump one generated epoch as CSV");
  gen->add_option("--config", config_path, "experiment config file")->required();
  gen->add_option("--epoch", epoch, "epoch index")->default_val(0);
  gen->add_option("--max-records", max_records, "truncate output (-1 = all)");

  auto* explain = app.add_subcommand("explain-costs", "print the effective cost model");
  explain->add_option("--query", query, "s2sprobe | t2tprobe | loganalytics");
  explain->add_option("--config", config_path, "config file with [costs] overrides");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed())
      return cmd_run(config_path, csv_path, summary_path, seed_override, require_convergence);
    if (sweep->parsed()) return cmd_sweep(config_path, axis, values, jobs, csv_path);
    if (compare->parsed()) return cmd_compare(config_path, policies);
    if (solve->parsed()) return cmd_solve(instance_path);
    if (gen->parsed()) return cmd_gen(config_path, epoch, max_records);
    if (explain->parsed()) return cmd_explain_costs(query, config_path);
  } catch (const jarvis::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
