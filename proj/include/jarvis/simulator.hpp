#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "jarvis/baselines.hpp"
#include "jarvis/query_model.hpp"
#include "jarvis/record.hpp"
#include "jarvis/runtime_adapt.hpp"
#include "jarvis/workloads.hpp"

namespace jarvis {

// Step function epoch -> value: `base` until the first breakpoint, then the
// breakpoint's value from its epoch on. Breakpoints ascend by epoch.
struct StepSchedule {
  double base = 0.0;
  std::vector<std::pair<std::int64_t, double>> steps;

  double at(std::int64_t epoch) const;
  bool operator==(const StepSchedule&) const = default;
};

struct ExperimentConfig {
  std::string query = "s2sprobe";  // s2sprobe | t2tprobe | loganalytics
  PolicyKind policy = PolicyKind::Jarvis;
  int n_sources = 1;   // sources feeding each logical query
  int n_queries = 1;   // independent query instances per source node
  int epochs = 300;
  int warmup_epochs = 180;
  double epoch_s = 1.0;
  StepSchedule cpu_budget{0.8, {}};     // core fraction per source node
  StepSchedule rate_mbps{kPingRateMbps, {}};  // per query instance
  double link_mbps = 20.48;    // per (source, query) drain path
  double sp_ingest_mbps = 0.0;  // aggregate SP ingest; 0 = unlimited
  double sp_cores = 0.0;        // SP compute budget; 0 = unbounded
  double latency_bound_s = 5.0;
  double drained_thres = 0.05;
  double idle_thres = 0.20;
  double lbdp_sp_share = 64.0 / 250.0;  // SP cores per source for LB-DP
  // adaptation
  int debounce_epochs = 3;
  int max_adapt_epochs = 32;
  double lf_grid = 0.01;
  bool lp_init = true;
  bool fine_tune = true;
  // workload
  std::uint32_t peer_count = 20000;
  double error_rate = 0.14;
  StepSchedule table_size{500, {}};  // t2tprobe static table entries
  int tenant_count = 16;
  double pattern_hit_rate = 0.9;
  std::int64_t spike_every_s = 0;
  std::int64_t spike_duration_s = 50;
  std::uint64_t seed = 1;
  // per-record cpu-second overrides by operator id, applied over the
  // calibrated defaults
  std::map<int, double> cost_per_op;

  bool operator==(const ExperimentConfig&) const = default;
};

void validate(const ExperimentConfig& cfg);  // throws std::invalid_argument

struct EpochMetrics {
  std::int64_t epoch = 0;
  int node = 0;
  int query = 0;
  std::int64_t input_bytes = 0;      // generated this epoch
  std::int64_t admitted_bytes = 0;   // entered the pipeline
  std::int64_t drained_bytes = 0;    // tagged records enqueued on the link
  std::int64_t result_bytes = 0;     // partial-state rows enqueued on the link
  std::int64_t transmitted_bytes = 0;  // left the node over the link
  double compute_used = 0.0;
  double budget = 0.0;
  double latency_s = 0.0;
  RuntimePhase phase = RuntimePhase::Startup;
  QueryVerdict verdict = QueryVerdict::Stable;
  std::vector<double> lf;
};

// One closed window group on the result path; integral fields so equality
// against the reference execution is exact.
struct FinalRow {
  std::int32_t window_id = 0;
  GroupKey key = 0;
  std::int64_t count = 0;
  std::int64_t sum = 0;
  std::int64_t max = 0;
  std::int64_t min = 0;

  auto operator<=>(const FinalRow&) const = default;
};

struct RunResult {
  std::vector<EpochMetrics> rows;                // epoch-major, then node, query
  std::vector<std::vector<FinalRow>> outputs;    // per logical query, sorted
  bool non_convergence = false;
  std::int64_t generated_records = 0;
};

// Epoch-synchronous lock-step simulation; bit-identical for identical configs.
RunResult run_experiment(const ExperimentConfig& cfg);

// Single-threaded unbounded execution of the same plan over the concatenated
// generated records; the equivalence oracle for run_experiment.
std::vector<std::vector<FinalRow>> reference_run(const ExperimentConfig& cfg);

// Sustained admitted Mbps over post-warmup epochs; epochs whose latency
// exceeds the bound contribute zero. Throws on an empty post-warmup series.
double measure_throughput(const RunResult& run, double latency_bound_s = 5.0,
                          int warmup_epochs = 180);

struct ConvergenceCount {
  bool converged = false;
  int raw = -1;                 // epochs from the change to the stable run
  int detection_excluded = -1;  // raw minus the debounce window
};

// First epoch at/after change_epoch beginning a run of >= 3 Stable verdicts.
ConvergenceCount convergence_epochs(const RunResult& run, std::int64_t change_epoch,
                                    int node = 0, int query = 0, int debounce = 3);

// Mean bytes actually transmitted per post-warmup epoch, in Mbps.
double mean_outbound_mbps(const RunResult& run, int warmup_epochs);

// Load-factor vector of the last epoch (node 0, query 0).
std::vector<double> converged_lf(const RunResult& run);

void write_csv(const RunResult& run, std::ostream& os);
std::string summarize(const ExperimentConfig& cfg, const RunResult& run);

}  // namespace jarvis
