#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "jarvis/control_proxy.hpp"
#include "jarvis/lp_partition.hpp"

namespace jarvis {

enum class RuntimePhase { Startup, Probe, Profile, Adapt };
enum class QueryVerdict { Stable, Congested, Idle };

const char* to_string(RuntimePhase p);
const char* to_string(QueryVerdict v);

// Congested iff any proxy is congested; Idle iff all are idle; else Stable.
QueryVerdict probe_cp(const std::vector<ProxyVerdict>& states);

// True iff the last three verdicts are the same non-stable verdict.
bool debounce(const std::deque<QueryVerdict>& history);

struct ProfileEstimate {
  std::vector<double> c;           // per-record cpu-seconds, length M
  std::vector<double> r;           // relay ratios, length M
  double budget_C = 0.0;           // cpu-seconds per epoch
  double n_records = 0.0;          // epoch record count
  std::vector<double> confidence;  // fraction of reachable records profiled

  bool valid() const { return !c.empty() && c.size() == r.size(); }
  PartitionProblem to_problem() const;
};

// Indices (0-based) sorted ascending by relay ratio; ties by lower index.
// Lower relay ratio means higher priority.
std::vector<int> operator_priority(const std::vector<double>& r);

// Load factors from the LP solution of the profile estimate.
std::vector<double> lp_initial_load_factors(const ProfileEstimate& est);

// Binary search over the discretized load factor grid, one operator at a
// time in priority order. Idle raises the highest-priority operator with
// p < 1; congested lowers the lowest-priority operator with p > 0. An
// operator whose search interval collapses is parked until reset().
class FineTuner {
 public:
  explicit FineTuner(int m, double grid = 0.01);

  struct Step {
    std::vector<double> lf;
    bool exhausted = false;  // no adjustable operator remained
    int touched = -1;        // 0-based operator index, -1 when exhausted
  };

  Step step(const std::vector<double>& lf, const std::vector<int>& priorities,
            QueryVerdict state);

  void reset();

 private:
  struct Interval {
    double lo = 0.0, hi = 1.0;
    bool active = false;
    bool done = false;
  };
  double snap(double v) const;

  int m_;
  double grid_;
  std::vector<Interval> iv_;
};

// Non-weighted max-min fairness: satisfy smallest demands first, split the
// remainder equally among unsatisfied queries.
std::vector<double> allocate_budget(double total, const std::vector<double>& demands);

struct AdaptOptions {
  int debounce_epochs = 3;
  int max_adapt_epochs = 32;
  double lf_grid = 0.01;
  bool lp_init = true;      // off: fine-tune from the zero vector (ablation)
  bool fine_tune = true;    // off: trust the LP output as-is
  // When set, replaces the LP entirely (e.g. the Best-OP boundary planner);
  // implies single-shot adaptation without fine-tuning.
  std::function<std::vector<double>(const ProfileEstimate&)> planner;
};

// Per-(node, query) control state machine. The caller executes epochs and
// feeds back proxy verdicts; the controller owns phase transitions and the
// load-factor vector.
class AdaptController {
 public:
  AdaptController(int m, AdaptOptions opts = {});

  RuntimePhase phase() const { return phase_; }
  const std::vector<double>& load_factors() const { return lf_; }
  void set_load_factors(std::vector<double> lf) { lf_ = std::move(lf); }
  bool wants_profile() const { return phase_ == RuntimePhase::Profile; }
  bool non_convergence_logged() const { return non_convergence_; }
  const std::optional<ProfileEstimate>& estimate() const { return est_; }

  // Profile results for the epoch that just ran (only consumed in Profile).
  void deliver_profile(const ProfileEstimate& est);

  // Epoch conditions, used to suppress pointless re-planning: a single-shot
  // planner is deterministic in (budget, input rate), so a debounced trigger
  // with both unchanged since the last profile would reproduce the current
  // plan and is skipped.
  void note_conditions(double budget, double n_records);

  // End-of-epoch feedback; advances the state machine and may mutate the
  // load factors for the next epoch.
  void observe(QueryVerdict verdict);

 private:
  void enter_adapt();

  AdaptOptions opts_;
  int m_;
  RuntimePhase phase_ = RuntimePhase::Startup;
  std::vector<double> lf_;
  std::deque<QueryVerdict> history_;
  std::optional<ProfileEstimate> est_;
  FineTuner tuner_;
  int adapt_epochs_ = 0;
  bool non_convergence_ = false;
  double budget_now_ = 0.0, records_now_ = 0.0;
  double profiled_budget_ = -1.0, profiled_records_ = -1.0;
};

}  // namespace jarvis
