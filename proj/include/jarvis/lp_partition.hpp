#pragma once

#include <vector>

namespace jarvis {

// One data-level partitioning instance: per-epoch record count, compute
// budget, per-record operator costs and relay ratios. Boundary conventions
// p_0 = 1, r_0 = 1.
struct PartitionProblem {
  int m = 0;
  double n_records = 0.0;  // records per epoch
  double budget = 0.0;     // cpu-seconds per epoch
  std::vector<double> c;   // per-record cost, length m
  std::vector<double> r;   // relay ratio in [0,1], length m

  double budget_per_record() const { return n_records > 0.0 ? budget / n_records : 0.0; }
};

struct PartitionSolution {
  std::vector<double> e;  // effective load factors, 1 >= e_1 >= ... >= e_m >= 0
  std::vector<double> p;  // load factors
  double drained_fraction = 0.0;
  double compute_used = 0.0;  // cpu-seconds per record
};

inline constexpr double kLpTolerance = 1e-9;

// Fraction of records drained across all proxies for load factors p.
double objective(const PartitionProblem& prob, const std::vector<double>& p);

// cpu-seconds per source record consumed by the local pipeline under p.
double compute_usage(const PartitionProblem& prob, const std::vector<double>& p);

// Same two quantities in the effective-load-factor variables.
double objective_e(const PartitionProblem& prob, const std::vector<double>& e);
double compute_usage_e(const PartitionProblem& prob, const std::vector<double>& e);

// Exact solve of the linear transformation: minimize drained fraction subject
// to the per-record budget and the monotone chain 1 >= e_1 >= ... >= e_m >= 0.
// The feasible region has one budget row plus the chain order, so the optimum
// sits on a vertex with at most two breakpoints; vertices are enumerated in
// closed form.
PartitionSolution solve_lp(const PartitionProblem& prob);

// p_i = e_i / e_{i-1}; p_i = 0 once the chain hits zero.
std::vector<double> e_to_p(const std::vector<double>& e);

// Exhaustive grid search over chain-feasible e; test oracle, m <= 4 enforced.
PartitionSolution brute_force(const PartitionProblem& prob, double grid = 1e-3);

}  // namespace jarvis
