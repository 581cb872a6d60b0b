#pragma once

#include <string>
#include <vector>

#include "jarvis/query_model.hpp"
#include "jarvis/runtime_adapt.hpp"

namespace jarvis {

enum class PolicyKind { AllSP, AllSrc, FilterSrc, BestOP, LBDP, Jarvis };

const char* to_string(PolicyKind k);
PolicyKind policy_from_string(const std::string& name);

// Everything on the stream processor: all-zero load factors.
std::vector<double> all_sp(int m);

// Everything on the data source: all-one load factors (may oversubscribe).
std::vector<double> all_src(int m);

// p = 1 for the leading maximal run of Filter operators, 0 after.
std::vector<double> filter_src(const QueryPlan& plan);

// Largest all-or-nothing prefix whose cost fits the per-record budget.
std::vector<double> best_op(const ProfileEstimate& est);

// Query-level proportional split: p_1 = src / (src + sp), the rest 1.
std::vector<double> lb_dp(double src_budget, double sp_share);

// A tiny operator-level joint-placement instance: per-node costs, relay
// ratios, record sizes at each stage boundary, and link bandwidth.
struct JointNode {
  double budget = 0.0;             // cpu-seconds per wall-second
  double rate = 0.0;               // records per second
  std::vector<double> cost;        // per-record cpu-seconds, length m
  std::vector<double> relay;       // relay ratio per operator, length m
  std::vector<double> out_bytes;   // record bytes after stage j, length m + 1
  double link_bw = 0.0;            // bytes per second
};

struct JointInstance {
  int m = 0;
  std::vector<JointNode> nodes;
  std::vector<double> rc;  // per-operator partitioning cost, strictly decreasing
};

// Enumerates all (m+1)^{n_d} boundary vectors and returns the one minimizing
// the total partitioning cost of remotely placed operators, subject to each
// node's local compute time not exceeding its drain time. Throws TooLarge
// (std::invalid_argument) beyond n_d = 4 or m = 4.
std::vector<int> exact_joint(const JointInstance& inst);

}  // namespace jarvis
