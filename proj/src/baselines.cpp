#include "jarvis/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace jarvis {

const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::AllSP: return "all-sp";
    case PolicyKind::AllSrc: return "all-src";
    case PolicyKind::FilterSrc: return "filter-src";
    case PolicyKind::BestOP: return "best-op";
    case PolicyKind::LBDP: return "lb-dp";
    case PolicyKind::Jarvis: return "jarvis";
  }
  return "?";
}

PolicyKind policy_from_string(const std::string& name) {
  for (PolicyKind k : {PolicyKind::AllSP, PolicyKind::AllSrc, PolicyKind::FilterSrc,
                       PolicyKind::BestOP, PolicyKind::LBDP, PolicyKind::Jarvis}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown policy: " + name);
}

std::vector<double> all_sp(int m) { return std::vector<double>(static_cast<std::size_t>(m), 0.0); }

std::vector<double> all_src(int m) { return std::vector<double>(static_cast<std::size_t>(m), 1.0); }

std::vector<double> filter_src(const QueryPlan& plan) {
  std::vector<double> p(plan.operators.size(), 0.0);
  for (std::size_t i = 0; i < plan.operators.size(); ++i) {
    if (plan.operators[i].kind != OpKind::Filter) break;
    p[i] = 1.0;
  }
  return p;
}

std::vector<double> best_op(const ProfileEstimate& est) {
  if (!est.valid() || est.n_records <= 0.0)
    throw std::invalid_argument("best_op: estimate unavailable");
  const std::size_t m = est.c.size();
  const double per_record = est.budget_C / est.n_records;
  std::vector<double> p(m, 0.0);
  double prefix_cost = 0.0;
  double relay_in = 1.0;  // records reaching operator i per source record
  for (std::size_t i = 0; i < m; ++i) {
    prefix_cost += relay_in * est.c[i];
    if (prefix_cost > per_record + 1e-12) break;
    p[i] = 1.0;
    relay_in *= est.r[i];
  }
  return p;
}

std::vector<double> lb_dp(double src_budget, double sp_share) {
  if (src_budget < 0.0 || sp_share < 0.0 || src_budget + sp_share <= 0.0)
    throw std::invalid_argument("lb_dp: budgets must be nonnegative with positive sum");
  std::vector<double> p{src_budget / (src_budget + sp_share)};
  return p;
}

namespace {

// Local compute seconds per wall-second for the first b operators; infinite
// when the node has work but no budget.
double local_time(const JointNode& n, int b) {
  double work = 0.0;
  double relay_in = 1.0;
  for (int j = 0; j < b; ++j) {
    work += relay_in * n.cost[static_cast<std::size_t>(j)];
    relay_in *= n.relay[static_cast<std::size_t>(j)];
  }
  work *= n.rate;
  if (work <= 0.0) return 0.0;
  if (n.budget <= 0.0) return std::numeric_limits<double>::infinity();
  return work / n.budget;
}

// Seconds per wall-second spent draining the residual stream over the link.
double remote_time(const JointNode& n, int b) {
  double relay_in = 1.0;
  for (int j = 0; j < b; ++j) relay_in *= n.relay[static_cast<std::size_t>(j)];
  const double bytes = n.rate * relay_in * n.out_bytes[static_cast<std::size_t>(b)];
  if (bytes <= 0.0) return 0.0;
  if (n.link_bw <= 0.0) return std::numeric_limits<double>::infinity();
  return bytes / n.link_bw;
}

}  // namespace

std::vector<int> exact_joint(const JointInstance& inst) {
  const int m = inst.m;
  const int nd = static_cast<int>(inst.nodes.size());
  if (nd > 4 || m > 4) throw std::invalid_argument("exact_joint: TooLarge");
  if (nd == 0 || m == 0) throw std::invalid_argument("exact_joint: empty instance");
  if (static_cast<int>(inst.rc.size()) != m)
    throw std::invalid_argument("exact_joint: rc length mismatch");
  for (int j = 1; j < m; ++j)
    if (!(inst.rc[static_cast<std::size_t>(j - 1)] > inst.rc[static_cast<std::size_t>(j)]))
      throw std::invalid_argument("exact_joint: rc must be strictly decreasing");
  for (const JointNode& n : inst.nodes) {
    if (static_cast<int>(n.cost.size()) != m || static_cast<int>(n.relay.size()) != m ||
        static_cast<int>(n.out_bytes.size()) != m + 1)
      throw std::invalid_argument("exact_joint: node vector length mismatch");
  }

  // Per-node cost of each boundary: rc of every operator sent to the SP.
  std::vector<std::vector<double>> remote_cost(static_cast<std::size_t>(nd));
  std::vector<std::vector<bool>> feasible(static_cast<std::size_t>(nd));
  for (int i = 0; i < nd; ++i) {
    const JointNode& n = inst.nodes[static_cast<std::size_t>(i)];
    remote_cost[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(m) + 1);
    feasible[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(m) + 1);
    for (int b = 0; b <= m; ++b) {
      double rcsum = 0.0;
      for (int j = b; j < m; ++j) rcsum += inst.rc[static_cast<std::size_t>(j)];
      remote_cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)] = rcsum;
      feasible[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)] =
          local_time(n, b) <= remote_time(n, b) + 1e-12;
    }
  }

  std::vector<int> best;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<int> b(static_cast<std::size_t>(nd), 0);
  while (true) {
    bool ok = true;
    double cost = 0.0;
    for (int i = 0; i < nd && ok; ++i) {
      const int bi = b[static_cast<std::size_t>(i)];
      ok = feasible[static_cast<std::size_t>(i)][static_cast<std::size_t>(bi)];
      cost += remote_cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(bi)];
    }
    if (ok && cost < best_cost - 1e-15) {
      best_cost = cost;
      best = b;
    }
    int i = nd - 1;
    while (i >= 0 && b[static_cast<std::size_t>(i)] == m) {
      b[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
    ++b[static_cast<std::size_t>(i)];
  }
  if (best.empty()) throw std::runtime_error("exact_joint: no feasible boundary vector");
  return best;
}

}  // namespace jarvis
