#include "jarvis/lp_partition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jarvis {

namespace {

void check_dims(const PartitionProblem& prob, const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != prob.m ||
      static_cast<int>(prob.c.size()) != prob.m ||
      static_cast<int>(prob.r.size()) != prob.m)
    throw std::invalid_argument("partition problem: DimensionMismatch");
}

// R[i] = prod_{j=1..i} r_j, R[0] = 1.
std::vector<double> relay_prefix(const PartitionProblem& prob) {
  std::vector<double> R(prob.m + 1, 1.0);
  for (int i = 1; i <= prob.m; ++i) R[i] = R[i - 1] * prob.r[i - 1];
  return R;
}

}  // namespace

double objective(const PartitionProblem& prob, const std::vector<double>& p) {
  check_dims(prob, p);
  double flow = 1.0;  // prod_{j<i} p_j r_j
  double drained = 0.0;
  for (int i = 0; i < prob.m; ++i) {
    drained += flow * (1.0 - p[i]);
    flow *= p[i] * prob.r[i];
  }
  return drained;
}

double compute_usage(const PartitionProblem& prob, const std::vector<double>& p) {
  check_dims(prob, p);
  double flow = 1.0;
  double used = 0.0;
  for (int i = 0; i < prob.m; ++i) {
    used += flow * p[i] * prob.c[i];
    flow *= p[i] * prob.r[i];
  }
  return used;
}

double objective_e(const PartitionProblem& prob, const std::vector<double>& e) {
  check_dims(prob, e);
  std::vector<double> R = relay_prefix(prob);
  double prev = 1.0;
  double drained = 0.0;
  for (int i = 0; i < prob.m; ++i) {
    drained += R[i] * (prev - e[i]);
    prev = e[i];
  }
  return drained;
}

double compute_usage_e(const PartitionProblem& prob, const std::vector<double>& e) {
  check_dims(prob, e);
  std::vector<double> R = relay_prefix(prob);
  double used = 0.0;
  for (int i = 0; i < prob.m; ++i) used += R[i] * e[i] * prob.c[i];
  return used;
}

std::vector<double> e_to_p(const std::vector<double>& e) {
  std::vector<double> p(e.size());
  double prev = 1.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] > prev + 1e-12) throw std::invalid_argument("e_to_p: ChainViolation");
    p[i] = prev > 0.0 ? std::min(1.0, e[i] / prev) : 0.0;
    prev = e[i];
  }
  return p;
}

PartitionSolution solve_lp(const PartitionProblem& prob) {
  check_dims(prob, prob.c);
  const int m = prob.m;
  const double B = prob.budget_per_record();
  std::vector<double> R = relay_prefix(prob);

  // Substitute t_i = e_i - e_{i+1} (t_m = e_m): maximize sum W_i t_i subject
  // to sum A_i t_i <= B, sum t_i <= 1, t >= 0, where W_i is the drained
  // fraction avoided by running the prefix 1..i on one unit of flow and A_i
  // is that prefix's per-record cost.
  std::vector<double> W(m), A(m);
  double prefix_cost = 0.0;
  for (int i = 0; i < m; ++i) {
    prefix_cost += R[i] * prob.c[i];
    A[i] = prefix_cost;
    W[i] = (i + 1 < m) ? 1.0 - R[i + 1] : 1.0;
  }

  std::vector<double> best_t(m, 0.0);
  double best_savings = 0.0;
  auto consider = [&](const std::vector<double>& t) {
    double cost = 0.0, mass = 0.0, savings = 0.0;
    for (int i = 0; i < m; ++i) {
      if (t[i] < -kLpTolerance) return;
      cost += A[i] * t[i];
      mass += t[i];
      savings += W[i] * t[i];
    }
    if (cost > B + kLpTolerance || mass > 1.0 + kLpTolerance) return;
    if (savings > best_savings) {
      best_savings = savings;
      best_t = t;
    }
  };

  std::vector<double> t(m, 0.0);
  for (int i = 0; i < m; ++i) {
    t.assign(m, 0.0);
    t[i] = A[i] > kLpTolerance ? std::min(1.0, B / A[i]) : 1.0;
    consider(t);
    for (int j = i + 1; j < m; ++j) {
      if (std::abs(A[j] - A[i]) <= kLpTolerance) continue;
      double tj = (B - A[i]) / (A[j] - A[i]);
      if (tj < -kLpTolerance || tj > 1.0 + kLpTolerance) continue;
      t.assign(m, 0.0);
      t[j] = std::clamp(tj, 0.0, 1.0);
      t[i] = 1.0 - t[j];
      consider(t);
    }
  }

  PartitionSolution sol;
  sol.e.assign(m, 0.0);
  double acc = 0.0;
  for (int i = m - 1; i >= 0; --i) {
    acc += best_t[i];
    sol.e[i] = std::min(1.0, acc);
  }
  sol.p = e_to_p(sol.e);
  sol.drained_fraction = objective_e(prob, sol.e);
  sol.compute_used = compute_usage_e(prob, sol.e);
  return sol;
}

namespace {

void enumerate(const PartitionProblem& prob, const std::vector<double>& R, double grid,
               int level, int prev_k, double cost, double drained, std::vector<double>& e,
               PartitionSolution& best) {
  if (level == prob.m) {
    if (drained < best.drained_fraction) {
      best.drained_fraction = drained;
      best.e = e;
      best.compute_used = cost;
    }
    return;
  }
  const double B = prob.budget_per_record();
  const double prev = level == 0 ? 1.0 : e[level - 1];
  for (int k = 0; k <= prev_k; ++k) {
    double v = static_cast<double>(k) * grid;
    double c2 = cost + R[level] * v * prob.c[level];
    if (c2 > B + kLpTolerance) break;  // cost grows with k; later k infeasible too
    e[level] = v;
    enumerate(prob, R, grid, level + 1, k, c2, drained + R[level] * (prev - v), e, best);
  }
}

}  // namespace

PartitionSolution brute_force(const PartitionProblem& prob, double grid) {
  check_dims(prob, prob.c);
  if (prob.m > 4) throw std::invalid_argument("brute_force: TooLarge (m > 4)");
  int steps = static_cast<int>(std::lround(1.0 / grid));
  PartitionSolution best;
  best.e.assign(prob.m, 0.0);
  best.drained_fraction = 1.0 + 1e-9;  // e = 0 is always feasible
  std::vector<double> R = relay_prefix(prob);
  std::vector<double> e(prob.m, 0.0);
  enumerate(prob, R, grid, 0, steps, 0.0, 0.0, e, best);
  if (best.drained_fraction > 1.0) {
    best.e.assign(prob.m, 0.0);
    best.drained_fraction = objective_e(prob, best.e);
    best.compute_used = compute_usage_e(prob, best.e);
  }
  best.p = e_to_p(best.e);
  return best;
}

}  // namespace jarvis
