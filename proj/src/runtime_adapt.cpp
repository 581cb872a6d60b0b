#include "jarvis/runtime_adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jarvis {

const char* to_string(RuntimePhase p) {
  switch (p) {
    case RuntimePhase::Startup: return "startup";
    case RuntimePhase::Probe: return "probe";
    case RuntimePhase::Profile: return "profile";
    case RuntimePhase::Adapt: return "adapt";
  }
  return "?";
}

const char* to_string(QueryVerdict v) {
  switch (v) {
    case QueryVerdict::Stable: return "stable";
    case QueryVerdict::Congested: return "congested";
    case QueryVerdict::Idle: return "idle";
  }
  return "?";
}

QueryVerdict probe_cp(const std::vector<ProxyVerdict>& states) {
  if (states.empty()) return QueryVerdict::Stable;
  bool any_congested = false;
  bool all_idle = true;
  for (ProxyVerdict v : states) {
    if (v == ProxyVerdict::Congested) any_congested = true;
    if (v != ProxyVerdict::Idle) all_idle = false;
  }
  if (any_congested) return QueryVerdict::Congested;
  if (all_idle) return QueryVerdict::Idle;
  return QueryVerdict::Stable;
}

bool debounce(const std::deque<QueryVerdict>& history) {
  if (history.size() < 3) return false;
  auto it = history.rbegin();
  QueryVerdict last = *it;
  if (last == QueryVerdict::Stable) return false;
  return *(it + 1) == last && *(it + 2) == last;
}

PartitionProblem ProfileEstimate::to_problem() const {
  PartitionProblem prob;
  prob.m = static_cast<int>(c.size());
  prob.n_records = n_records;
  prob.budget = budget_C;
  prob.c = c;
  prob.r = r;
  return prob;
}

std::vector<int> operator_priority(const std::vector<double>& r) {
  std::vector<int> idx(r.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return r[a] < r[b]; });
  return idx;
}

std::vector<double> lp_initial_load_factors(const ProfileEstimate& est) {
  return solve_lp(est.to_problem()).p;
}

FineTuner::FineTuner(int m, double grid) : m_(m), grid_(grid), iv_(m) {}

double FineTuner::snap(double v) const { return std::round(v / grid_) * grid_; }

void FineTuner::reset() { iv_.assign(m_, Interval{}); }

FineTuner::Step FineTuner::step(const std::vector<double>& lf,
                                const std::vector<int>& priorities, QueryVerdict state) {
  Step out;
  out.lf = lf;
  const double eps = grid_ * 0.5;

  if (state == QueryVerdict::Idle) {
    for (int o : priorities) {
      if (iv_[o].done || lf[o] >= 1.0 - eps) continue;
      Interval& iv = iv_[o];
      if (!iv.active) {
        iv = Interval{lf[o], 1.0, true, false};
      } else {
        iv.lo = lf[o];  // still idle at the current value: safe to go higher
      }
      double mid = snap((iv.lo + iv.hi) / 2.0);
      if (iv.hi - iv.lo <= grid_ + 1e-12 || mid <= lf[o] + eps) {
        out.lf[o] = snap(iv.hi);
        iv.done = true;
      } else {
        out.lf[o] = mid;
      }
      out.touched = o;
      return out;
    }
    out.exhausted = true;
    return out;
  }

  // congested: walk priorities from the lowest-priority end
  for (auto it = priorities.rbegin(); it != priorities.rend(); ++it) {
    int o = *it;
    if (iv_[o].done || lf[o] <= eps) continue;
    Interval& iv = iv_[o];
    if (!iv.active) {
      iv = Interval{0.0, lf[o], true, false};
    } else {
      iv.hi = lf[o];  // congested at the current value: must go lower
    }
    double mid = snap((iv.lo + iv.hi) / 2.0);
    if (iv.hi - iv.lo <= grid_ + 1e-12 || mid >= lf[o] - eps) {
      out.lf[o] = snap(iv.lo);
      iv.done = true;
    } else {
      out.lf[o] = mid;
    }
    out.touched = o;
    return out;
  }
  out.exhausted = true;
  return out;
}

std::vector<double> allocate_budget(double total, const std::vector<double>& demands) {
  const std::size_t n = demands.size();
  std::vector<double> alloc(n, 0.0);
  if (n == 0 || total <= 0.0) return alloc;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return demands[a] < demands[b]; });
  double remaining = total;
  std::size_t unsatisfied = n;
  for (int i : order) {
    double share = remaining / static_cast<double>(unsatisfied);
    double a = std::min(demands[i], share);
    alloc[i] = a;
    remaining -= a;
    --unsatisfied;
  }
  return alloc;
}

AdaptController::AdaptController(int m, AdaptOptions opts)
    : opts_(opts), m_(m), lf_(m, 0.0), tuner_(m, opts.lf_grid) {}

void AdaptController::deliver_profile(const ProfileEstimate& est) {
  est_ = est;
  profiled_budget_ = budget_now_;
  profiled_records_ = records_now_;
}

void AdaptController::note_conditions(double budget, double n_records) {
  budget_now_ = budget;
  records_now_ = n_records;
}

void AdaptController::enter_adapt() {
  tuner_.reset();
  adapt_epochs_ = 0;
  phase_ = RuntimePhase::Adapt;
  // InfeasibleEstimate: keep lf unchanged
  if (!est_ || !est_->valid() || est_->n_records <= 0.0) return;
  if (opts_.planner) {
    lf_ = opts_.planner(*est_);
    return;
  }
  if (opts_.lp_init) {
    bool all_zero_cost = std::all_of(est_->c.begin(), est_->c.end(),
                                     [](double c) { return c <= 0.0; });
    if (all_zero_cost && est_->n_records > 0.0) {
      // degenerate estimate: running everything locally is free
      lf_.assign(m_, 1.0);
    } else {
      lf_ = lp_initial_load_factors(*est_);
    }
  } else {
    lf_.assign(m_, 0.0);
  }
}

void AdaptController::observe(QueryVerdict verdict) {
  // Idle means the pipeline could take on more local work; with every load
  // factor already at 1.0 there is none to take, so the verdict is not
  // actionable and the query is effectively stable.
  if (verdict == QueryVerdict::Idle &&
      std::all_of(lf_.begin(), lf_.end(), [](double v) { return v >= 1.0 - 1e-9; }))
    verdict = QueryVerdict::Stable;
  switch (phase_) {
    case RuntimePhase::Startup:
      phase_ = RuntimePhase::Probe;
      history_.push_back(verdict);
      if (debounce(history_)) {
        history_.clear();
        phase_ = RuntimePhase::Profile;
      }
      break;
    case RuntimePhase::Probe:
      history_.push_back(verdict);
      while (static_cast<int>(history_.size()) > opts_.debounce_epochs) history_.pop_front();
      if (debounce(history_)) {
        history_.clear();
        if (opts_.planner && profiled_budget_ >= 0.0 &&
            std::abs(budget_now_ - profiled_budget_) < 1e-12 &&
            std::abs(records_now_ - profiled_records_) <=
                0.1 * std::max(profiled_records_, 1.0)) {
          break;  // deterministic planner, unchanged conditions: same plan
        }
        phase_ = RuntimePhase::Profile;
      }
      break;
    case RuntimePhase::Profile:
      // the verdict of a profiling epoch carries no plan evidence
      enter_adapt();
      break;
    case RuntimePhase::Adapt: {
      if (verdict == QueryVerdict::Stable) {
        phase_ = RuntimePhase::Probe;
        break;
      }
      if (!opts_.fine_tune || opts_.planner) {  // single-shot planners
        phase_ = RuntimePhase::Probe;
        break;
      }
      if (++adapt_epochs_ >= opts_.max_adapt_epochs) {
        non_convergence_ = true;
        phase_ = RuntimePhase::Probe;
        break;
      }
      std::vector<double> rr = est_ && est_->valid() ? est_->r : std::vector<double>(m_, 1.0);
      auto step = tuner_.step(lf_, operator_priority(rr), verdict);
      if (step.exhausted) {
        non_convergence_ = true;
        phase_ = RuntimePhase::Probe;
        break;
      }
      lf_ = step.lf;
      break;
    }
  }
}

}  // namespace jarvis
