#include "jarvis/profile.hpp"

#include <algorithm>
#include <numeric>

namespace jarvis {

ProfileRun profile_epoch(const InstrumentedPlan& plan, std::span<const Record> input,
                         double budget, const CostModel& cost,
                         std::vector<OperatorState>& states, const ProfileEstimate* prev) {
  const int m = plan.proxy_count;
  ProfileRun out;
  out.est.c.assign(m, 0.0);
  out.est.r.assign(m, 1.0);
  out.est.confidence.assign(m, 0.0);
  out.est.budget_C = budget;
  out.est.n_records = static_cast<double>(input.size());
  out.drained.resize(m);

  std::vector<double> weight(m, 1.0);
  if (prev && static_cast<int>(prev->c.size()) == m) {
    bool any = false;
    for (int i = 0; i < m; ++i) any = any || prev->c[i] > 0.0;
    if (any)
      for (int i = 0; i < m; ++i) weight[i] = std::max(prev->c[i], 0.0);
  }
  const double wsum = std::accumulate(weight.begin(), weight.end(), 0.0);

  Batch cur(input.begin(), input.end());
  for (int i = 0; i < m; ++i) {
    const OperatorSpec& op = plan.plan.operators[static_cast<std::size_t>(i)];
    const double share = wsum > 0.0 ? budget * weight[i] / wsum : budget / m;
    const std::int64_t groups_before =
        static_cast<std::int64_t>(states[static_cast<std::size_t>(i)].live_groups());
    OperatorResult res =
        run_operator(op, cur, states[static_cast<std::size_t>(i)], share, cost);
    out.consumed += res.consumed;

    if (res.processed > 0) {
      out.est.c[static_cast<std::size_t>(i)] =
          res.consumed / static_cast<double>(res.processed);
      out.est.confidence[static_cast<std::size_t>(i)] =
          cur.empty() ? 0.0
                      : static_cast<double>(res.processed) / static_cast<double>(cur.size());
      std::int64_t ingested = 0;
      for (std::size_t k = 0; k < res.processed; ++k) ingested += cur[k].wire_size;
      std::int64_t emitted = batch_bytes(res.output);
      if (op.kind == OpKind::GroupAggregate) {
        const std::int64_t groups_after =
            static_cast<std::int64_t>(states[static_cast<std::size_t>(i)].live_groups());
        emitted = std::max<std::int64_t>(0, groups_after - groups_before) *
                  static_cast<std::int64_t>(kGroupRowWireBytes);
      }
      out.est.r[static_cast<std::size_t>(i)] =
          ingested > 0 ? observe_relay_ratio(emitted, ingested) : 1.0;
    } else if (prev && static_cast<int>(prev->c.size()) == m) {
      out.est.c[static_cast<std::size_t>(i)] = prev->c[static_cast<std::size_t>(i)];
      out.est.r[static_cast<std::size_t>(i)] = prev->r[static_cast<std::size_t>(i)];
    }
    out.drained[static_cast<std::size_t>(i)] = std::move(res.pending);
    cur = std::move(res.output);
  }
  return out;
}

}  // namespace jarvis
