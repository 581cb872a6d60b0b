#pragma once

#include <span>
#include <vector>

#include "jarvis/operators.hpp"
#include "jarvis/query_model.hpp"
#include "jarvis/runtime_adapt.hpp"

namespace jarvis {

struct ProfileRun {
  ProfileEstimate est;
  std::vector<Batch> drained;  // records not processed at proxy i, drained losslessly
  double consumed = 0.0;
};

// Runs the source-eligible operators one at a time over the epoch's records,
// splitting the budget across operators proportionally to the last known
// per-record costs (uniform on the first profile). Costs are extrapolated
// from the processed prefix; relay ratios come from the processed subset.
ProfileRun profile_epoch(const InstrumentedPlan& plan, std::span<const Record> input,
                         double budget, const CostModel& cost,
                         std::vector<OperatorState>& states, const ProfileEstimate* prev);

}  // namespace jarvis
