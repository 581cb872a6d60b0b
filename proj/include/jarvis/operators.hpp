#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "jarvis/query_model.hpp"
#include "jarvis/record.hpp"

namespace jarvis {

struct PartialAggregate {
  GroupKey group_key = 0;
  std::int64_t count = 0;
  std::int64_t sum_rtt = 0;
  std::int64_t max_rtt = 0;
  std::int64_t min_rtt = 0;
};

// count/sum add; max is max; min is min. Keys must match.
PartialAggregate merge_partials(const PartialAggregate& a, const PartialAggregate& b);

struct CostModel {
  // cpu-seconds per record by operator kind
  std::unordered_map<OpKind, double> per_record;
  // by operator id (1-based); overrides the per-kind value when present
  std::unordered_map<int, double> per_op_override;
  double group_lookup_scale = 0.0;  // * log2(1 + live groups)
  double join_lookup_scale = 0.0;   // * ln(table size)

  double record_cost(const OperatorSpec& op, std::size_t live_groups,
                     std::size_t table_size) const;
};

using StaticTable = std::unordered_map<std::uint32_t, std::uint32_t>;

// Per-window accumulated groups. GroupAggregate emits nothing mid-window; the
// accumulated state is taken out with take_state()/take_closed_windows().
struct OperatorState {
  std::map<std::int32_t, std::unordered_map<GroupKey, PartialAggregate>> windows;
  std::shared_ptr<const StaticTable> table;

  std::size_t live_groups() const;
  std::size_t table_size() const { return table ? table->size() : 0; }
};

struct OperatorResult {
  Batch output;
  std::size_t processed = 0;
  double consumed = 0.0;  // cpu-seconds
  Batch pending;          // unprocessed suffix
};

// Processes records in arrival order until the input is exhausted or the next
// record's cost exceeds budget_left. Filter/Map/JoinStatic/Project emit 0-or-1
// record per input; GroupAggregate mutates state and emits nothing.
OperatorResult run_operator(const OperatorSpec& op, std::span<const Record> input,
                            OperatorState& state, double budget_left, const CostModel& cost);

// Result-path rows for every window in the state; clears the state.
Batch take_state(const OperatorSpec& op, OperatorState& state, double window_s);

// Rows for windows fully below the watermark only.
Batch take_closed_windows(const OperatorSpec& op, OperatorState& state, std::int64_t wm_ms,
                          double window_s);

// emitted/ingested bytes, clamped to [0,1]. ingested must be > 0.
double observe_relay_ratio(std::int64_t emitted_bytes, std::int64_t ingested_bytes);

GroupKey group_key_for(const OperatorSpec& op, const Record& r);

// Applies one operator to one record with unlimited budget; used by the
// replica path and the reference executor. Returns nullopt when dropped.
std::optional<Record> apply_stateless(const OperatorSpec& op, const Record& r,
                                      const OperatorState& state);

}  // namespace jarvis
