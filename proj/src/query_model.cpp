#include "jarvis/query_model.hpp"

#include <algorithm>
#include <set>

namespace jarvis {

const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::Filter: return "filter";
    case OpKind::Map: return "map";
    case OpKind::GroupAggregate: return "group_aggregate";
    case OpKind::JoinStatic: return "join_static";
    case OpKind::Project: return "project";
    case OpKind::StreamStreamJoin: return "stream_stream_join";
  }
  return "?";
}

const char* to_string(PlanError e) {
  switch (e) {
    case PlanError::DuplicateId: return "DuplicateId";
    case PlanError::DanglingTableRef: return "DanglingTableRef";
    case PlanError::EmptyPipeline: return "EmptyPipeline";
    case PlanError::NonConsecutiveId: return "NonConsecutiveId";
  }
  return "?";
}

bool is_incremental(const std::vector<Aggregate>& aggs) {
  return std::none_of(aggs.begin(), aggs.end(),
                      [](Aggregate a) { return a == Aggregate::ExactQuantile; });
}

OperatorSpec OperatorSpec::filter(int id, int predicate) {
  OperatorSpec op;
  op.id = id;
  op.kind = OpKind::Filter;
  op.params.predicate = predicate;
  return op;
}

OperatorSpec OperatorSpec::map(int id, int transform) {
  OperatorSpec op;
  op.id = id;
  op.kind = OpKind::Map;
  op.params.transform = transform;
  return op;
}

OperatorSpec OperatorSpec::project(int id, int transform) {
  OperatorSpec op;
  op.id = id;
  op.kind = OpKind::Project;
  op.params.transform = transform;
  return op;
}

OperatorSpec OperatorSpec::join_static(int id, const std::string& table_ref) {
  OperatorSpec op;
  op.id = id;
  op.kind = OpKind::JoinStatic;
  op.params.table_ref = table_ref;
  op.stateful = false;
  return op;
}

OperatorSpec OperatorSpec::group_aggregate(int id, std::vector<std::string> key_fields,
                                           std::vector<Aggregate> aggs, bool cross_source) {
  OperatorSpec op;
  op.id = id;
  op.kind = OpKind::GroupAggregate;
  op.params.key_fields = std::move(key_fields);
  op.params.aggs = std::move(aggs);
  op.params.cross_source = cross_source;
  op.stateful = true;
  op.incremental = is_incremental(op.params.aggs);
  return op;
}

OperatorSpec OperatorSpec::stream_stream_join(int id) {
  OperatorSpec op;
  op.id = id;
  op.kind = OpKind::StreamStreamJoin;
  op.stateful = true;
  return op;
}

std::vector<PlanError> validate_pipeline(const QueryPlan& plan) {
  std::vector<PlanError> errors;
  if (plan.operators.empty()) {
    errors.push_back(PlanError::EmptyPipeline);
    return errors;
  }
  std::set<int> seen;
  bool dup = false;
  for (const OperatorSpec& op : plan.operators)
    if (!seen.insert(op.id).second) dup = true;
  if (dup) errors.push_back(PlanError::DuplicateId);
  if (!dup) {
    for (int i = 0; i < plan.size(); ++i)
      if (plan.operators[i].id != i + 1) {
        errors.push_back(PlanError::NonConsecutiveId);
        break;
      }
  }
  for (const OperatorSpec& op : plan.operators) {
    if (op.kind != OpKind::JoinStatic) continue;
    if (std::find(plan.static_tables.begin(), plan.static_tables.end(), op.params.table_ref) ==
        plan.static_tables.end())
      errors.push_back(PlanError::DanglingTableRef);
  }
  return errors;
}

namespace {

bool violates(const OperatorSpec& op, const RuleConfig& rules) {
  if (rules.r1_non_incremental_agg && op.kind == OpKind::GroupAggregate && !op.incremental)
    return true;
  if (rules.r3_stream_stream_join && op.kind == OpKind::StreamStreamJoin) return true;
  if (rules.r4_parallel_operators && op.params.parallelism > 1) return true;
  return false;
}

}  // namespace

int apply_source_rules(const QueryPlan& plan, const RuleConfig& rules) {
  int len = 0;
  for (const OperatorSpec& op : plan.operators) {
    if (violates(op, rules)) break;
    ++len;
    // R-2: the cross-source aggregation itself may run partially on the
    // source, but everything downstream of it is stream-processor-only.
    if (rules.r2_cross_source_downstream && op.kind == OpKind::GroupAggregate &&
        op.params.cross_source)
      break;
  }
  return len;
}

InstrumentedPlan instrument(const QueryPlan& plan) {
  InstrumentedPlan ip;
  ip.plan = plan;
  ip.proxy_count = plan.source_eligible_len;
  return ip;
}

}  // namespace jarvis
