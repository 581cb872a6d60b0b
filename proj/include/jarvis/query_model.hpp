#pragma once

#include <string>
#include <vector>

namespace jarvis {

enum class OpKind { Filter, Map, GroupAggregate, JoinStatic, Project, StreamStreamJoin };

enum class Aggregate { Avg, Max, Min, Count, Sum, ExactQuantile };

const char* to_string(OpKind k);

struct OperatorParams {
  int predicate = 0;                    // Filter: predicate id
  int transform = 0;                    // Map/Project: transform id
  std::vector<std::string> key_fields;  // GroupAggregate
  std::vector<Aggregate> aggs;          // GroupAggregate
  std::string table_ref;                // JoinStatic
  bool cross_source = false;            // aggregation spans multiple sources
  int parallelism = 1;                  // physical instances per logical operator
};

struct OperatorSpec {
  int id = 0;  // 1..M, consecutive
  OpKind kind = OpKind::Filter;
  OperatorParams params;
  bool stateful = false;
  bool incremental = true;

  static OperatorSpec filter(int id, int predicate = 0);
  static OperatorSpec map(int id, int transform = 0);
  static OperatorSpec project(int id, int transform = 0);
  static OperatorSpec join_static(int id, const std::string& table_ref);
  static OperatorSpec group_aggregate(int id, std::vector<std::string> key_fields,
                                      std::vector<Aggregate> aggs, bool cross_source = false);
  static OperatorSpec stream_stream_join(int id);
};

// True when every aggregate in the set is mergeable across partial states.
bool is_incremental(const std::vector<Aggregate>& aggs);

struct QueryPlan {
  std::vector<OperatorSpec> operators;
  double window_s = 10.0;
  int source_eligible_len = 0;
  std::vector<std::string> static_tables;  // declared table names

  int size() const { return static_cast<int>(operators.size()); }
};

struct RuleConfig {
  bool r1_non_incremental_agg = true;
  bool r2_cross_source_downstream = true;
  bool r3_stream_stream_join = true;
  bool r4_parallel_operators = true;
};

enum class PlanError { DuplicateId, DanglingTableRef, EmptyPipeline, NonConsecutiveId };

const char* to_string(PlanError e);

// ok iff ids are consecutive from 1 and every JoinStatic references a declared table.
std::vector<PlanError> validate_pipeline(const QueryPlan& plan);

// Length of the longest prefix whose operators violate none of R-1..R-4.
int apply_source_rules(const QueryPlan& plan, const RuleConfig& rules = {});

struct InstrumentedPlan {
  QueryPlan plan;
  int proxy_count = 0;  // one proxy preceding each source-eligible operator
};

InstrumentedPlan instrument(const QueryPlan& plan);

}  // namespace jarvis
