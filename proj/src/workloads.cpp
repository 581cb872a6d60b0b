#include "jarvis/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace jarvis {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 epoch_rng(std::uint64_t seed, std::int64_t epoch) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(epoch))));
}

// Records in epoch [e, e+1) at a fractional per-second rate, with carry so the
// long-run average is exact.
std::size_t epoch_count(double per_sec, std::int64_t epoch) {
  const double lo = std::floor(per_sec * static_cast<double>(epoch) + 1e-9);
  const double hi = std::floor(per_sec * static_cast<double>(epoch + 1) + 1e-9);
  return static_cast<std::size_t>(hi - lo);
}

const char* kGenStatNames[] = {"job running time", "cpu util", "memory util"};

}  // namespace

Batch gen_pingmesh(const PingmeshGenConfig& cfg, std::int64_t epoch) {
  if (cfg.rate_mbps < 0.0 || cfg.error_rate < 0.0 || cfg.error_rate > 1.0 ||
      cfg.peer_count == 0)
    throw std::invalid_argument("gen_pingmesh: invalid config");
  const std::size_t n = epoch_count(pingmesh_records_per_sec(cfg.rate_mbps), epoch);
  Batch out;
  out.reserve(n);
  if (n == 0) return out;

  auto rng = epoch_rng(cfg.seed, epoch);
  std::uniform_int_distribution<std::uint32_t> dst(0, cfg.peer_count - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::int32_t> base_rtt(100, 1000);
  std::uniform_int_distribution<std::int32_t> high_rtt(5000, 20000);

  const std::int64_t duration = std::clamp<std::int64_t>(cfg.spike_duration_s, 40, 60);
  const bool spiking = cfg.spike_every_s > 0 && (epoch % cfg.spike_every_s) < duration;
  const double high_frac = spiking ? cfg.spike_high_frac : cfg.base_high_frac;

  // Exact error count per epoch so the Filter relay ratio is a constant of the
  // configuration rather than a binomial sample.
  const auto n_err = static_cast<std::size_t>(
      std::llround(cfg.error_rate * static_cast<double>(n)));
  std::vector<std::uint8_t> err(n, 0);
  std::fill(err.begin(), err.begin() + static_cast<std::ptrdiff_t>(n_err), 1);
  std::shuffle(err.begin(), err.end(), rng);

  for (std::size_t i = 0; i < n; ++i) {
    Record r;
    r.event_time_ms = epoch * 1000 + static_cast<std::int64_t>(i * 1000 / n);
    r.wire_size = kPingWireBytes;
    PingPayload p;
    p.src_ip = cfg.src_ip;
    p.dst_ip = dst(rng);
    p.rtt_us = unit(rng) < high_frac ? high_rtt(rng) : base_rtt(rng);
    p.err_code = err[i];
    r.payload = p;
    out.push_back(std::move(r));
  }
  return out;
}

Batch gen_log(const LogGenConfig& cfg, std::int64_t epoch) {
  if (cfg.rate_mbps < 0.0 || cfg.tenant_count <= 0 || cfg.pattern_hit_rate < 0.0 ||
      cfg.pattern_hit_rate > 1.0)
    throw std::invalid_argument("gen_log: invalid config");
  const std::size_t n = epoch_count(log_records_per_sec(cfg.rate_mbps), epoch);
  Batch out;
  out.reserve(n);
  if (n == 0) return out;

  auto rng = epoch_rng(cfg.seed ^ 0xA5A5A5A5ULL, epoch);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> tenant(0, cfg.tenant_count - 1);
  std::uniform_int_distribution<int> stat_name(0, 2);
  std::uniform_int_distribution<int> value(0, 100);
  std::uniform_int_distribution<int> noise_char(0, 25);

  for (std::size_t i = 0; i < n; ++i) {
    std::string line;
    if (unit(rng) < cfg.pattern_hit_rate) {
      line = "tenant name=t" + std::to_string(tenant(rng)) + "=" +
             kGenStatNames[stat_name(rng)] + "=" + std::to_string(value(rng));
      // Mixed case plus leading whitespace; the trim/lowercase map normalizes.
      for (char& c : line)
        if (c >= 'a' && c <= 'z' && unit(rng) < 0.3) c = static_cast<char>(c - 'a' + 'A');
      if (unit(rng) < 0.5) line.insert(0, " ");
    } else {
      line = "xlog ";
      while (line.size() < 20) line.push_back(static_cast<char>('a' + noise_char(rng)));
    }
    line.resize(kLogLineBytes, ' ');

    Record r;
    r.event_time_ms = epoch * 1000 + static_cast<std::int64_t>(i * 1000 / n);
    r.wire_size = kLogLineBytes;
    r.payload = LogPayload{std::move(line)};
    out.push_back(std::move(r));
  }
  return out;
}

std::shared_ptr<const StaticTable> make_tor_table(std::uint32_t ip_space,
                                                  std::uint32_t tor_count) {
  if (ip_space == 0 || tor_count == 0)
    throw std::invalid_argument("make_tor_table: empty table");
  const std::uint32_t block = (ip_space + tor_count - 1) / tor_count;
  auto table = std::make_shared<StaticTable>();
  table->reserve(ip_space);
  for (std::uint32_t ip = 0; ip < ip_space; ++ip) (*table)[ip] = ip / block;
  return table;
}

QueryPlan build_s2sprobe() {
  QueryPlan plan;
  plan.window_s = 10.0;
  plan.operators.push_back(OperatorSpec::filter(1, 0));
  plan.operators.push_back(OperatorSpec::group_aggregate(
      2, {"src_ip", "dst_ip"}, {Aggregate::Avg, Aggregate::Max, Aggregate::Min}));
  plan.source_eligible_len = apply_source_rules(plan);
  return plan;
}

QueryPlan build_t2tprobe() {
  QueryPlan plan;
  plan.window_s = 10.0;
  plan.static_tables = {"tor"};
  plan.operators.push_back(OperatorSpec::filter(1, 0));
  OperatorSpec j1 = OperatorSpec::join_static(2, "tor");
  j1.params.transform = 0;  // src_ip -> src_tor
  OperatorSpec j2 = OperatorSpec::join_static(3, "tor");
  j2.params.transform = 1;  // dst_ip -> dst_tor
  plan.operators.push_back(j1);
  plan.operators.push_back(j2);
  plan.operators.push_back(OperatorSpec::project(4));
  plan.operators.push_back(OperatorSpec::group_aggregate(
      5, {"src_tor", "dst_tor"}, {Aggregate::Avg, Aggregate::Max, Aggregate::Min}));
  plan.source_eligible_len = apply_source_rules(plan);
  return plan;
}

QueryPlan build_loganalytics() {
  QueryPlan plan;
  plan.window_s = 10.0;
  plan.operators.push_back(OperatorSpec::map(1, 1));    // trim + lowercase
  plan.operators.push_back(OperatorSpec::filter(2, 1));  // pattern match
  plan.operators.push_back(OperatorSpec::map(3, 2));    // parse JobStats
  plan.operators.push_back(OperatorSpec::map(4, 3));    // width_bucket
  plan.operators.push_back(
      OperatorSpec::group_aggregate(5, {"tenant", "stat_name", "stat"}, {Aggregate::Count}));
  plan.source_eligible_len = apply_source_rules(plan);
  return plan;
}

std::vector<OperatorState> make_states(const QueryPlan& plan,
                                       std::shared_ptr<const StaticTable> table) {
  std::vector<OperatorState> states(plan.operators.size());
  for (std::size_t i = 0; i < plan.operators.size(); ++i)
    if (plan.operators[i].kind == OpKind::JoinStatic) {
      if (!table) throw std::invalid_argument("make_states: plan joins need a table");
      states[i].table = table;
    }
  return states;
}

CostModel calibrated_cost_s2s() {
  const double n = pingmesh_records_per_sec(kPingRateMbps);
  CostModel cm;
  cm.per_record[OpKind::Filter] = 0.13 / n;           // F filters 26.2 Mbps with 13% of a core
  cm.per_record[OpKind::GroupAggregate] = 0.80 / (0.86 * n);  // 80% on F's full output
  return cm;
}

CostModel calibrated_cost_t2t() {
  const double n = pingmesh_records_per_sec(kPingRateMbps);
  const double post_f = 0.86 * n;
  CostModel cm;
  cm.per_record[OpKind::Filter] = 0.13 / n;
  // Join cost is affine in ln(table size); at the default 500-entry table each
  // join consumes 44% of a core on F's output.
  cm.join_lookup_scale = 1.0e-6;
  cm.per_record[OpKind::JoinStatic] = 0.44 / post_f - cm.join_lookup_scale * std::log(500.0);
  cm.per_record[OpKind::Project] = 0.05 / post_f;
  cm.per_record[OpKind::GroupAggregate] = 0.38 / post_f;
  return cm;
}

CostModel calibrated_cost_log() {
  // Full pipeline at 49.6 Mbps (155k lines/s) consumes 0.31 of a core with the
  // default 0.9 pattern-hit rate: c1 + c2 + 0.9 (c3 + c4 + c5) = 0.31 / 155e3.
  CostModel cm;
  cm.per_op_override[1] = 3.0e-7;  // trim/lower
  cm.per_op_override[2] = 2.0e-7;  // pattern filter
  cm.per_op_override[3] = 9.666666666666667e-7;  // parse
  cm.per_op_override[4] = 3.0e-7;  // bucket
  cm.per_op_override[5] = 4.0e-7;  // count per group
  return cm;
}

void assign_windows(Batch& batch, double window_s) {
  const auto win_ms = static_cast<std::int64_t>(window_s * 1000.0);
  for (Record& r : batch)
    r.window_id = static_cast<std::int32_t>(r.event_time_ms / win_ms);
}

}  // namespace jarvis
