#pragma once

#include <cstdint>
#include <memory>

#include "jarvis/operators.hpp"
#include "jarvis/query_model.hpp"
#include "jarvis/record.hpp"

namespace jarvis {

// Pingmesh-style probe stream: 86-byte records, 26.2 Mbps per source.
inline constexpr double kPingRateMbps = 26.2;
inline constexpr double kLogRateMbps = 49.6;
inline constexpr int kLogLineBytes = 40;  // fixed-width lines, space padded

inline double pingmesh_records_per_sec(double rate_mbps) {
  return rate_mbps * 1e6 / (8.0 * kPingWireBytes);
}

inline double log_records_per_sec(double rate_mbps) {
  return rate_mbps * 1e6 / (8.0 * kLogLineBytes);
}

struct PingmeshGenConfig {
  double rate_mbps = kPingRateMbps;
  double error_rate = 0.14;  // err_code != 0 fraction; the probe filter drops these
  std::uint32_t peer_count = 20000;
  std::uint32_t src_ip = 0;  // this source's address; must lie in the table's range
  // Latency spikes repeat with this period; 0 disables them. Duration is
  // clamped to the 40-60 s range.
  std::int64_t spike_every_s = 0;
  std::int64_t spike_duration_s = 50;
  double base_high_frac = 0.02;   // share of high-latency rtts outside spikes
  double spike_high_frac = 0.50;  // share during a spike
  std::uint64_t seed = 1;
};

// Deterministic batch for one 1-second epoch; identical for identical
// (cfg, epoch). Record event times are monotone within the epoch.
Batch gen_pingmesh(const PingmeshGenConfig& cfg, std::int64_t epoch);

struct LogGenConfig {
  double rate_mbps = kLogRateMbps;
  int tenant_count = 16;
  double pattern_hit_rate = 0.9;  // remaining lines are noise the filter drops
  std::uint64_t seed = 1;
};

Batch gen_log(const LogGenConfig& cfg, std::int64_t epoch);

// ip -> ToR id over [0, ip_space), contiguous blocks per ToR.
std::shared_ptr<const StaticTable> make_tor_table(std::uint32_t ip_space,
                                                  std::uint32_t tor_count);

// [Filter(err_code==0), GroupAggregate((src_ip,dst_ip), {avg,max,min})], 10 s window.
QueryPlan build_s2sprobe();

// [Filter, JoinStatic(src), JoinStatic(dst), Project, GroupAggregate], 10 s window.
QueryPlan build_t2tprobe();

// Fresh operator states for a plan; `table` is attached to every JoinStatic
// operator and must cover the generated IPs.
std::vector<OperatorState> make_states(const QueryPlan& plan,
                                       std::shared_ptr<const StaticTable> table = nullptr);

// [Map(trim/lower), Filter(patterns), Map(parse), Map(bucket), GroupAggregate(count)].
QueryPlan build_loganalytics();

// Cost models calibrated so the full pipelines consume the documented core
// fractions at the default rates (13% filter / 80% aggregate for the probe
// query; 31% of a core for log analytics at 49.6 Mbps).
CostModel calibrated_cost_s2s();
CostModel calibrated_cost_t2t();
CostModel calibrated_cost_log();

// Window annotation done at ingestion; not a costed operator.
void assign_windows(Batch& batch, double window_s);

}  // namespace jarvis
