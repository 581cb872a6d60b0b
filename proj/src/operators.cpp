#include "jarvis/operators.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace jarvis {

PartialAggregate merge_partials(const PartialAggregate& a, const PartialAggregate& b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  if (a.group_key != b.group_key) throw std::invalid_argument("merge_partials: KeyMismatch");
  PartialAggregate m;
  m.group_key = a.group_key;
  m.count = a.count + b.count;
  m.sum_rtt = a.sum_rtt + b.sum_rtt;
  m.max_rtt = std::max(a.max_rtt, b.max_rtt);
  m.min_rtt = std::min(a.min_rtt, b.min_rtt);
  return m;
}

double CostModel::record_cost(const OperatorSpec& op, std::size_t live_groups,
                              std::size_t table_size) const {
  double c = 0.0;
  if (auto it = per_op_override.find(op.id); it != per_op_override.end()) {
    c = it->second;
  } else if (auto kt = per_record.find(op.kind); kt != per_record.end()) {
    c = kt->second;
  }
  if (op.kind == OpKind::GroupAggregate && group_lookup_scale > 0.0)
    c += group_lookup_scale * std::log2(1.0 + static_cast<double>(live_groups));
  if (op.kind == OpKind::JoinStatic && join_lookup_scale > 0.0 && table_size > 0)
    c += join_lookup_scale * std::log(static_cast<double>(table_size));
  return c;
}

std::size_t OperatorState::live_groups() const {
  std::size_t n = 0;
  for (const auto& [w, groups] : windows) n += groups.size();
  return n;
}

namespace {

// Log patterns of the analytics query, pre-lowercased.
const char* kLogPatterns[] = {"tenant name", "job running time", "cpu util", "memory util"};

bool log_line_matches(const std::string& line) {
  for (const char* p : kLogPatterns)
    if (line.find(p) != std::string::npos) return true;
  return false;
}

std::string trim_lower(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  std::string out = s.substr(a, b - a);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Stat names in log lines, indexed by JobStatsPayload::stat_name.
const char* kStatNames[] = {"job running time", "cpu util", "memory util"};

std::optional<JobStatsPayload> parse_job_stats(const std::string& line) {
  // key=value layout: tenant name=t<k>=<stat name>=<value>
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t eq = line.find('=', start);
    if (eq == std::string::npos) {
      parts.push_back(line.substr(start));
      break;
    }
    parts.push_back(line.substr(start, eq - start));
    start = eq + 1;
  }
  if (parts.size() < 4 || parts[0] != "tenant name") return std::nullopt;
  if (parts[1].size() < 2 || parts[1][0] != 't') return std::nullopt;
  JobStatsPayload js;
  try {
    js.tenant = static_cast<std::uint32_t>(std::stoul(parts[1].substr(1)));
    js.stat = std::stoi(parts[3]);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  js.stat_name = 255;
  for (std::uint8_t i = 0; i < 3; ++i)
    if (parts[2] == kStatNames[i]) js.stat_name = i;
  if (js.stat_name == 255) return std::nullopt;
  return js;
}

// 1-based equi-width bucket index, clamped like SQL's width_bucket.
std::int32_t width_bucket(std::int32_t v, std::int32_t lo, std::int32_t hi, int buckets) {
  if (v < lo) return 0;
  if (v >= hi) return buckets + 1;
  return 1 + (v - lo) * buckets / (hi - lo);
}

}  // namespace

GroupKey group_key_for(const OperatorSpec& op, const Record& r) {
  (void)op;
  if (const auto* p = std::get_if<PingPayload>(&r.payload))
    return (static_cast<GroupKey>(p->src_ip) << 32) | p->dst_ip;
  if (const auto* t = std::get_if<TorPayload>(&r.payload))
    return (static_cast<GroupKey>(t->src_tor) << 32) | t->dst_tor;
  if (const auto* j = std::get_if<JobStatsPayload>(&r.payload))
    return (static_cast<GroupKey>(j->tenant) << 16) |
           (static_cast<GroupKey>(j->stat_name) << 8) |
           static_cast<GroupKey>(j->stat & 0xff);
  if (const auto* pt = std::get_if<PingTorPayload>(&r.payload))
    return (static_cast<GroupKey>(pt->src_tor) << 32) | pt->dst_tor;
  return 0;
}

namespace {

std::int64_t agg_value(const Record& r) {
  if (const auto* p = std::get_if<PingPayload>(&r.payload)) return p->rtt_us;
  if (const auto* t = std::get_if<TorPayload>(&r.payload)) return t->rtt_us;
  if (const auto* j = std::get_if<JobStatsPayload>(&r.payload)) return j->stat;
  if (const auto* pt = std::get_if<PingTorPayload>(&r.payload)) return pt->rtt_us;
  return 0;
}

}  // namespace

std::optional<Record> apply_stateless(const OperatorSpec& op, const Record& r,
                                      const OperatorState& state) {
  switch (op.kind) {
    case OpKind::Filter: {
      if (op.params.predicate == 0) {
        const auto& p = std::get<PingPayload>(r.payload);
        if (p.err_code != 0) return std::nullopt;
        return r;
      }
      const auto& l = std::get<LogPayload>(r.payload);
      if (!log_line_matches(l.line)) return std::nullopt;
      return r;
    }
    case OpKind::Map: {
      Record out = r;
      switch (op.params.transform) {
        case 0:
          break;  // identity
        case 1: {  // trim + lowercase
          auto& l = std::get<LogPayload>(out.payload);
          l.line = trim_lower(l.line);
          out.wire_size = static_cast<std::int32_t>(l.line.size());
          break;
        }
        case 2: {  // parse JobStats
          const auto& l = std::get<LogPayload>(out.payload);
          auto js = parse_job_stats(l.line);
          if (!js) return std::nullopt;
          out.payload = *js;
          out.wire_size = 9;
          break;
        }
        case 3: {  // bucketize stat into 10 equi-width buckets over [0,100)
          auto& js = std::get<JobStatsPayload>(out.payload);
          js.stat = width_bucket(js.stat, 0, 100, 10);
          break;
        }
        default:
          break;
      }
      return out;
    }
    case OpKind::JoinStatic: {
      if (!state.table) throw std::runtime_error("JoinStatic without a table");
      Record out = r;
      if (const auto* p = std::get_if<PingPayload>(&out.payload)) {
        PingTorPayload pt;
        pt.src_ip = p->src_ip;
        pt.dst_ip = p->dst_ip;
        pt.rtt_us = p->rtt_us;
        out.payload = pt;
        out.wire_size = r.wire_size + 4;
      } else {
        out.wire_size = r.wire_size + 4;
      }
      auto& pt = std::get<PingTorPayload>(out.payload);
      std::uint32_t key = op.params.transform == 0 ? pt.src_ip : pt.dst_ip;
      auto it = state.table->find(key);
      if (it == state.table->end()) return std::nullopt;  // table must cover generated IPs
      if (op.params.transform == 0)
        pt.src_tor = it->second;
      else
        pt.dst_tor = it->second;
      return out;
    }
    case OpKind::Project: {
      const auto& pt = std::get<PingTorPayload>(r.payload);
      Record out = r;
      TorPayload t;
      t.src_tor = pt.src_tor;
      t.dst_tor = pt.dst_tor;
      t.rtt_us = pt.rtt_us;
      out.payload = t;
      out.wire_size = 12;
      return out;
    }
    case OpKind::GroupAggregate:
    case OpKind::StreamStreamJoin:
      throw std::invalid_argument("apply_stateless on a stateful operator");
  }
  return std::nullopt;
}

OperatorResult run_operator(const OperatorSpec& op, std::span<const Record> input,
                            OperatorState& state, double budget_left, const CostModel& cost) {
  if (op.kind == OpKind::StreamStreamJoin)
    throw std::invalid_argument("UnknownOperatorKind: not executable on a source");
  OperatorResult res;
  std::size_t i = 0;
  for (; i < input.size(); ++i) {
    const Record& r = input[i];
    double c = cost.record_cost(op, state.live_groups(), state.table_size());
    if (c > budget_left) break;
    budget_left -= c;
    res.consumed += c;
    if (op.kind == OpKind::GroupAggregate) {
      GroupKey key = group_key_for(op, r);
      auto& pa = state.windows[r.window_id][key];
      std::int64_t v = agg_value(r);
      if (pa.count == 0) {
        pa.group_key = key;
        pa.sum_rtt = v;
        pa.max_rtt = v;
        pa.min_rtt = v;
        pa.count = 1;
      } else {
        pa.count += 1;
        pa.sum_rtt += v;
        pa.max_rtt = std::max<std::int64_t>(pa.max_rtt, v);
        pa.min_rtt = std::min<std::int64_t>(pa.min_rtt, v);
      }
    } else {
      if (auto out = apply_stateless(op, r, state)) res.output.push_back(std::move(*out));
    }
  }
  res.processed = i;
  res.pending.assign(input.begin() + static_cast<std::ptrdiff_t>(i), input.end());
  return res;
}

namespace {

Batch rows_for_window(std::int32_t window_id,
                      const std::unordered_map<GroupKey, PartialAggregate>& groups,
                      double window_s) {
  Batch rows;
  rows.reserve(groups.size());
  for (const auto& [key, pa] : groups) {
    Record r;
    r.window_id = window_id;
    r.event_time_ms = static_cast<std::int64_t>((window_id + 1) * window_s * 1000.0);
    r.wire_size = kGroupRowWireBytes;
    GroupRowPayload g;
    g.key = key;
    g.count = pa.count;
    g.sum = pa.sum_rtt;
    g.max = pa.max_rtt;
    g.min = pa.min_rtt;
    r.payload = g;
    rows.push_back(r);
  }
  std::sort(rows.begin(), rows.end(), [](const Record& a, const Record& b) {
    return std::get<GroupRowPayload>(a.payload).key < std::get<GroupRowPayload>(b.payload).key;
  });
  return rows;
}

}  // namespace

Batch take_state(const OperatorSpec& op, OperatorState& state, double window_s) {
  (void)op;
  Batch out;
  for (const auto& [w, groups] : state.windows) {
    Batch rows = rows_for_window(w, groups, window_s);
    out.insert(out.end(), rows.begin(), rows.end());
  }
  state.windows.clear();
  return out;
}

Batch take_closed_windows(const OperatorSpec& op, OperatorState& state, std::int64_t wm_ms,
                          double window_s) {
  (void)op;
  Batch out;
  const std::int64_t wlen = static_cast<std::int64_t>(window_s * 1000.0);
  for (auto it = state.windows.begin(); it != state.windows.end();) {
    if ((it->first + 1) * wlen <= wm_ms) {
      Batch rows = rows_for_window(it->first, it->second, window_s);
      out.insert(out.end(), rows.begin(), rows.end());
      it = state.windows.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

double observe_relay_ratio(std::int64_t emitted_bytes, std::int64_t ingested_bytes) {
  if (ingested_bytes <= 0) throw std::invalid_argument("observe_relay_ratio: ZeroIngest");
  double r = static_cast<double>(emitted_bytes) / static_cast<double>(ingested_bytes);
  return std::clamp(r, 0.0, 1.0);
}

}  // namespace jarvis
