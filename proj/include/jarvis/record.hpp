#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace jarvis {

// Packed group key; all grouping keys in the shipped queries fit in 64 bits.
using GroupKey = std::uint64_t;

// Pingmesh probe record. Wire layout is 86 bytes.
struct PingPayload {
  std::uint32_t src_ip = 0;
  std::uint32_t dst_ip = 0;
  std::uint16_t src_cluster = 0;
  std::uint16_t dst_cluster = 0;
  std::int32_t rtt_us = 0;
  std::uint8_t err_code = 0;
};

// Intermediate record between the ip->ToR joins; ToR ids filled in as the
// joins run.
struct PingTorPayload {
  std::uint32_t src_ip = 0;
  std::uint32_t dst_ip = 0;
  std::uint32_t src_tor = 0;
  std::uint32_t dst_tor = 0;
  std::int32_t rtt_us = 0;
};

// Probe record after the joins and projection.
struct TorPayload {
  std::uint32_t src_tor = 0;
  std::uint32_t dst_tor = 0;
  std::int32_t rtt_us = 0;
};

// One raw log line.
struct LogPayload {
  std::string line;
};

// Parsed log statistics record.
struct JobStatsPayload {
  std::uint32_t tenant = 0;
  std::uint8_t stat_name = 0;
  std::int32_t stat = 0;
};

// Partial aggregate row travelling on the result path (40 bytes on the wire).
struct GroupRowPayload {
  GroupKey key = 0;
  std::int64_t count = 0;
  std::int64_t sum = 0;
  std::int64_t max = 0;
  std::int64_t min = 0;
};

inline constexpr int kPingWireBytes = 86;
inline constexpr int kGroupRowWireBytes = 40;
inline constexpr int kOperatorTagBytes = 2;

using Payload = std::variant<PingPayload, PingTorPayload, TorPayload, LogPayload,
                             JobStatsPayload, GroupRowPayload>;

struct Record {
  std::int64_t event_time_ms = 0;
  std::int32_t window_id = 0;
  std::int32_t wire_size = 0;
  Payload payload;
};

using Batch = std::vector<Record>;

struct Watermark {
  std::int64_t time_ms = 0;
};

inline std::int64_t batch_bytes(const Batch& b) {
  std::int64_t n = 0;
  for (const Record& r : b) n += r.wire_size;
  return n;
}

// Human-readable payload rendering for batch dumps and diagnostics.
inline std::string payload_to_string(const Payload& p) {
  struct Visitor {
    std::string operator()(const PingPayload& v) const {
      return "ping src=" + std::to_string(v.src_ip) + " dst=" + std::to_string(v.dst_ip) +
             " rtt_us=" + std::to_string(v.rtt_us) + " err=" + std::to_string(v.err_code);
    }
    std::string operator()(const PingTorPayload& v) const {
      return "ping_tor src_tor=" + std::to_string(v.src_tor) +
             " dst_tor=" + std::to_string(v.dst_tor) + " rtt_us=" + std::to_string(v.rtt_us);
    }
    std::string operator()(const TorPayload& v) const {
      return "tor src_tor=" + std::to_string(v.src_tor) +
             " dst_tor=" + std::to_string(v.dst_tor) + " rtt_us=" + std::to_string(v.rtt_us);
    }
    std::string operator()(const LogPayload& v) const { return "log " + v.line; }
    std::string operator()(const JobStatsPayload& v) const {
      return "stats tenant=" + std::to_string(v.tenant) +
             " name=" + std::to_string(v.stat_name) + " value=" + std::to_string(v.stat);
    }
    std::string operator()(const GroupRowPayload& v) const {
      return "group key=" + std::to_string(v.key) + " count=" + std::to_string(v.count) +
             " sum=" + std::to_string(v.sum) + " max=" + std::to_string(v.max) +
             " min=" + std::to_string(v.min);
    }
  };
  return std::visit(Visitor{}, p);
}

}  // namespace jarvis
