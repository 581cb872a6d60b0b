#pragma once

#include <cstdint>
#include <span>

#include "jarvis/record.hpp"

namespace jarvis {

struct ProxyConfig {
  double load_factor = 0.0;   // p in [0,1]
  double drained_thres = 0.05;
  double idle_thres = 0.20;
  int target_operator_id = 0;  // remote routing tag for drained records
};

struct ProxyStats {
  std::int64_t arrived = 0;
  std::int64_t forwarded = 0;
  std::int64_t drained_by_policy = 0;       // the (1-p) share
  std::int64_t drained_backpressure = 0;    // end-of-epoch pending flush
  double idle_time = 0.0;                   // seconds
  std::int64_t pending_peak = 0;

  void reset() { *this = ProxyStats{}; }
};

enum class ProxyVerdict { Congested, Idle, Stable };

const char* to_string(ProxyVerdict v);

struct RouteResult {
  Batch forward;
  Batch drain;
  double carry = 0.0;
};

// Deterministic fractional routing via error accumulation: carry += p per
// record; forward when carry >= 1. Over any n records |forwarded - p*n| < 1.
RouteResult route(std::span<const Record> batch, const ProxyConfig& cfg, double carry);

// End-of-epoch lossless flush: everything pending goes to the remote replica.
Batch flush_backpressure(Batch pending);

// Congested if the backpressure-drain fraction exceeds drained_thres, else
// Idle if the idle fraction exceeds idle_thres, else Stable. An operator
// that saw nothing is Idle by convention.
ProxyVerdict classify(const ProxyStats& stats, const ProxyConfig& cfg,
                      std::int64_t epoch_records, double epoch_duration);

struct WatermarkPair {
  Watermark forward;
  Watermark drain;
};

// Identical watermark on both paths. Throws on non-monotone input; the caller
// tracks the previous watermark.
WatermarkPair replicate_watermark(const Watermark& wm, std::int64_t prev_wm_ms);

}  // namespace jarvis
