#include "jarvis/control_proxy.hpp"

#include <stdexcept>

namespace jarvis {

const char* to_string(ProxyVerdict v) {
  switch (v) {
    case ProxyVerdict::Congested: return "congested";
    case ProxyVerdict::Idle: return "idle";
    case ProxyVerdict::Stable: return "stable";
  }
  return "?";
}

RouteResult route(std::span<const Record> batch, const ProxyConfig& cfg, double carry) {
  if (cfg.load_factor < 0.0 || cfg.load_factor > 1.0)
    throw std::invalid_argument("route: load factor outside [0,1]");
  RouteResult res;
  res.carry = carry;
  if (cfg.load_factor >= 1.0) {
    res.forward.assign(batch.begin(), batch.end());
    return res;
  }
  if (cfg.load_factor <= 0.0) {
    res.drain.assign(batch.begin(), batch.end());
    return res;
  }
  for (const Record& r : batch) {
    res.carry += cfg.load_factor;
    // small slack so grid-valued p (e.g. 0.83) hits exact multiples despite
    // accumulated fp error
    if (res.carry >= 1.0 - 1e-9) {
      res.carry -= 1.0;
      if (res.carry < 0.0) res.carry = 0.0;
      res.forward.push_back(r);
    } else {
      res.drain.push_back(r);
    }
  }
  return res;
}

Batch flush_backpressure(Batch pending) { return pending; }

ProxyVerdict classify(const ProxyStats& stats, const ProxyConfig& cfg,
                      std::int64_t epoch_records, double epoch_duration) {
  if (epoch_records <= 0) return ProxyVerdict::Idle;
  double bp = static_cast<double>(stats.drained_backpressure) /
              static_cast<double>(epoch_records);
  if (bp > cfg.drained_thres) return ProxyVerdict::Congested;
  if (epoch_duration > 0.0 && stats.idle_time / epoch_duration > cfg.idle_thres)
    return ProxyVerdict::Idle;
  return ProxyVerdict::Stable;
}

WatermarkPair replicate_watermark(const Watermark& wm, std::int64_t prev_wm_ms) {
  if (wm.time_ms <= prev_wm_ms)
    throw std::invalid_argument("replicate_watermark: NonMonotoneWatermark");
  return WatermarkPair{wm, wm};
}

}  // namespace jarvis
