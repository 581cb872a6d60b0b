#include "jarvis/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "jarvis/control_proxy.hpp"
#include "jarvis/operators.hpp"
#include "jarvis/profile.hpp"

namespace jarvis {

double StepSchedule::at(std::int64_t epoch) const {
  double v = base;
  for (const auto& [from, val] : steps) {
    if (epoch >= from) v = val;
    else break;
  }
  return v;
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (cfg.query != "s2sprobe" && cfg.query != "t2tprobe" && cfg.query != "loganalytics")
    fail("unknown query '" + cfg.query + "'");
  if (cfg.n_sources < 1 || cfg.n_queries < 1) fail("n_sources and n_queries must be >= 1");
  if (cfg.epochs < 1) fail("epochs must be >= 1");
  if (cfg.warmup_epochs < 0 || cfg.warmup_epochs >= cfg.epochs)
    fail("warmup_epochs must lie in [0, epochs)");
  if (cfg.epoch_s != 1.0) fail("only 1 s epochs are supported");
  if (cfg.link_mbps <= 0.0) fail("link_mbps must be > 0");
  if (cfg.sp_ingest_mbps < 0.0 || cfg.sp_cores < 0.0) fail("sp capacities must be >= 0");
  if (cfg.latency_bound_s <= 0.0) fail("latency_bound_s must be > 0");
  if (cfg.drained_thres < 0.0 || cfg.drained_thres > 1.0 || cfg.idle_thres < 0.0 ||
      cfg.idle_thres > 1.0)
    fail("thresholds must lie in [0,1]");
  if (cfg.debounce_epochs < 1 || cfg.max_adapt_epochs < 1) fail("adaptation epochs must be >= 1");
  if (cfg.lf_grid <= 0.0 || cfg.lf_grid > 0.5) fail("lf_grid must lie in (0, 0.5]");
  if (cfg.peer_count == 0 || static_cast<std::uint32_t>(cfg.n_sources) > cfg.peer_count)
    fail("peer_count must cover all source addresses");
  if (cfg.error_rate < 0.0 || cfg.error_rate > 1.0) fail("error_rate must lie in [0,1]");
  if (cfg.pattern_hit_rate < 0.0 || cfg.pattern_hit_rate > 1.0)
    fail("pattern_hit_rate must lie in [0,1]");
  if (cfg.tenant_count < 1) fail("tenant_count must be >= 1");
  auto check_steps = [&](const StepSchedule& s, const char* name) {
    if (s.base < 0.0) fail(std::string(name) + " must be >= 0");
    std::int64_t prev = -1;
    for (const auto& [from, val] : s.steps) {
      if (from <= prev || from >= cfg.epochs)
        fail(std::string(name) + " breakpoints must ascend within the run");
      if (val < 0.0) fail(std::string(name) + " values must be >= 0");
      prev = from;
    }
  };
  check_steps(cfg.cpu_budget, "cpu_budget");
  check_steps(cfg.rate_mbps, "rate_mbps");
  check_steps(cfg.table_size, "table_size");
  if (cfg.table_size.base < 1.0) fail("table_size must be >= 1");
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t instance_seed(const ExperimentConfig& cfg, int node, int query) {
  return mix64(cfg.seed ^ mix64(static_cast<std::uint64_t>(node) * 2654435761ULL +
                                static_cast<std::uint64_t>(query) * 40503987ULL + 17ULL));
}

bool is_log_query(const ExperimentConfig& cfg) { return cfg.query == "loganalytics"; }

QueryPlan plan_for(const ExperimentConfig& cfg) {
  if (cfg.query == "s2sprobe") return build_s2sprobe();
  if (cfg.query == "t2tprobe") return build_t2tprobe();
  return build_loganalytics();
}

CostModel cost_for(const ExperimentConfig& cfg) {
  CostModel cost = cfg.query == "s2sprobe"   ? calibrated_cost_s2s()
                   : cfg.query == "t2tprobe" ? calibrated_cost_t2t()
                                             : calibrated_cost_log();
  for (const auto& [id, v] : cfg.cost_per_op) cost.per_op_override[id] = v;
  return cost;
}

Batch generate(const ExperimentConfig& cfg, int node, int query, std::int64_t epoch) {
  const double rate = cfg.rate_mbps.at(epoch);
  if (is_log_query(cfg)) {
    LogGenConfig g;
    g.rate_mbps = rate;
    g.tenant_count = cfg.tenant_count;
    g.pattern_hit_rate = cfg.pattern_hit_rate;
    g.seed = instance_seed(cfg, node, query);
    return gen_log(g, epoch);
  }
  PingmeshGenConfig g;
  g.rate_mbps = rate;
  g.error_rate = cfg.error_rate;
  g.peer_count = cfg.peer_count;
  g.src_ip = static_cast<std::uint32_t>(node);
  g.spike_every_s = cfg.spike_every_s;
  g.spike_duration_s = cfg.spike_duration_s;
  g.seed = instance_seed(cfg, node, query);
  return gen_pingmesh(g, epoch);
}

struct LinkItem {
  enum class Kind { Drained, Result, Wm };
  Kind kind = Kind::Drained;
  Batch batch;
  int target_op = 1;  // 1-based operator id, Drained only
  std::int64_t wm_ms = -1;
  int source = 0;  // filled on delivery
};

double full_local_cost(const ProfileEstimate& est) {
  double reach = 1.0, per_record = 0.0;
  for (std::size_t i = 0; i < est.c.size(); ++i) {
    per_record += reach * est.c[i];
    reach *= est.r[i];
  }
  return est.n_records * per_record;
}

struct Instance {
  std::vector<OperatorState> states;
  std::unique_ptr<AdaptController> ctrl;
  std::vector<double> lf;
  std::vector<double> carry;
  std::vector<Batch> pending;  // per operator; only All-Src carries across epochs
  std::deque<Record> ingress;
  std::int64_t last_processed = -1;
  bool has_est = false;
  ProfileEstimate est;
  double demand = 0.0;
  std::int64_t wm_ms = -1;
  std::deque<LinkItem> link;
  std::int64_t link_backlog = 0;
};

struct SpQuery {
  std::vector<OperatorState> states;
  std::vector<std::int64_t> src_wm;
  std::deque<LinkItem> queue;  // delivered, not yet executed (sp_cores bound)
  std::vector<FinalRow> out;
};

std::int64_t enqueue_drained(Instance& inst, Batch batch, int target_op) {
  if (batch.empty()) return 0;
  std::int64_t bytes = 0;
  for (Record& r : batch) {
    r.wire_size += kOperatorTagBytes;
    bytes += r.wire_size;
  }
  inst.link_backlog += bytes;
  inst.link.push_back(LinkItem{LinkItem::Kind::Drained, std::move(batch), target_op, -1, 0});
  return bytes;
}

std::int64_t enqueue_result(Instance& inst, Batch rows) {
  if (rows.empty()) return 0;
  const std::int64_t bytes = batch_bytes(rows);
  inst.link_backlog += bytes;
  inst.link.push_back(LinkItem{LinkItem::Kind::Result, std::move(rows), 0, -1, 0});
  return bytes;
}

PartialAggregate to_partial(const GroupRowPayload& g) {
  PartialAggregate p;
  p.group_key = g.key;
  p.count = g.count;
  p.sum_rtt = g.sum;
  p.max_rtt = g.max;
  p.min_rtt = g.min;
  return p;
}

void merge_rows_into(OperatorState& state, const Batch& rows) {
  for (const Record& r : rows) {
    const auto& g = std::get<GroupRowPayload>(r.payload);
    PartialAggregate incoming = to_partial(g);
    auto& slot = state.windows[r.window_id][g.key];
    if (slot.count == 0) {
      slot = incoming;
    } else {
      slot = merge_partials(slot, incoming);
    }
  }
}

// Emits closed windows of the final aggregate state in (window, key) order.
void close_windows(OperatorState& state, std::int64_t wm_ms, double window_s,
                   std::vector<FinalRow>& out) {
  const auto wlen = static_cast<std::int64_t>(window_s * 1000.0);
  for (auto it = state.windows.begin(); it != state.windows.end();) {
    if ((it->first + 1) * wlen <= wm_ms) {
      std::vector<FinalRow> rows;
      rows.reserve(it->second.size());
      for (const auto& [key, p] : it->second)
        rows.push_back(FinalRow{it->first, key, p.count, p.sum_rtt, p.max_rtt, p.min_rtt});
      std::sort(rows.begin(), rows.end());
      out.insert(out.end(), rows.begin(), rows.end());
      it = state.windows.erase(it);
    } else {
      ++it;
    }
  }
}

struct Sim {
  const ExperimentConfig& cfg;
  InstrumentedPlan plan;
  CostModel cost;
  std::shared_ptr<const StaticTable> table;
  std::vector<std::vector<Instance>> inst;  // [node][query]
  std::vector<SpQuery> sp;                  // [query]
  RunResult result;
  int agg_op = -1;  // index of the final GroupAggregate

  explicit Sim(const ExperimentConfig& c) : cfg(c) {
    plan = instrument(plan_for(cfg));
    cost = cost_for(cfg);
    if (cfg.query == "t2tprobe")
      table = make_tor_table(cfg.peer_count,
                             static_cast<std::uint32_t>(cfg.table_size.at(0)));
    for (int i = 0; i < plan.plan.size(); ++i)
      if (plan.plan.operators[static_cast<std::size_t>(i)].kind == OpKind::GroupAggregate)
        agg_op = i;
    if (agg_op != plan.plan.size() - 1)
      throw std::invalid_argument("config: plan must end in a GroupAggregate");

    const int m = plan.proxy_count;
    inst.resize(static_cast<std::size_t>(cfg.n_sources));
    for (auto& row : inst) {
      row.resize(static_cast<std::size_t>(cfg.n_queries));
      for (Instance& q : row) {
        q.states = make_states(plan.plan, table);
        q.lf.assign(static_cast<std::size_t>(m), 0.0);
        q.carry.assign(static_cast<std::size_t>(m), 0.0);
        q.pending.resize(plan.plan.operators.size());
        if (cfg.policy == PolicyKind::Jarvis || cfg.policy == PolicyKind::BestOP) {
          AdaptOptions ao;
          ao.debounce_epochs = cfg.debounce_epochs;
          ao.max_adapt_epochs = cfg.max_adapt_epochs;
          ao.lf_grid = cfg.lf_grid;
          ao.lp_init = cfg.lp_init;
          ao.fine_tune = cfg.fine_tune;
          if (cfg.policy == PolicyKind::BestOP)
            ao.planner = [](const ProfileEstimate& e) { return best_op(e); };
          q.ctrl = std::make_unique<AdaptController>(m, ao);
        }
      }
    }
    sp.resize(static_cast<std::size_t>(cfg.n_queries));
    for (SpQuery& s : sp) {
      s.states = make_states(plan.plan, table);
      s.src_wm.assign(static_cast<std::size_t>(cfg.n_sources), -1);
    }
  }

  void maybe_resize_table(std::int64_t epoch) {
    if (cfg.query != "t2tprobe" || cfg.table_size.steps.empty()) return;
    for (const auto& [from, val] : cfg.table_size.steps) {
      if (from != epoch) continue;
      table = make_tor_table(cfg.peer_count, static_cast<std::uint32_t>(val));
      for (auto& row : inst)
        for (Instance& q : row)
          for (std::size_t i = 0; i < q.states.size(); ++i)
            if (q.states[i].table) q.states[i].table = table;
      for (SpQuery& s : sp)
        for (std::size_t i = 0; i < s.states.size(); ++i)
          if (s.states[i].table) s.states[i].table = table;
    }
  }

  std::vector<double> static_lf(double granted) const {
    const int m = plan.proxy_count;
    switch (cfg.policy) {
      case PolicyKind::AllSP: return all_sp(m);
      case PolicyKind::AllSrc: return all_src(m);
      case PolicyKind::FilterSrc: {
        auto p = filter_src(plan.plan);
        p.resize(static_cast<std::size_t>(m));
        return p;
      }
      case PolicyKind::LBDP: {
        std::vector<double> p(static_cast<std::size_t>(m), 1.0);
        p[0] = lb_dp(granted, cfg.lbdp_sp_share)[0];
        return p;
      }
      default: return all_sp(m);
    }
  }

  double bytes_per_epoch_link() const {
    double per_link = cfg.link_mbps;
    if (cfg.sp_ingest_mbps > 0.0)
      per_link = std::min(per_link, cfg.sp_ingest_mbps /
                                        (static_cast<double>(cfg.n_sources) * cfg.n_queries));
    return per_link * 1e6 / 8.0 * cfg.epoch_s;
  }

  // One source-side epoch for one query instance; returns the metrics row.
  EpochMetrics node_epoch(std::int64_t epoch, int node, int query, double granted) {
    Instance& q = inst[static_cast<std::size_t>(node)][static_cast<std::size_t>(query)];
    const int m = plan.proxy_count;
    const double bw_bytes = bytes_per_epoch_link();

    EpochMetrics row;
    row.epoch = epoch;
    row.node = node;
    row.query = query;
    row.budget = granted;

    Batch gen = generate(cfg, node, query, epoch);
    assign_windows(gen, plan.plan.window_s);
    row.input_bytes = batch_bytes(gen);
    result.generated_records += static_cast<std::int64_t>(gen.size());
    for (Record& r : gen) q.ingress.push_back(std::move(r));

    // Admission: hold input while the link is saturated; All-Src additionally
    // holds input its pipeline has no hope of processing this epoch.
    Batch admitted;
    std::int64_t pending_total = 0;
    for (const Batch& p : q.pending) pending_total += static_cast<std::int64_t>(p.size());
    std::int64_t admit_cap = std::numeric_limits<std::int64_t>::max();
    if (cfg.policy == PolicyKind::AllSrc && q.last_processed >= 0)
      admit_cap = std::max<std::int64_t>(std::max<std::int64_t>(64, 2 * q.last_processed) -
                                             pending_total,
                                         0);
    // Keep the post-transmission link queue within two epochs of bandwidth.
    std::int64_t allow_bytes =
        std::max<std::int64_t>(static_cast<std::int64_t>(3.0 * bw_bytes) - q.link_backlog, 0);
    std::int64_t taken_bytes = 0;
    while (!q.ingress.empty() &&
           taken_bytes + q.ingress.front().wire_size <= allow_bytes &&
           static_cast<std::int64_t>(admitted.size()) < admit_cap) {
      taken_bytes += q.ingress.front().wire_size;
      admitted.push_back(std::move(q.ingress.front()));
      q.ingress.pop_front();
    }
    row.admitted_bytes = batch_bytes(admitted);

    if (q.ctrl)
      q.ctrl->note_conditions(granted, static_cast<double>(admitted.size()));

    const bool profiling = q.ctrl && q.ctrl->wants_profile();
    if (profiling && admitted.empty()) {
      // Nothing to measure; hold the profile until records are admitted.
      row.phase = RuntimePhase::Profile;
      row.verdict = QueryVerdict::Idle;
      row.lf = q.ctrl->load_factors();
    } else if (profiling) {
      row.phase = RuntimePhase::Profile;
      ProfileRun pr = profile_epoch(plan, admitted, granted, cost, q.states,
                                    q.has_est ? &q.est : nullptr);
      std::int64_t drained_records = 0;
      for (int i = 0; i < m; ++i) {
        drained_records +=
            static_cast<std::int64_t>(pr.drained[static_cast<std::size_t>(i)].size());
        row.drained_bytes += enqueue_drained(
            q, std::move(pr.drained[static_cast<std::size_t>(i)]),
            plan.plan.operators[static_cast<std::size_t>(i)].id);
      }
      q.est = pr.est;
      q.has_est = true;
      q.demand = full_local_cost(q.est);
      q.ctrl->deliver_profile(q.est);
      row.compute_used = pr.consumed;
      // A profiling epoch is not a stable one unless it could keep up anyway.
      row.verdict = static_cast<double>(drained_records) >
                            cfg.drained_thres * static_cast<double>(pr.est.n_records)
                        ? QueryVerdict::Congested
                        : QueryVerdict::Stable;
      q.ctrl->observe(row.verdict);
      row.lf = q.ctrl->load_factors();
    } else {
      if (q.ctrl) {
        q.lf = q.ctrl->load_factors();
        row.phase = q.ctrl->phase();
      } else {
        q.lf = static_lf(granted);
        row.phase = RuntimePhase::Probe;
      }
      row.lf = q.lf;

      std::vector<ProxyStats> stats(static_cast<std::size_t>(m));
      Batch cur = std::move(admitted);
      double remaining = granted;
      for (int i = 0; i < m; ++i) {
        const OperatorSpec& op = plan.plan.operators[static_cast<std::size_t>(i)];
        ProxyConfig pc;
        pc.load_factor = q.lf[static_cast<std::size_t>(i)];
        pc.drained_thres = cfg.drained_thres;
        pc.idle_thres = cfg.idle_thres;
        pc.target_operator_id = op.id;
        RouteResult rr = route(cur, pc, q.carry[static_cast<std::size_t>(i)]);
        q.carry[static_cast<std::size_t>(i)] = rr.carry;
        ProxyStats& st = stats[static_cast<std::size_t>(i)];
        st.arrived = static_cast<std::int64_t>(cur.size());
        st.forwarded = static_cast<std::int64_t>(rr.forward.size());
        st.drained_by_policy = static_cast<std::int64_t>(rr.drain.size());
        row.drained_bytes += enqueue_drained(q, std::move(rr.drain), op.id);

        Batch work = std::move(rr.forward);
        Batch& carried = q.pending[static_cast<std::size_t>(i)];
        if (!carried.empty()) {
          work.insert(work.begin(), std::make_move_iterator(carried.begin()),
                      std::make_move_iterator(carried.end()));
          carried.clear();
        }
        OperatorResult res = run_operator(op, work, q.states[static_cast<std::size_t>(i)],
                                          remaining, cost);
        remaining -= res.consumed;
        if (i == 0) q.last_processed = static_cast<std::int64_t>(res.processed);
        if (!res.pending.empty()) {
          if (cfg.policy == PolicyKind::AllSrc) {
            carried = std::move(res.pending);
          } else {
            st.drained_backpressure = static_cast<std::int64_t>(res.pending.size());
            row.drained_bytes += enqueue_drained(q, std::move(res.pending), op.id);
          }
        }
        cur = std::move(res.output);
      }
      if (m < plan.plan.size() && !cur.empty())
        row.drained_bytes +=
            enqueue_drained(q, std::move(cur),
                            plan.plan.operators[static_cast<std::size_t>(m)].id);

      row.compute_used = granted - remaining;
      const double idle_s =
          granted > 0.0 ? cfg.epoch_s * std::max(0.0, remaining / granted) : 0.0;
      std::vector<ProxyVerdict> verdicts(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        stats[static_cast<std::size_t>(i)].idle_time = idle_s;
        ProxyConfig pc;
        pc.drained_thres = cfg.drained_thres;
        pc.idle_thres = cfg.idle_thres;
        verdicts[static_cast<std::size_t>(i)] =
            classify(stats[static_cast<std::size_t>(i)], pc,
                     stats[static_cast<std::size_t>(i)].arrived, cfg.epoch_s);
      }
      row.verdict = probe_cp(verdicts);
      // Mirror the controller: Idle is not actionable with nothing left to
      // run locally, so an all-ones pipeline at Idle counts as stable.
      if (row.verdict == QueryVerdict::Idle &&
          std::all_of(q.lf.begin(), q.lf.end(), [](double v) { return v >= 1.0 - 1e-9; }))
        row.verdict = QueryVerdict::Stable;

      // Per-epoch delta flush of the local aggregate state on the result path.
      if (agg_op < m) {
        Batch rows = take_state(plan.plan.operators[static_cast<std::size_t>(agg_op)],
                                q.states[static_cast<std::size_t>(agg_op)],
                                plan.plan.window_s);
        row.result_bytes = enqueue_result(q, std::move(rows));
      }
      if (q.ctrl) q.ctrl->observe(row.verdict);
    }

    // Watermark: everything at or below it has left this node (or been dropped).
    std::int64_t cand =
        q.ingress.empty() ? static_cast<std::int64_t>((epoch + 1) * 1000 * cfg.epoch_s) - 1
                          : q.ingress.front().event_time_ms - 1;
    for (const Batch& p : q.pending)
      if (!p.empty()) cand = std::min(cand, p.front().event_time_ms - 1);
    if (cand > q.wm_ms) {
      q.wm_ms = cand;
      q.link.push_back(LinkItem{LinkItem::Kind::Wm, {}, 0, q.wm_ms, 0});
    }

    double pending_cost = 0.0;
    for (std::size_t i = 0; i < q.pending.size(); ++i)
      if (!q.pending[i].empty())
        pending_cost += static_cast<double>(q.pending[i].size()) *
                        cost.record_cost(plan.plan.operators[i], q.states[i].live_groups(),
                                         q.states[i].table_size());
    const double bw_ps = bw_bytes / cfg.epoch_s;
    row.latency_s = cfg.epoch_s + static_cast<double>(q.link_backlog) / bw_ps;
    if (pending_cost > 0.0)
      row.latency_s += granted > 0.0 ? pending_cost / granted * cfg.epoch_s
                                     : cfg.latency_bound_s * 10.0;
    return row;
  }

  // Moves up to one epoch of bandwidth from the instance link into the SP
  // queue of its logical query; returns bytes transmitted.
  std::int64_t transmit(Instance& q, SpQuery& spq, int node, double cap_bytes) {
    std::int64_t sent = 0;
    while (!q.link.empty()) {
      LinkItem& item = q.link.front();
      if (item.kind == LinkItem::Kind::Wm) {
        item.source = node;
        spq.queue.push_back(std::move(item));
        q.link.pop_front();
        continue;
      }
      std::size_t take = 0;
      while (take < item.batch.size() &&
             static_cast<double>(sent + item.batch[take].wire_size) <= cap_bytes)
        sent += item.batch[take++].wire_size;
      Batch moved(std::make_move_iterator(item.batch.begin()),
                  std::make_move_iterator(item.batch.begin() + static_cast<long>(take)));
      item.batch.erase(item.batch.begin(), item.batch.begin() + static_cast<long>(take));
      if (!moved.empty()) {
        LinkItem d;
        d.kind = item.kind;
        d.batch = std::move(moved);
        d.target_op = item.target_op;
        d.source = node;
        spq.queue.push_back(std::move(d));
      }
      if (!item.batch.empty()) break;  // capacity exhausted mid-item
      q.link.pop_front();
      if (static_cast<double>(sent) >= cap_bytes) break;
    }
    q.link_backlog -= sent;
    return sent;
  }

  // Executes queued SP work within cap (cpu-seconds; infinity = unbounded).
  void sp_execute(SpQuery& spq, double cap) {
    while (!spq.queue.empty()) {
      LinkItem item = std::move(spq.queue.front());
      spq.queue.pop_front();
      if (item.kind == LinkItem::Kind::Wm) {
        auto& wm = spq.src_wm[static_cast<std::size_t>(item.source)];
        wm = std::max(wm, item.wm_ms);
        continue;
      }
      if (item.kind == LinkItem::Kind::Result) {
        merge_rows_into(spq.states[static_cast<std::size_t>(agg_op)], item.batch);
        continue;
      }
      Batch cur = std::move(item.batch);
      int start = 0;
      while (start < plan.plan.size() &&
             plan.plan.operators[static_cast<std::size_t>(start)].id != item.target_op)
        ++start;
      for (int i = start; i < plan.plan.size() && !cur.empty(); ++i) {
        const OperatorSpec& op = plan.plan.operators[static_cast<std::size_t>(i)];
        OperatorResult res =
            run_operator(op, cur, spq.states[static_cast<std::size_t>(i)], cap, cost);
        cap -= res.consumed;
        if (!res.pending.empty()) {
          LinkItem back;
          back.kind = LinkItem::Kind::Drained;
          back.batch = std::move(res.pending);
          back.target_op = op.id;
          back.source = item.source;
          spq.queue.push_front(std::move(back));
          return;  // out of SP compute this epoch
        }
        cur = std::move(res.output);
      }
    }
  }

  void close_sp_windows(SpQuery& spq) {
    std::int64_t wm_min = std::numeric_limits<std::int64_t>::max();
    for (std::int64_t w : spq.src_wm) wm_min = std::min(wm_min, w);
    if (wm_min < 0) return;
    close_windows(spq.states[static_cast<std::size_t>(agg_op)], wm_min, plan.plan.window_s,
                  spq.out);
  }

  void final_flush() {
    const auto far = std::numeric_limits<std::int64_t>::max() / 2;
    for (int node = 0; node < cfg.n_sources; ++node)
      for (int query = 0; query < cfg.n_queries; ++query) {
        Instance& q = inst[static_cast<std::size_t>(node)][static_cast<std::size_t>(query)];
        if (!q.ingress.empty()) {
          Batch b(std::make_move_iterator(q.ingress.begin()),
                  std::make_move_iterator(q.ingress.end()));
          q.ingress.clear();
          enqueue_drained(q, std::move(b), plan.plan.operators[0].id);
        }
        for (std::size_t i = 0; i < q.pending.size(); ++i)
          if (!q.pending[i].empty())
            enqueue_drained(q, std::move(q.pending[i]), plan.plan.operators[i].id);
        if (agg_op >= 0) {
          Batch rows = take_state(plan.plan.operators[static_cast<std::size_t>(agg_op)],
                                  q.states[static_cast<std::size_t>(agg_op)],
                                  plan.plan.window_s);
          enqueue_result(q, std::move(rows));
        }
        q.link.push_back(LinkItem{LinkItem::Kind::Wm, {}, 0, far, 0});
        transmit(q, sp[static_cast<std::size_t>(query)], node,
                 std::numeric_limits<double>::infinity());
      }
    for (SpQuery& spq : sp) {
      sp_execute(spq, std::numeric_limits<double>::infinity());
      close_sp_windows(spq);
    }
  }

  void run() {
    const int m = plan.proxy_count;
    (void)m;
    result.rows.reserve(static_cast<std::size_t>(cfg.epochs) * cfg.n_sources * cfg.n_queries);
    for (std::int64_t e = 0; e < cfg.epochs; ++e) {
      maybe_resize_table(e);
      const double node_budget = cfg.cpu_budget.at(e);
      const std::size_t row_base = result.rows.size();
      for (int node = 0; node < cfg.n_sources; ++node) {
        std::vector<double> granted(static_cast<std::size_t>(cfg.n_queries), node_budget);
        if (cfg.n_queries > 1) {
          std::vector<double> demands(static_cast<std::size_t>(cfg.n_queries));
          for (int query = 0; query < cfg.n_queries; ++query) {
            const Instance& q =
                inst[static_cast<std::size_t>(node)][static_cast<std::size_t>(query)];
            demands[static_cast<std::size_t>(query)] =
                q.has_est ? q.demand : node_budget / cfg.n_queries;
          }
          granted = allocate_budget(node_budget, demands);
        }
        for (int query = 0; query < cfg.n_queries; ++query)
          result.rows.push_back(
              node_epoch(e, node, query, granted[static_cast<std::size_t>(query)]));
      }
      const double cap_bytes = bytes_per_epoch_link();
      const double sp_cap = cfg.sp_cores > 0.0
                                ? cfg.sp_cores * cfg.epoch_s / cfg.n_queries
                                : std::numeric_limits<double>::infinity();
      for (int node = 0; node < cfg.n_sources; ++node)
        for (int query = 0; query < cfg.n_queries; ++query) {
          Instance& q =
              inst[static_cast<std::size_t>(node)][static_cast<std::size_t>(query)];
          const std::int64_t sent =
              transmit(q, sp[static_cast<std::size_t>(query)], node, cap_bytes);
          result.rows[row_base + static_cast<std::size_t>(node) * cfg.n_queries +
                      static_cast<std::size_t>(query)]
              .transmitted_bytes = sent;
        }
      for (SpQuery& spq : sp) {
        sp_execute(spq, sp_cap);
        close_sp_windows(spq);
      }
    }
    final_flush();
    result.outputs.reserve(sp.size());
    for (SpQuery& spq : sp) result.outputs.push_back(std::move(spq.out));
    for (auto& row : inst)
      for (Instance& q : row)
        if (q.ctrl && q.ctrl->non_convergence_logged()) result.non_convergence = true;
  }
};

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  Sim sim(cfg);
  sim.run();
  return std::move(sim.result);
}

std::vector<std::vector<FinalRow>> reference_run(const ExperimentConfig& cfg) {
  validate(cfg);
  InstrumentedPlan plan = instrument(plan_for(cfg));
  CostModel cost = cost_for(cfg);
  std::shared_ptr<const StaticTable> table;
  if (cfg.query == "t2tprobe")
    table =
        make_tor_table(cfg.peer_count, static_cast<std::uint32_t>(cfg.table_size.at(0)));

  std::vector<std::vector<FinalRow>> outputs;
  for (int query = 0; query < cfg.n_queries; ++query) {
    auto states = make_states(plan.plan, table);
    for (std::int64_t e = 0; e < cfg.epochs; ++e) {
      if (cfg.query == "t2tprobe")
        for (const auto& [from, val] : cfg.table_size.steps)
          if (from == e) {
            table = make_tor_table(cfg.peer_count, static_cast<std::uint32_t>(val));
            for (auto& s : states)
              if (s.table) s.table = table;
          }
      for (int node = 0; node < cfg.n_sources; ++node) {
        Batch cur = generate(cfg, node, query, e);
        assign_windows(cur, plan.plan.window_s);
        for (std::size_t i = 0; i < plan.plan.operators.size() && !cur.empty(); ++i) {
          OperatorResult res =
              run_operator(plan.plan.operators[i], cur, states[i],
                           std::numeric_limits<double>::infinity(), cost);
          cur = std::move(res.output);
        }
      }
    }
    std::vector<FinalRow> out;
    for (std::size_t i = 0; i < plan.plan.operators.size(); ++i)
      if (plan.plan.operators[i].kind == OpKind::GroupAggregate)
        close_windows(states[i], std::numeric_limits<std::int64_t>::max() / 2,
                      plan.plan.window_s, out);
    outputs.push_back(std::move(out));
  }
  return outputs;
}

double measure_throughput(const RunResult& run, double latency_bound_s, int warmup_epochs) {
  double sum_mbits = 0.0;
  std::int64_t max_epoch = -1;
  for (const EpochMetrics& r : run.rows) {
    max_epoch = std::max(max_epoch, r.epoch);
    if (r.epoch < warmup_epochs) continue;
    if (r.latency_s <= latency_bound_s)
      sum_mbits += static_cast<double>(r.admitted_bytes) * 8.0 / 1e6;
  }
  const std::int64_t epochs = max_epoch - warmup_epochs + 1;
  if (run.rows.empty() || epochs <= 0)
    throw std::invalid_argument("measure_throughput: EmptySeries");
  return sum_mbits / static_cast<double>(epochs);
}

ConvergenceCount convergence_epochs(const RunResult& run, std::int64_t change_epoch, int node,
                                    int query, int debounce) {
  std::vector<QueryVerdict> verdicts;
  for (const EpochMetrics& r : run.rows)
    if (r.node == node && r.query == query) {
      if (static_cast<std::int64_t>(verdicts.size()) != r.epoch)
        verdicts.resize(static_cast<std::size_t>(r.epoch));
      verdicts.push_back(r.verdict);
    }
  ConvergenceCount cc;
  for (std::size_t t = static_cast<std::size_t>(change_epoch); t + 2 < verdicts.size(); ++t) {
    if (verdicts[t] == QueryVerdict::Stable && verdicts[t + 1] == QueryVerdict::Stable &&
        verdicts[t + 2] == QueryVerdict::Stable) {
      cc.converged = true;
      cc.raw = static_cast<int>(t - static_cast<std::size_t>(change_epoch));
      cc.detection_excluded = std::max(0, cc.raw - debounce);
      break;
    }
  }
  return cc;
}

double mean_outbound_mbps(const RunResult& run, int warmup_epochs) {
  double sum_mbits = 0.0;
  std::int64_t max_epoch = -1;
  for (const EpochMetrics& r : run.rows) {
    max_epoch = std::max(max_epoch, r.epoch);
    if (r.epoch >= warmup_epochs)
      sum_mbits += static_cast<double>(r.transmitted_bytes) * 8.0 / 1e6;
  }
  const std::int64_t epochs = max_epoch - warmup_epochs + 1;
  if (epochs <= 0) throw std::invalid_argument("mean_outbound_mbps: EmptySeries");
  return sum_mbits / static_cast<double>(epochs);
}

std::vector<double> converged_lf(const RunResult& run) {
  std::vector<double> lf;
  for (const EpochMetrics& r : run.rows)
    if (r.node == 0 && r.query == 0) lf = r.lf;
  return lf;
}

void write_csv(const RunResult& run, std::ostream& os) {
  os << "# jarvis-sim metrics v1\n";
  os << "epoch,node,query,input_bytes,admitted_bytes,drained_bytes,result_bytes,"
        "transmitted_bytes,compute_used,budget,latency_s,phase,verdict,lf\n";
  for (const EpochMetrics& r : run.rows) {
    os << r.epoch << ',' << r.node << ',' << r.query << ',' << r.input_bytes << ','
       << r.admitted_bytes << ',' << r.drained_bytes << ',' << r.result_bytes << ','
       << r.transmitted_bytes << ',' << r.compute_used << ',' << r.budget << ','
       << r.latency_s << ',' << to_string(r.phase) << ',' << to_string(r.verdict) << ',';
    for (std::size_t i = 0; i < r.lf.size(); ++i) {
      if (i) os << ';';
      os << r.lf[i];
    }
    os << '\n';
  }
}

std::string summarize(const ExperimentConfig& cfg, const RunResult& run) {
  std::vector<double> lat;
  for (const EpochMetrics& r : run.rows)
    if (r.epoch >= cfg.warmup_epochs) lat.push_back(r.latency_s);
  double median = 0.0, worst = 0.0;
  if (!lat.empty()) {
    std::sort(lat.begin(), lat.end());
    median = lat[lat.size() / 2];
    worst = lat.back();
  }
  std::ostringstream os;
  os << "query: " << cfg.query << "\n"
     << "policy: " << to_string(cfg.policy) << "\n"
     << "throughput_mbps: "
     << measure_throughput(run, cfg.latency_bound_s, cfg.warmup_epochs) << "\n"
     << "outbound_mbps: " << mean_outbound_mbps(run, cfg.warmup_epochs) << "\n"
     << "median_latency_s: " << median << "\n"
     << "max_latency_s: " << worst << "\n"
     << "non_convergence: " << (run.non_convergence ? "true" : "false") << "\n";
  const std::vector<double> lf = converged_lf(run);
  os << "final_lf:";
  for (double v : lf) os << ' ' << v;
  os << "\n";
  return os.str();
}

}  // namespace jarvis
