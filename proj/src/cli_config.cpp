#include "jarvis/cli_config.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

namespace jarvis {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& path, int line, const std::string& msg) {
  throw ConfigError(path + ":" + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, const std::string& path, int line) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end) fail(path, line, "expected a number, got '" + v + "'");
  return out;
}

std::int64_t parse_int(const std::string& v, const std::string& path, int line) {
  std::int64_t out = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end) fail(path, line, "expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& v, const std::string& path, int line) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end)
    fail(path, line, "expected a non-negative integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v, const std::string& path, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(path, line, "expected true or false, got '" + v + "'");
}

// "epoch:value,epoch:value"
std::vector<std::pair<std::int64_t, double>> parse_steps(const std::string& v,
                                                         const std::string& path, int line) {
  std::vector<std::pair<std::int64_t, double>> steps;
  if (trim(v).empty()) return steps;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      fail(path, line, "expected epoch:value step, got '" + item + "'");
    steps.emplace_back(parse_int(trim(item.substr(0, colon)), path, line),
                       parse_double(trim(item.substr(colon + 1)), path, line));
  }
  return steps;
}

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

std::string fmt_steps(const std::vector<std::pair<std::int64_t, double>>& steps) {
  std::string out;
  for (const auto& [e, v] : steps) {
    if (!out.empty()) out += ",";
    out += std::to_string(e) + ":" + fmt(v);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& path) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(path, line, "unterminated section header");
      section = s.substr(1, s.size() - 2);
      if (section != "experiment" && section != "topology" && section != "workload" &&
          section != "adaptation" && section != "costs")
        fail(path, line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(path, line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (section.empty()) fail(path, line, "key '" + key + "' outside any section");

    if (section == "experiment") {
      if (key == "query") cfg.query = val;
      else if (key == "policy") {
        try {
          cfg.policy = policy_from_string(val);
        } catch (const std::exception&) {
          fail(path, line, "unknown policy '" + val + "'");
        }
      } else if (key == "epochs") cfg.epochs = static_cast<int>(parse_int(val, path, line));
      else if (key == "warmup_epochs")
        cfg.warmup_epochs = static_cast<int>(parse_int(val, path, line));
      else if (key == "epoch_duration_s") cfg.epoch_s = parse_double(val, path, line);
      else if (key == "seed") cfg.seed = parse_uint(val, path, line);
      else fail(path, line, "unknown key '" + key + "' in [experiment]");
    } else if (section == "topology") {
      if (key == "n_sources") cfg.n_sources = static_cast<int>(parse_int(val, path, line));
      else if (key == "n_queries") cfg.n_queries = static_cast<int>(parse_int(val, path, line));
      else if (key == "link_per_query_mbps") cfg.link_mbps = parse_double(val, path, line);
      else if (key == "sp_ingest_mbps") cfg.sp_ingest_mbps = parse_double(val, path, line);
      else if (key == "sp_cores") cfg.sp_cores = parse_double(val, path, line);
      else fail(path, line, "unknown key '" + key + "' in [topology]");
    } else if (section == "workload") {
      if (key == "rate_mbps") cfg.rate_mbps.base = parse_double(val, path, line);
      else if (key == "rate_mbps_steps") cfg.rate_mbps.steps = parse_steps(val, path, line);
      else if (key == "peer_count")
        cfg.peer_count = static_cast<std::uint32_t>(parse_uint(val, path, line));
      else if (key == "error_rate") cfg.error_rate = parse_double(val, path, line);
      else if (key == "table_size") cfg.table_size.base = parse_double(val, path, line);
      else if (key == "table_size_steps") cfg.table_size.steps = parse_steps(val, path, line);
      else if (key == "tenant_count")
        cfg.tenant_count = static_cast<int>(parse_int(val, path, line));
      else if (key == "pattern_hit_rate") cfg.pattern_hit_rate = parse_double(val, path, line);
      else if (key == "spike_every_s") cfg.spike_every_s = parse_int(val, path, line);
      else if (key == "spike_duration_s") cfg.spike_duration_s = parse_int(val, path, line);
      else fail(path, line, "unknown key '" + key + "' in [workload]");
    } else if (section == "adaptation") {
      if (key == "cpu_budget_cores") cfg.cpu_budget.base = parse_double(val, path, line);
      else if (key == "cpu_budget_steps") cfg.cpu_budget.steps = parse_steps(val, path, line);
      else if (key == "drained_thres") cfg.drained_thres = parse_double(val, path, line);
      else if (key == "idle_thres") cfg.idle_thres = parse_double(val, path, line);
      else if (key == "lbdp_sp_share") cfg.lbdp_sp_share = parse_double(val, path, line);
      else if (key == "debounce_epochs")
        cfg.debounce_epochs = static_cast<int>(parse_int(val, path, line));
      else if (key == "max_adapt_epochs")
        cfg.max_adapt_epochs = static_cast<int>(parse_int(val, path, line));
      else if (key == "lf_grid") cfg.lf_grid = parse_double(val, path, line);
      else if (key == "latency_bound_s") cfg.latency_bound_s = parse_double(val, path, line);
      else if (key == "lp_init") cfg.lp_init = parse_bool(val, path, line);
      else if (key == "fine_tune") cfg.fine_tune = parse_bool(val, path, line);
      else fail(path, line, "unknown key '" + key + "' in [adaptation]");
    } else {  // costs
      // op<N>_per_record_s = seconds
      if (key.rfind("op", 0) == 0 && key.size() > 15 &&
          key.substr(key.size() - 13) == "_per_record_s") {
        const std::string ids = key.substr(2, key.size() - 15);
        cfg.cost_per_op[static_cast<int>(parse_int(ids, path, line))] =
            parse_double(val, path, line);
      } else {
        fail(path, line, "unknown key '" + key + "' in [costs] (want opN_per_record_s)");
      }
    }
  }
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "[experiment]\n"
     << "query = " << cfg.query << "\n"
     << "policy = " << to_string(cfg.policy) << "\n"
     << "epochs = " << cfg.epochs << "\n"
     << "warmup_epochs = " << cfg.warmup_epochs << "\n"
     << "epoch_duration_s = " << fmt(cfg.epoch_s) << "\n"
     << "seed = " << cfg.seed << "\n\n"
     << "[topology]\n"
     << "n_sources = " << cfg.n_sources << "\n"
     << "n_queries = " << cfg.n_queries << "\n"
     << "link_per_query_mbps = " << fmt(cfg.link_mbps) << "\n"
     << "sp_ingest_mbps = " << fmt(cfg.sp_ingest_mbps) << "\n"
     << "sp_cores = " << fmt(cfg.sp_cores) << "\n\n"
     << "[workload]\n"
     << "rate_mbps = " << fmt(cfg.rate_mbps.base) << "\n";
  if (!cfg.rate_mbps.steps.empty())
    os << "rate_mbps_steps = " << fmt_steps(cfg.rate_mbps.steps) << "\n";
  os << "peer_count = " << cfg.peer_count << "\n"
     << "error_rate = " << fmt(cfg.error_rate) << "\n"
     << "table_size = " << fmt(cfg.table_size.base) << "\n";
  if (!cfg.table_size.steps.empty())
    os << "table_size_steps = " << fmt_steps(cfg.table_size.steps) << "\n";
  os << "tenant_count = " << cfg.tenant_count << "\n"
     << "pattern_hit_rate = " << fmt(cfg.pattern_hit_rate) << "\n"
     << "spike_every_s = " << cfg.spike_every_s << "\n"
     << "spike_duration_s = " << cfg.spike_duration_s << "\n\n"
     << "[adaptation]\n"
     << "cpu_budget_cores = " << fmt(cfg.cpu_budget.base) << "\n";
  if (!cfg.cpu_budget.steps.empty())
    os << "cpu_budget_steps = " << fmt_steps(cfg.cpu_budget.steps) << "\n";
  os << "drained_thres = " << fmt(cfg.drained_thres) << "\n"
     << "idle_thres = " << fmt(cfg.idle_thres) << "\n"
     << "lbdp_sp_share = " << fmt(cfg.lbdp_sp_share) << "\n"
     << "debounce_epochs = " << cfg.debounce_epochs << "\n"
     << "max_adapt_epochs = " << cfg.max_adapt_epochs << "\n"
     << "lf_grid = " << fmt(cfg.lf_grid) << "\n"
     << "latency_bound_s = " << fmt(cfg.latency_bound_s) << "\n"
     << "lp_init = " << (cfg.lp_init ? "true" : "false") << "\n"
     << "fine_tune = " << (cfg.fine_tune ? "true" : "false") << "\n";
  if (!cfg.cost_per_op.empty()) {
    os << "\n[costs]\n";
    for (const auto& [id, v] : cfg.cost_per_op)
      os << "op" << id << "_per_record_s = " << fmt(v) << "\n";
  }
  return os.str();
}

PartitionProblem parse_instance(const std::string& text, const std::string& path) {
  PartitionProblem prob;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool have_m = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    std::istringstream ls(s);
    std::string key;
    ls >> key;
    if (key == "m") {
      long v = 0;
      if (!(ls >> v) || v < 1) fail(path, line, "m must be a positive integer");
      prob.m = static_cast<int>(v);
      have_m = true;
    } else if (key == "n_records") {
      if (!(ls >> prob.n_records)) fail(path, line, "expected a number after n_records");
    } else if (key == "budget") {
      if (!(ls >> prob.budget)) fail(path, line, "expected a number after budget");
    } else if (key == "c" || key == "r") {
      if (!have_m) fail(path, line, "m must precede c and r");
      std::vector<double> vals;
      double v = 0.0;
      while (ls >> v) vals.push_back(v);
      if (static_cast<int>(vals.size()) != prob.m)
        fail(path, line, key + " needs exactly m values");
      (key == "c" ? prob.c : prob.r) = std::move(vals);
    } else {
      fail(path, line, "unknown key '" + key + "'");
    }
  }
  if (!have_m || prob.c.empty() || prob.r.empty())
    throw ConfigError(path + ": instance needs m, c, and r");
  return prob;
}

PartitionProblem load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open instance file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str(), path);
}

}  // namespace jarvis
