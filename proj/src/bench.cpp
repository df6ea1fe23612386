#include "lhtn/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <thread>

#include "lhtn/hddl.hpp"

namespace lhtn {

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Solved: return "solved";
    case RunStatus::Unsolved: return "unsolved";
    case RunStatus::Timeout: return "timeout";
  }
  return "?";
}

std::map<std::string, double> ipc_score(const std::map<std::string, std::vector<std::optional<double>>>& costs) {
  if (costs.empty()) throw EmptyProblemSet();
  const std::size_t n = costs.begin()->second.size();
  if (n == 0) throw EmptyProblemSet();
  for (const auto& [system, c] : costs) {
    if (c.size() != n) throw std::invalid_argument("system " + system + " covers a different problem count");
    for (const auto& v : c) {
      if (v && !(*v > 0)) throw std::invalid_argument("costs must be positive");
    }
  }
  std::map<std::string, double> score;
  for (const auto& [system, c] : costs) score[system] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::optional<double> best;
    for (const auto& [system, c] : costs) {
      if (c[i] && (!best || *c[i] < *best)) best = c[i];
    }
    if (!best) continue;
    for (const auto& [system, c] : costs) {
      if (c[i]) score[system] += *best / *c[i];
    }
  }
  for (auto& [system, s] : score) s /= static_cast<double>(n);
  return score;
}

ScoreTable score_records(const std::vector<MetricsRecord>& records) {
  // Timers can read 0 on trivial problems; costs must stay positive.
  constexpr double kMinTime = 1e-6;
  ScoreTable table;
  for (const auto& metric : kMetrics) {
    std::map<std::string, std::vector<std::optional<double>>> costs;
    for (const auto& r : records) {
      std::optional<double> c;
      if (r.status == RunStatus::Solved) {
        if (metric == "solving_time") c = std::max(r.solving_time, kMinTime);
        if (metric == "search_time") c = std::max(r.search_time, kMinTime);
        if (metric == "makespan") c = static_cast<double>(std::max<std::size_t>(*r.makespan, 1));
        if (metric == "propositions") c = static_cast<double>(std::max<std::size_t>(r.propositions, 1));
        if (metric == "operators") c = static_cast<double>(std::max<std::size_t>(r.operators, 1));
      }
      costs[r.system].push_back(c);
    }
    table[metric] = ipc_score(costs);
  }
  return table;
}

std::string ManifestEntry::id() const {
  return std::filesystem::path(problem).stem().string();
}

std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::string& base_dir) {
  std::vector<ManifestEntry> out;
  std::string line;
  int lineno = 0;
  auto resolve = [&](const std::string& path) {
    std::filesystem::path p(path);
    return p.is_absolute() ? p.string() : (std::filesystem::path(base_dir) / p).string();
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = line.substr(0, std::min(line.find('#'), line.find(';')));
    std::istringstream ss(line);
    std::vector<std::string> fields;
    for (std::string f; ss >> f;) fields.push_back(f);
    if (fields.empty()) continue;
    if (fields.size() < 2 || fields.size() > 3) {
      throw std::runtime_error("manifest line " + std::to_string(lineno) + ": expected domain problem [bound]");
    }
    ManifestEntry e{resolve(fields[0]), resolve(fields[1]), std::nullopt};
    if (fields.size() == 3) e.bound = static_cast<std::uint32_t>(std::stoul(fields[2]));
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

}  // namespace

MetricsRecord run_cpfd(const ManifestEntry& e, const SearchConfig& cfg) {
  MetricsRecord r;
  r.system = "cpfd";
  r.problem = e.id();
  auto start = Clock::now();
  try {
    GroundHtnProblem p = load_problem_files(e.domain, e.problem);
    r.propositions = p.propositions.size();
    r.operators = p.actions.size();
    SearchResult s = cpfd_solve(p, cfg);
    r.search_time = s.stats.seconds;
    if (s.status == SearchStatus::Solved) {
      r.status = RunStatus::Solved;
      r.makespan = s.plan->makespan();
    } else if (s.status == SearchStatus::ResourceExhausted) {
      r.status = RunStatus::Timeout;
    }
  } catch (const std::exception&) {
    r.status = RunStatus::Unsolved;
  }
  r.solving_time = std::max(since(start), r.search_time);
  return r;
}

MetricsRecord run_cthd(const ManifestEntry& e, const BenchConfig& cfg) {
  MetricsRecord r;
  r.system = "cthd";
  r.problem = e.id();
  auto start = Clock::now();
  try {
    GroundHtnProblem p = load_problem_files(e.domain, e.problem);
    RoundTripConfig rc = cfg.round_trip;
    if (e.bound) {
      rc.encoding.bound = *e.bound;
      rc.deepen.reset();
    } else if (!rc.deepen) {
      rc.deepen = {1, cfg.max_bound};
    }
    RoundTripResult t = round_trip(p, rc);
    r.search_time = t.search_seconds;
    r.propositions = t.stats.propositions;
    r.operators = t.stats.operators;
    if (t.status == SolveStatus::Solved && t.verdict && t.verdict->valid()) {
      r.status = RunStatus::Solved;
      r.makespan = t.plan->makespan();
    } else if (t.status == SolveStatus::ResourceExhausted) {
      r.status = RunStatus::Timeout;
    }
  } catch (const std::exception&) {
    r.status = RunStatus::Unsolved;
  }
  r.solving_time = std::max(since(start), r.search_time);
  return r;
}

std::vector<MetricsRecord> run_bench(const std::vector<ManifestEntry>& entries, const BenchConfig& cfg) {
  std::vector<MetricsRecord> out(cfg.systems.size() * entries.size());
  for (const auto& s : cfg.systems) {
    if (s != "cpfd" && s != "cthd") throw std::invalid_argument("unknown system " + s);
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < out.size();) {
      const std::string& system = cfg.systems[i / entries.size()];
      const ManifestEntry& e = entries[i % entries.size()];
      out[i] = system == "cpfd" ? run_cpfd(e, cfg.search) : run_cthd(e, cfg);
    }
  };
  unsigned jobs = std::max(1u, cfg.jobs);
  std::vector<std::jthread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  return out;
}

void write_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  out << "system,problem,status,solving_time,search_time,makespan,propositions,operators\n";
  for (const auto& r : records) {
    out << r.system << ',' << r.problem << ',' << to_string(r.status) << ',' << std::setprecision(6)
        << r.solving_time << ',' << r.search_time << ',';
    if (r.makespan) out << *r.makespan;
    out << ',' << r.propositions << ',' << r.operators << '\n';
  }
}

void write_scores(std::ostream& out, const ScoreTable& table) {
  out << "metric";
  std::vector<std::string> systems;
  if (!table.empty()) {
    for (const auto& [s, v] : table.begin()->second) systems.push_back(s);
  }
  for (const auto& s : systems) out << ',' << s;
  out << '\n';
  for (const auto& metric : kMetrics) {
    auto it = table.find(metric);
    if (it == table.end()) continue;
    out << metric;
    for (const auto& s : systems) out << ',' << std::fixed << std::setprecision(4) << it->second.at(s);
    out << std::defaultfloat << '\n';
  }
}

}  // namespace lhtn
