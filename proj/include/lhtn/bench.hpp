#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lhtn/cpfd.hpp"
#include "lhtn/pipeline.hpp"

namespace lhtn {

class EmptyProblemSet : public std::invalid_argument {
 public:
  EmptyProblemSet() : std::invalid_argument("IPC score over an empty problem set") {}
};

enum class RunStatus { Solved, Unsolved, Timeout };

const char* to_string(RunStatus s);

struct MetricsRecord {
  std::string system;
  std::string problem;
  RunStatus status = RunStatus::Unsolved;
  double solving_time = 0.0;  // parse + ground + encode + search
  double search_time = 0.0;
  std::optional<std::size_t> makespan;
  std::size_t propositions = 0;
  std::size_t operators = 0;
};

/// costs[system][i] is the cost on problem i, nullopt when unsolved. Every
/// system must list the same number of problems; present costs must be
/// positive. Score per system: mean over problems of best/cost, 0 if unsolved.
std::map<std::string, double> ipc_score(const std::map<std::string, std::vector<std::optional<double>>>& costs);

inline const std::vector<std::string> kMetrics = {"solving_time", "search_time", "makespan", "propositions",
                                                  "operators"};

// metric -> system -> score
using ScoreTable = std::map<std::string, std::map<std::string, double>>;

/// Scores every metric over records grouped by system. Records of one system
/// must cover the same problems in the same order.
ScoreTable score_records(const std::vector<MetricsRecord>& records);

struct ManifestEntry {
  std::string domain;
  std::string problem;
  std::optional<std::uint32_t> bound;
  std::string id() const;
};

/// One problem per line: `domain.hddl problem.hddl [bound]`; `#` and `;`
/// start comments. Relative paths resolve against `base_dir`.
std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::string& base_dir);

struct BenchConfig {
  std::vector<std::string> systems = {"cpfd", "cthd"};
  SearchConfig search;
  RoundTripConfig round_trip;
  std::uint32_t max_bound = 12;  // deepening ceiling when the manifest gives no bound
  unsigned jobs = 1;
};

MetricsRecord run_cpfd(const ManifestEntry& e, const SearchConfig& cfg);
MetricsRecord run_cthd(const ManifestEntry& e, const BenchConfig& cfg);

/// Runs every system on every entry, up to `jobs` problems at a time.
/// Records come back ordered by system, then manifest order.
std::vector<MetricsRecord> run_bench(const std::vector<ManifestEntry>& entries, const BenchConfig& cfg);

void write_csv(std::ostream& out, const std::vector<MetricsRecord>& records);
void write_scores(std::ostream& out, const ScoreTable& table);

}  // namespace lhtn
