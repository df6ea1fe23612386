// lhtn: layered HTN planning from the command line.
//
//   lhtn solve DOMAIN PROBLEM [--mode literal|voluntary] [--objective first|min-makespan]
//   lhtn encode DOMAIN PROBLEM --bound N [--compile] [--out-dir DIR] [--stats]
//   lhtn roundtrip DOMAIN PROBLEM (--bound N | --deepen MIN:MAX) [--plan-in FILE]
//   lhtn validate DOMAIN PROBLEM PLAN
//   lhtn bench MANIFEST [--jobs N] [--systems cpfd,cthd] [--csv FILE] [--scores FILE]
//
// Exit codes: 0 solved/valid, 1 unsolved/invalid, 2 usage or input error,
// 3 resource limit.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "lhtn/bench.hpp"
#include "lhtn/cpfd.hpp"
#include "lhtn/encoder.hpp"
#include "lhtn/hddl.hpp"
#include "lhtn/pddl.hpp"
#include "lhtn/pipeline.hpp"
#include "lhtn/plan_io.hpp"
#include "lhtn/sexpr.hpp"

namespace {

using namespace lhtn;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

enum Exit { kOk = 0, kFail = 1, kUsage = 2, kLimit = 3 };

struct Common {
  std::string domain, problem;
  std::string format = "text";
  double time_limit = 60.0;
};

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::optional<std::pair<std::uint32_t, std::uint32_t>> parse_range(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto colon = s.find(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--deepen", "expected MIN:MAX");
  auto lo = static_cast<std::uint32_t>(std::stoul(s.substr(0, colon)));
  auto hi = static_cast<std::uint32_t>(std::stoul(s.substr(colon + 1)));
  if (lo == 0 || lo > hi) throw CLI::ValidationError("--deepen", "need 1 <= MIN <= MAX");
  return std::make_pair(lo, hi);
}

json stats_json(const EncodingStats& s, std::uint32_t bound) {
  return {{"bound", bound},          {"propositions", s.propositions}, {"operators", s.operators},
          {"compound", s.compound},  {"primitive", s.primitive},       {"switches", s.switches}};
}

json metrics_json(const MetricsRecord& r) {
  json j = {{"problem", r.problem},           {"status", to_string(r.status)},
            {"solving_time", r.solving_time}, {"search_time", r.search_time},
            {"propositions", r.propositions}, {"operators", r.operators}};
  j["makespan"] = r.makespan ? json(*r.makespan) : json(nullptr);
  return j;
}

int cmd_solve(const Common& c, const std::string& mode, const std::string& objective, std::size_t node_limit,
              bool memo) {
  auto start = Clock::now();
  GroundHtnProblem p = load_problem_files(c.domain, c.problem);
  SearchConfig cfg;
  cfg.mode = mode == "voluntary" ? SwitchMode::Voluntary : SwitchMode::Literal;
  cfg.objective = objective == "min-makespan" ? Objective::MinMakespan : Objective::FirstSolution;
  cfg.time_limit = c.time_limit;
  cfg.node_limit = node_limit;
  cfg.memoize = memo;
  SearchResult s = cpfd_solve(p, cfg);

  MetricsRecord r;
  r.system = "cpfd";
  r.problem = std::filesystem::path(c.problem).stem().string();
  r.search_time = s.stats.seconds;
  r.solving_time = std::max(since(start), r.search_time);
  r.propositions = p.propositions.size();
  r.operators = p.actions.size();
  r.status = s.status == SearchStatus::Solved             ? RunStatus::Solved
             : s.status == SearchStatus::ResourceExhausted ? RunStatus::Timeout
                                                           : RunStatus::Unsolved;
  if (s.plan) r.makespan = s.plan->makespan();

  if (c.format == "json") {
    json j = {{"status", to_string(s.status)}, {"metrics", metrics_json(r)}, {"expansions", s.stats.expansions}};
    if (s.plan) j["plan"] = plan_to_json(*s.plan, p);
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << ";; status " << to_string(s.status) << '\n';
    if (s.plan) write_plan_text(std::cout, *s.plan, p);
    std::cout << ";; expansions " << s.stats.expansions << '\n';
    std::cout << ";; solving_time " << r.solving_time << " search_time " << r.search_time << '\n';
  }
  if (s.status == SearchStatus::Solved) return kOk;
  return s.status == SearchStatus::ResourceExhausted ? kLimit : kFail;
}

int cmd_encode(const Common& c, std::uint32_t bound, bool compile, std::uint32_t threshold,
               const std::string& out_dir, bool stats) {
  GroundHtnProblem p = load_problem_files(c.domain, c.problem);
  EncodingConfig cfg;
  cfg.bound = bound;
  cfg.effects = compile ? EffectsMode::CompiledAway : EffectsMode::Conditional;
  cfg.compile_threshold = threshold;
  CthdEncoding enc = encode(p, cfg);
  PddlText text = write_pddl(enc);
  json s = stats_json(enc.stats, bound);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream(std::filesystem::path(out_dir) / "domain.pddl") << text.domain;
    std::ofstream(std::filesystem::path(out_dir) / "problem.pddl") << text.problem;
    std::ofstream(std::filesystem::path(out_dir) / "stats.json") << s.dump(2) << '\n';
  }
  if (stats) {
    std::cout << s.dump(2) << '\n';
  } else if (out_dir.empty()) {
    std::cout << text.domain << '\n' << text.problem;
  }
  return kOk;
}

int cmd_roundtrip(const Common& c, std::uint32_t bound, const std::string& deepen, bool compile,
                  const std::string& search, const std::string& plan_in, std::size_t expansions) {
  GroundHtnProblem p = load_problem_files(c.domain, c.problem);
  RoundTripConfig cfg;
  cfg.encoding.bound = bound;
  cfg.encoding.effects = compile ? EffectsMode::CompiledAway : EffectsMode::Conditional;
  cfg.deepen = parse_range(deepen);
  cfg.search = search == "greedy" ? ClassicalSearch::Greedy : ClassicalSearch::Bfs;
  cfg.limits.time_limit = c.time_limit;
  cfg.limits.max_expansions = expansions;

  RoundTripResult r;
  if (!plan_in.empty()) {
    CthdEncoding enc = encode(p, cfg.encoding);
    std::ifstream in(plan_in);
    if (!in) throw std::runtime_error("cannot open " + plan_in);
    ClassicalPlan cp = read_plan(in, enc.problem);
    r.bound = bound;
    r.stats = enc.stats;
    r.classical_length = cp.actions.size();
    if (!is_valid_plan(enc.problem, cp)) {
      std::cout << ";; external plan does not solve the encoded problem\n";
      return kFail;
    }
    r.status = SolveStatus::Solved;
    r.plan = decode(cp, enc);
    r.verdict = validate(p, *r.plan);
  } else {
    r = round_trip(p, cfg);
  }

  if (c.format == "json") {
    json j = {{"status", to_string(r.status)},  {"bound", r.bound},
              {"stats", stats_json(r.stats, r.bound)}, {"classical_length", r.classical_length}};
    if (r.plan) j["plan"] = plan_to_json(*r.plan, p);
    if (r.verdict) j["verdict"] = {{"code", to_string(r.verdict->code)}, {"reason", r.verdict->reason}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << ";; status " << to_string(r.status) << " bound " << r.bound << '\n';
    if (r.plan) write_plan_text(std::cout, *r.plan, p);
    if (r.verdict) std::cout << ";; verdict " << to_string(r.verdict->code) << ' ' << r.verdict->reason << '\n';
    std::cout << ";; propositions " << r.stats.propositions << " operators " << r.stats.operators << '\n';
  }
  if (r.status == SolveStatus::ResourceExhausted) return kLimit;
  return r.verdict && r.verdict->valid() ? kOk : kFail;
}

int cmd_validate(const Common& c, const std::string& plan_path) {
  GroundHtnProblem p = load_problem_files(c.domain, c.problem);
  LayeredPlan plan;
  std::ifstream in(plan_path);
  if (!in) throw std::runtime_error("cannot open " + plan_path);
  if (std::filesystem::path(plan_path).extension() == ".json") {
    json j = json::parse(in);
    plan = plan_from_json(j.contains("plan") ? j.at("plan") : j, p);
  } else {
    plan = read_plan_text(in, p);
  }
  Verdict v = validate(p, plan);
  if (c.format == "json") {
    std::cout << json{{"code", to_string(v.code)}, {"reason", v.reason}, {"step", v.step}}.dump(2) << '\n';
  } else {
    std::cout << to_string(v.code);
    if (!v.valid()) std::cout << " at step " << v.step << ": " << v.reason;
    std::cout << '\n';
  }
  return v.valid() ? kOk : kFail;
}

int cmd_bench(const std::string& manifest, const std::string& systems, unsigned jobs, double time_limit,
              const std::string& csv, const std::string& scores, const std::string& mode,
              const std::string& objective) {
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("cannot open " + manifest);
  auto entries = parse_manifest(in, std::filesystem::path(manifest).parent_path().string());
  BenchConfig cfg;
  cfg.systems.clear();
  std::stringstream ss(systems);
  for (std::string s; std::getline(ss, s, ',');) {
    if (!s.empty()) cfg.systems.push_back(s);
  }
  cfg.jobs = jobs;
  cfg.search.time_limit = time_limit;
  cfg.search.mode = mode == "voluntary" ? SwitchMode::Voluntary : SwitchMode::Literal;
  cfg.search.objective = objective == "min-makespan" ? Objective::MinMakespan : Objective::FirstSolution;
  cfg.round_trip.search = ClassicalSearch::Greedy;
  cfg.round_trip.limits.time_limit = time_limit;
  auto records = run_bench(entries, cfg);
  ScoreTable table = score_records(records);

  auto emit = [](const std::string& path, auto&& writer) {
    if (path.empty()) {
      writer(std::cout);
    } else {
      std::ofstream out(path);
      writer(out);
    }
  };
  emit(csv, [&](std::ostream& o) { write_csv(o, records); });
  if (csv.empty() && scores.empty()) std::cout << '\n';
  emit(scores, [&](std::ostream& o) { write_scores(o, table); });
  bool all = std::all_of(records.begin(), records.end(), [](const auto& r) { return r.status == RunStatus::Solved; });
  return all ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered HTN planning: concurrent forward decomposition and taskholder encoding"};
  app.require_subcommand(1);

  Common c;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("domain", c.domain, "HDDL domain file")->required()->check(CLI::ExistingFile);
    sub->add_option("problem", c.problem, "HDDL problem file")->required()->check(CLI::ExistingFile);
    sub->add_option("--format", c.format, "output format")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--time-limit", c.time_limit, "seconds");
  };

  std::string mode = "literal", objective = "first";
  std::size_t node_limit = 2'000'000;
  bool memo = false;
  auto* solve = app.add_subcommand("solve", "search a layered plan");
  add_common(solve);
  solve->add_option("--mode", mode)->check(CLI::IsMember({"literal", "voluntary"}));
  solve->add_option("--objective", objective)->check(CLI::IsMember({"first", "min-makespan"}));
  solve->add_option("--node-limit", node_limit);
  solve->add_flag("--memo", memo, "skip revisited search nodes");

  std::uint32_t bound = 4, threshold = 10;
  bool compile = false, stats = false;
  std::string out_dir;
  auto* enc = app.add_subcommand("encode", "write the classical encoding as PDDL");
  add_common(enc);
  enc->add_option("--bound", bound, "taskholder count")->check(CLI::PositiveNumber);
  enc->add_flag("--compile", compile, "compile conditional effects away");
  enc->add_option("--compile-threshold", threshold);
  enc->add_option("--out-dir", out_dir);
  enc->add_flag("--stats", stats, "print proposition and operator counts as JSON");

  std::string deepen, search = "bfs", plan_in;
  std::size_t expansions = 5'000'000;
  auto* rt = app.add_subcommand("roundtrip", "encode, solve classically, decode and validate");
  add_common(rt);
  rt->add_option("--bound", bound)->check(CLI::PositiveNumber);
  rt->add_option("--deepen", deepen, "MIN:MAX bound range");
  rt->add_flag("--compile", compile);
  rt->add_option("--search", search)->check(CLI::IsMember({"bfs", "greedy"}));
  rt->add_option("--plan-in", plan_in, "classical plan from an external planner")->check(CLI::ExistingFile);
  rt->add_option("--node-limit", expansions, "expansion budget");

  std::string plan_path;
  auto* val = app.add_subcommand("validate", "check a layered plan with its trace");
  add_common(val);
  val->add_option("plan", plan_path)->required()->check(CLI::ExistingFile);

  std::string manifest, systems = "cpfd,cthd", csv, scores;
  unsigned jobs = 1;
  double bench_limit = 60.0;
  auto* bench = app.add_subcommand("bench", "run a manifest and score the systems");
  bench->add_option("manifest", manifest)->required()->check(CLI::ExistingFile);
  bench->add_option("--systems", systems);
  bench->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  bench->add_option("--time-limit", bench_limit);
  bench->add_option("--csv", csv);
  bench->add_option("--scores", scores);
  bench->add_option("--mode", mode)->check(CLI::IsMember({"literal", "voluntary"}));
  bench->add_option("--objective", objective)->check(CLI::IsMember({"first", "min-makespan"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve) return cmd_solve(c, mode, objective, node_limit, memo);
    if (*enc) return cmd_encode(c, bound, compile, threshold, out_dir, stats);
    if (*rt) return cmd_roundtrip(c, bound, deepen, compile, search, plan_in, expansions);
    if (*val) return cmd_validate(c, plan_path);
    if (*bench) return cmd_bench(manifest, systems, jobs, bench_limit, csv, scores, mode, objective);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
