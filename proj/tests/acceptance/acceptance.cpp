// Acceptance checks. Prints one line per criterion and exits nonzero if any
// criterion fails or runs over its time limit.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lhtn/bench.hpp"
#include "lhtn/builder.hpp"
#include "lhtn/cpfd.hpp"
#include "lhtn/encoder.hpp"
#include "lhtn/hddl.hpp"
#include "lhtn/pddl.hpp"
#include "lhtn/pipeline.hpp"
#include "support/fixtures.hpp"
#include "support/generator.hpp"
#include "support/oracles.hpp"

using namespace lhtn;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failure messages of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) {
      if (!first_.empty()) first_ += "; ";
      first_ += what;
    }
  }
  Outcome done(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    return {false, summary + "; " + std::to_string(failures_) + " failure(s): " + first_};
  }

 private:
  int failures_ = 0;
  std::string first_;
};

std::vector<ActionLayer> layers(const GroundHtnProblem& p, std::vector<std::vector<std::string>> names) {
  std::vector<ActionLayer> out;
  for (auto& layer : names) {
    ActionLayer l;
    for (auto& n : layer) l.push_back(fixtures::action(p, n));
    std::sort(l.begin(), l.end());
    out.push_back(l);
  }
  return out;
}

std::string show(const std::vector<ActionLayer>& plan, const GroundHtnProblem& p) {
  std::string s;
  for (const auto& l : plan) s += layer_to_string(l, p);
  return s.empty() ? "<empty>" : s;
}

// Instance family shared by the property criteria.
GroundHtnProblem instance(std::uint32_t seed, bool totally_ordered = false) {
  std::mt19937 rng(seed);
  gen::Params params;
  params.totally_ordered = totally_ordered;
  return gen::random_problem(rng, params);
}

SolverLimits solver_limits() {
  SolverLimits l;
  l.max_expansions = 2'000'000;
  l.time_limit = 60;
  return l;
}

// --- criteria -------------------------------------------------------------------

Outcome variant_one() {
  Check c;
  auto p = fixtures::sequential_example();
  auto expect = layers(p, {{"(t1)"}, {"(t2)"}, {"(t3)"}});
  for (auto mode : {SwitchMode::Literal, SwitchMode::Voluntary}) {
    for (auto obj : {Objective::FirstSolution, Objective::MinMakespan}) {
      SearchConfig cfg;
      cfg.mode = mode;
      cfg.objective = obj;
      auto r = cpfd_solve(p, cfg);
      c.expect(r.status == SearchStatus::Solved && r.plan->layers == expect,
               "cpfd returned " + (r.plan ? show(r.plan->layers, p) : std::string(to_string(r.status))));
    }
  }
  OracleLimits lim;
  lim.max_layers = 3;
  auto o = oracle_enumerate(p, lim);
  c.expect(o.complete && o.plans == std::set<std::vector<ActionLayer>>{expect},
           "oracle found " + std::to_string(o.plans.size()) + " plan(s)");
  return c.done("plan " + show(expect, p) + ", oracle plans up to makespan 3: " + std::to_string(o.plans.size()));
}

Outcome variant_two() {
  Check c;
  auto p = fixtures::concurrent_example();
  auto expect = layers(p, {{"(t1)", "(t3)"}, {"(t2)"}});
  SearchConfig cfg;
  cfg.mode = SwitchMode::Voluntary;
  cfg.objective = Objective::MinMakespan;
  auto r = cpfd_solve(p, cfg);
  c.expect(r.status == SearchStatus::Solved && r.plan->layers == expect,
           "cpfd returned " + (r.plan ? show(r.plan->layers, p) : std::string("nothing")));
  RoundTripConfig rc;
  rc.encoding.bound = 4;
  rc.search = ClassicalSearch::Bfs;
  auto rt = round_trip(p, rc);
  bool ok = rt.status == SolveStatus::Solved && rt.verdict && rt.verdict->valid() && rt.plan->makespan() == 2;
  c.expect(ok, "round trip " + std::string(to_string(rt.status)) +
                   (rt.verdict ? " verdict " + std::string(to_string(rt.verdict->code)) : ""));
  return c.done("cpfd " + (r.plan ? show(r.plan->layers, p) : "-") + ", round trip makespan " +
                (rt.plan ? std::to_string(rt.plan->makespan()) : "-"));
}

// Pascal's triangle, independent of the library's binomial.
std::uint64_t choose(std::uint32_t n, std::uint32_t k) {
  std::vector<std::vector<std::uint64_t>> t(n + 1, std::vector<std::uint64_t>(n + 1, 0));
  for (std::uint32_t i = 0; i <= n; ++i) {
    t[i][0] = 1;
    for (std::uint32_t j = 1; j <= i; ++j) t[i][j] = t[i - 1][j - 1] + (j <= i - 1 ? t[i - 1][j] : 0);
  }
  return k > n ? 0 : t[n][k];
}

// One compound root decomposed by a totally ordered method with k subtasks,
// so the method needs k - 1 new holders.
GroundHtnProblem chain_method(std::uint32_t k) {
  ProblemBuilder b;
  auto root = b.compound("root");
  auto t = b.primitive("t");
  b.action("a", t, {}, {}, {});
  std::vector<TaskId> subtasks(k, t);
  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (std::size_t i = 0; i + 1 < k; ++i) order.emplace_back(i, i + 1);
  b.method("m", root, subtasks, order);
  b.add_root(root);
  return normalize(b.build());
}

Outcome crescent_law() {
  Check c;
  auto p = fixtures::concurrent_example();
  auto enc = encode(p, EncodingConfig{4});
  std::size_t fixed_h1 = 0;
  for (const auto& o : enc.origin) fixed_h1 += o.kind == OriginKind::Compound && o.holders[0] == 0;
  c.expect(fixed_h1 == 1, "grounded a_m with h1 fixed = " + std::to_string(fixed_h1));
  c.expect(unordered_assignments(4, 0, 3).size() == 6, "unordered count != 6");

  std::mt19937 rng(1234);
  for (int i = 0; i < 50; ++i) {
    std::uint32_t b = std::uniform_int_distribution<std::uint32_t>(1, 8)(rng);
    std::uint32_t k = std::uniform_int_distribution<std::uint32_t>(1, 5)(rng);
    std::uint64_t formula = b * choose(b - 1, k - 1);
    std::uint64_t scanned = 0, listed = 0;
    for (Holder h1 = 0; h1 < b; ++h1) {
      scanned += oracle::count_crescent_by_scan(b, h1, k - 1);
      listed += crescent_assignments(b, h1, k - 1).size();
    }
    auto m = chain_method(k);
    auto e = encode(m, EncodingConfig{b});
    std::size_t grounded = 0;
    for (const auto& o : e.origin) grounded += o.kind == OriginKind::Compound && m.methods[o.source].name == "m";
    std::ostringstream what;
    what << "b=" << b << " k=" << k << ": formula " << formula << " scan " << scanned << " listed " << listed
         << " grounded " << grounded;
    c.expect(formula == scanned && scanned == listed && listed == grounded, what.str());
  }
  return c.done("b=4: 1 crescent vs 6 unordered; 50 random (b<=8, k<=5) configurations");
}

Outcome soundness() {
  Check c;
  int instances = 0, plans = 0, decoded = 0;
  for (std::uint32_t seed = 0; instances < 500; ++seed) {
    auto p = instance(seed);
    ++instances;
    for (auto mode : {SwitchMode::Literal, SwitchMode::Voluntary}) {
      SearchConfig cfg;
      cfg.mode = mode;
      cfg.node_limit = 500'000;
      auto r = cpfd_solve(p, cfg);
      if (r.status != SearchStatus::Solved) continue;
      ++plans;
      auto v = validate(p, *r.plan);
      c.expect(v.valid(), "seed " + std::to_string(seed) + ": " + v.reason);
    }
    auto size = max_network_size(p, 10);
    if (!size) continue;
    RoundTripConfig rc;
    rc.encoding.bound = static_cast<std::uint32_t>(*size);
    rc.search = *size <= 6 ? ClassicalSearch::Bfs : ClassicalSearch::Greedy;
    rc.limits = solver_limits();
    auto rt = round_trip(p, rc);
    if (rt.status != SolveStatus::Solved) continue;
    ++decoded;
    c.expect(rt.verdict && rt.verdict->valid(),
             "seed " + std::to_string(seed) + " round trip: " + (rt.verdict ? rt.verdict->reason : "no verdict"));
  }
  return c.done(std::to_string(instances) + " instances, " + std::to_string(plans) + " cpfd plans, " +
                std::to_string(decoded) + " decoded round-trip plans validated");
}

Outcome oracle_equivalence() {
  Check c;
  int used = 0, solvable = 0, literal_gap = 0;
  std::size_t plan_total = 0;
  for (std::uint32_t seed = 0; used < 500 && seed < 20000; ++seed) {
    auto p = instance(seed);
    auto size = max_network_size(p, 6);
    if (!size) continue;
    ++used;
    OracleLimits lim;
    lim.max_layers = 4;
    lim.max_nodes = 64;
    auto o = oracle_enumerate(p, lim);
    if (!o.complete) {
      c.expect(false, "seed " + std::to_string(seed) + ": oracle incomplete");
      continue;
    }
    bool oracle_solvable = !o.plans.empty();
    solvable += oracle_solvable;
    plan_total += o.plans.size();

    SearchConfig literal;
    literal.mode = SwitchMode::Literal;
    literal.objective = Objective::MinMakespan;
    literal.max_makespan = 4;
    auto lr = cpfd_solve(p, literal);
    bool literal_solvable = lr.status == SearchStatus::Solved;
    if (literal_solvable != oracle_solvable) ++literal_gap;
    c.expect(literal_solvable == oracle_solvable,
             "(a) seed " + std::to_string(seed) + ": literal " + (literal_solvable ? "solved" : "failed") +
                 ", oracle " + (oracle_solvable ? "solvable" : "unsolvable"));

    SearchConfig vol;
    vol.mode = SwitchMode::Voluntary;
    auto e = cpfd_enumerate(p, vol, 4);
    c.expect(e.complete && e.plans == o.plans, "(b) seed " + std::to_string(seed) + ": voluntary " +
                                                   std::to_string(e.plans.size()) + " plans, oracle " +
                                                   std::to_string(o.plans.size()));

    vol.objective = Objective::MinMakespan;
    vol.max_makespan = 4;
    auto mr = cpfd_solve(p, vol);
    std::optional<std::size_t> got;
    if (mr.status == SearchStatus::Solved) got = mr.plan->makespan();
    c.expect(got == o.min_makespan(), "(c) seed " + std::to_string(seed) + ": min makespan differs");
  }
  return c.done(std::to_string(used) + " instances (" + std::to_string(solvable) + " solvable, " +
                std::to_string(plan_total) + " oracle plans), literal-mode solvability mismatches: " +
                std::to_string(literal_gap));
}

Outcome encoding_completeness() {
  Check c;
  int used = 0, solvable = 0;
  std::mt19937 pick(77);
  for (std::uint32_t seed = 10'000; used < 400 && seed < 40'000; ++seed) {
    auto p = instance(seed);
    auto size = max_network_size(p, 6);
    if (!size) continue;
    ++used;
    // Bounds at and below the largest reachable network size.
    auto b = std::uniform_int_distribution<std::uint32_t>(1, static_cast<std::uint32_t>(*size))(pick);
    OracleLimits lim;
    lim.max_layers = 64;
    lim.max_nodes = b;
    lim.stop_at_first = true;
    auto o = oracle_enumerate(p, lim);
    auto enc = encode(p, EncodingConfig{b});
    auto r = solve_bfs(enc.problem, solver_limits());
    c.expect(o.complete && r.status != SolveStatus::ResourceExhausted, "seed " + std::to_string(seed) + ": budget hit");
    bool oracle_solvable = !o.plans.empty();
    solvable += oracle_solvable;
    c.expect((r.status == SolveStatus::Solved) == oracle_solvable,
             "seed " + std::to_string(seed) + " b=" + std::to_string(b) + ": encoding " + to_string(r.status) +
                 ", oracle " + (oracle_solvable ? "solvable" : "unsolvable"));
    if (r.status == SolveStatus::Solved) {
      auto v = validate(p, decode(r.plan, enc));
      c.expect(v.valid(), "seed " + std::to_string(seed) + ": decoded plan " + v.reason);
    }
  }
  return c.done(std::to_string(used) + " instances, " + std::to_string(solvable) + " solvable within their bound");
}

Outcome permutation_invariance() {
  Check c;
  std::size_t layers_checked = 0, orders = 0;
  for (std::uint32_t seed = 0; seed < 150; ++seed) {
    auto p = instance(seed);
    std::vector<ActionId> ids;
    for (const auto& a : p.actions) ids.push_back(a.id);
    // Every subset of at most four pairwise independent actions.
    std::function<void(std::size_t, std::vector<ActionId>&)> grow = [&](std::size_t from, std::vector<ActionId>& layer) {
      if (!layer.empty()) {
        State s = p.init;
        for (auto a : layer) s = set_union(s, p.actions[a].pre);
        std::set<PropId> start(s.begin(), s.end());
        auto expect = apply_layer(s, layer, p.actions);
        std::set<PropId> want(expect.begin(), expect.end());
        std::vector<ActionId> perm = layer;
        do {
          std::vector<const GroundAction*> seq;
          for (auto a : perm) seq.push_back(&p.actions[a]);
          c.expect(oracle::apply_sequence(start, seq) == want, "seed " + std::to_string(seed));
          ++orders;
        } while (std::next_permutation(perm.begin(), perm.end()));
        ++layers_checked;
      }
      if (layer.size() == 4) return;
      for (std::size_t i = from; i < ids.size(); ++i) {
        bool ok = std::all_of(layer.begin(), layer.end(),
                              [&](ActionId a) { return oracle::independent(p.actions[a], p.actions[ids[i]]); });
        if (!ok) continue;
        layer.push_back(ids[i]);
        grow(i + 1, layer);
        layer.pop_back();
      }
    };
    std::vector<ActionId> layer;
    grow(0, layer);
  }
  return c.done(std::to_string(layers_checked) + " independent layers, " + std::to_string(orders) + " orders");
}

Outcome totally_ordered() {
  Check c;
  std::size_t plans = 0;
  for (std::uint32_t seed = 0; seed < 150; ++seed) {
    auto p = instance(seed, true);
    auto singleton = [](const std::vector<ActionLayer>& ls) {
      return std::all_of(ls.begin(), ls.end(), [](const ActionLayer& l) { return l.size() == 1; });
    };
    for (auto mode : {SwitchMode::Literal, SwitchMode::Voluntary}) {
      for (auto obj : {Objective::FirstSolution, Objective::MinMakespan}) {
        SearchConfig cfg;
        cfg.mode = mode;
        cfg.objective = obj;
        cfg.node_limit = 500'000;
        auto r = cpfd_solve(p, cfg);
        if (r.status != SearchStatus::Solved) continue;
        ++plans;
        c.expect(singleton(r.plan->layers), "seed " + std::to_string(seed) + ": " + show(r.plan->layers, p));
      }
    }
    auto size = max_network_size(p, 6);
    if (!size) continue;
    RoundTripConfig rc;
    rc.encoding.bound = static_cast<std::uint32_t>(*size);
    rc.limits = solver_limits();
    auto rt = round_trip(p, rc);
    if (rt.status != SolveStatus::Solved) continue;
    ++plans;
    c.expect(singleton(rt.plan->layers), "seed " + std::to_string(seed) + " round trip: " + show(rt.plan->layers, p));
  }
  return c.done(std::to_string(plans) + " plans from totally ordered instances");
}

Outcome ipc_examples() {
  Check c;
  auto one = ipc_score({{"best", {5.0}}, {"sys", {10.0}}});
  c.expect(one.at("sys") == 0.5, "single problem: " + std::to_string(one.at("sys")));
  auto match = ipc_score({{"best", {5.0, 5.0}}, {"other", {7.0, 5.0}}});
  c.expect(match.at("best") == 1.0, "matching system: " + std::to_string(match.at("best")));
  auto two = ipc_score({{"best", {5.0, 5.0}}, {"sys", {5.0, 10.0}}});
  c.expect(two.at("sys") == 0.75, "two problems: " + std::to_string(two.at("sys")));
  return c.done("0.5, 1.0, 0.75");
}

Outcome pddl_round_trip() {
  Check c;
  std::mt19937 rng(4321);
  int done = 0;
  for (std::uint32_t seed = 0; done < 50; ++seed) {
    auto p = instance(50'000 + seed);
    EncodingConfig cfg;
    cfg.bound = std::uniform_int_distribution<std::uint32_t>(1, 6)(rng);
    if (seed % 2) cfg.effects = EffectsMode::CompiledAway;
    auto enc = encode(p, cfg);
    auto text = write_pddl(enc, "enc" + std::to_string(seed));
    auto back = read_pddl(text.domain, text.problem);
    c.expect(canonical_form(back) == canonical_form(enc.problem), "seed " + std::to_string(seed));
    ++done;
  }
  return c.done(std::to_string(done) + " encodings");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria = {
      {1, "sequential example", 1, variant_one},
      {2, "concurrent example", 5, variant_two},
      {3, "crescent-count law", 5, crescent_law},
      {4, "soundness", 120, soundness},
      {5, "oracle equivalence", 300, oracle_equivalence},
      {6, "encoding completeness", 300, encoding_completeness},
      {7, "layer permutation invariance", 30, permutation_invariance},
      {8, "totally ordered inputs", 60, totally_ordered},
      {9, "IPC score formula", 1, ipc_examples},
      {10, "PDDL round trip", 30, pddl_round_trip},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_time = secs <= c.limit_seconds;
    bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s  %2d  %-30s %8.2f s (limit %g s)%s  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.limit_seconds, in_time ? "" : " OVER TIME", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
