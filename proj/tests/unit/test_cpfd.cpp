#include <doctest.h>

#include <algorithm>
#include <random>

#include "lhtn/builder.hpp"
#include "lhtn/cpfd.hpp"
#include "lhtn/hddl.hpp"
#include "lhtn/pipeline.hpp"
#include "support/fixtures.hpp"
#include "support/generator.hpp"

using namespace lhtn;

namespace {

NodeId node_of(const GroundHtnProblem& p, const SearchNode& s, const std::string& task) {
  for (auto n : s.network.nodes()) {
    if (p.tasks[s.network.task_of(n)].name == task) return n;
  }
  return kNone;
}

SearchNode after_root(const GroundHtnProblem& p) {
  auto s = initial_node(p);
  NodeId root = s.network.nodes().front();
  decompose(p, s, root, p.find_method("(m0)"));
  return s;
}

std::vector<ActionLayer> names_to_layers(const GroundHtnProblem& p, std::vector<std::vector<std::string>> names) {
  std::vector<ActionLayer> out;
  for (auto& layer : names) {
    ActionLayer l;
    for (auto& n : layer) l.push_back(fixtures::action(p, n));
    std::sort(l.begin(), l.end());
    out.push_back(l);
  }
  return out;
}

}  // namespace

TEST_CASE("resolvers on the worked example") {
  auto seq = fixtures::sequential_example();
  auto s = after_root(seq);
  CHECK(primitive_resolvers(seq, s, node_of(seq, s, "(t2)")).empty());
  CHECK(primitive_resolvers(seq, s, node_of(seq, s, "(t1)")) == std::vector<ActionId>{fixtures::action(seq, "(t1)")});

  auto con = fixtures::concurrent_example();
  auto c = after_root(con);
  add_to_layer(con, c, node_of(con, c, "(t1)"), fixtures::action(con, "(t1)"));
  CHECK(primitive_resolvers(con, c, node_of(con, c, "(t3)")) == std::vector<ActionId>{fixtures::action(con, "(t3)")});

  auto root = initial_node(con);
  CHECK(compound_resolvers(con, root, root.network.nodes().front()) == std::vector<MethodId>{con.find_method("(m0)")});

  auto g = fixtures::decomposition_graph_example();
  auto gs = initial_node(g);
  decompose(g, gs, gs.network.nodes().front(), g.find_method("M1"));
  auto t1 = node_of(g, gs, "T1");
  std::vector<MethodId> expect{g.find_method("M2"), g.find_method("M3")};
  CHECK(compound_resolvers(g, gs, t1) == expect);
}

TEST_CASE("switch_layer applies effects and drops resolved nodes") {
  auto seq = fixtures::sequential_example();
  auto s = after_root(seq);
  CHECK_THROWS_AS(switch_layer(seq, s), ModelError);
  add_to_layer(seq, s, node_of(seq, s, "(t1)"), fixtures::action(seq, "(t1)"));
  switch_layer(seq, s);
  CHECK(s.state == make_set({seq.find_proposition("(p1)"), seq.find_proposition("(p2)")}));
  CHECK(node_of(seq, s, "(t1)") == kNone);
  CHECK(s.resolved.empty());
  CHECK(s.current_layer().empty());

  auto con = fixtures::concurrent_example();
  auto c = after_root(con);
  add_to_layer(con, c, node_of(con, c, "(t1)"), fixtures::action(con, "(t1)"));
  add_to_layer(con, c, node_of(con, c, "(t3)"), fixtures::action(con, "(t3)"));
  switch_layer(con, c);
  CHECK(c.state == State{con.find_proposition("(p1)")});
  CHECK(node_of(con, c, "(t1)") == kNone);
  CHECK(node_of(con, c, "(t3)") == kNone);
}

TEST_CASE("variant 1 yields the sequential plan in every mode") {
  auto p = fixtures::sequential_example();
  auto expect = names_to_layers(p, {{"(t1)"}, {"(t2)"}, {"(t3)"}});
  for (auto mode : {SwitchMode::Literal, SwitchMode::Voluntary}) {
    for (auto obj : {Objective::FirstSolution, Objective::MinMakespan}) {
      SearchConfig cfg;
      cfg.mode = mode;
      cfg.objective = obj;
      auto r = cpfd_solve(p, cfg);
      REQUIRE(r.status == SearchStatus::Solved);
      CHECK(r.plan->layers == expect);
      CHECK(validate(p, *r.plan).valid());
    }
  }
}

TEST_CASE("variant 2 min-makespan gives the concurrent plan") {
  auto p = fixtures::concurrent_example();
  SearchConfig cfg;
  cfg.mode = SwitchMode::Voluntary;
  cfg.objective = Objective::MinMakespan;
  auto r = cpfd_solve(p, cfg);
  REQUIRE(r.status == SearchStatus::Solved);
  CHECK(r.plan->layers == names_to_layers(p, {{"(t1)", "(t3)"}, {"(t2)"}}));
  CHECK(validate(p, *r.plan).valid());

  auto again = cpfd_solve(p, cfg);
  CHECK(again.plan->layers == r.plan->layers);
  CHECK(again.plan->trace == r.plan->trace);
}

TEST_CASE("voluntary enumeration on the worked examples") {
  SearchConfig cfg;
  cfg.mode = SwitchMode::Voluntary;
  auto seq = fixtures::sequential_example();
  auto e1 = cpfd_enumerate(seq, cfg, 3);
  CHECK(e1.complete);
  CHECK(e1.plans == std::set<std::vector<ActionLayer>>{names_to_layers(seq, {{"(t1)"}, {"(t2)"}, {"(t3)"}})});

  auto con = fixtures::concurrent_example();
  auto e2 = cpfd_enumerate(con, cfg, 2);
  CHECK(e2.plans.count(names_to_layers(con, {{"(t1)", "(t3)"}, {"(t2)"}})));
  CHECK(e2.plans.count(names_to_layers(con, {{"(t1)"}, {"(t2)", "(t3)"}})));
  for (const auto& plan : e2.plans) CHECK(plan.size() <= 2);
}

TEST_CASE("a compound root without methods is unsolvable") {
  ProblemBuilder b;
  auto T = b.compound("T");
  auto t = b.primitive("t");
  b.action("a", t, {}, {}, {});
  b.add_root(T);
  auto p = normalize(b.build());
  SearchConfig cfg;
  CHECK(cpfd_solve(p, cfg).status == SearchStatus::Unsolvable);
  cfg.mode = SwitchMode::Voluntary;
  cfg.objective = Objective::MinMakespan;
  CHECK(cpfd_solve(p, cfg).status == SearchStatus::Unsolvable);
}

TEST_CASE("recursive methods stop at the node budget") {
  ProblemBuilder b;
  auto T = b.compound("T");
  auto t = b.primitive("t");
  auto never = b.proposition("never");
  b.action("a", t, {never}, {}, {});
  b.method("loop", T, {t, T}, {{0, 1}});
  b.add_root(T);
  auto p = normalize(b.build());
  SearchConfig cfg;
  cfg.node_limit = 5000;
  auto r = cpfd_solve(p, cfg);
  CHECK(r.status != SearchStatus::Solved);
  CHECK(r.stats.expansions <= 5001);
}

TEST_CASE("recursive methods with a base case are solved") {
  ProblemBuilder b;
  auto T = b.compound("T");
  auto t = b.primitive("t");
  auto q = b.proposition("q");
  b.action("a", t, {}, {q}, {});
  b.method("more", T, {t, T}, {{0, 1}});
  b.method("done", T, {t}, {}, {q});
  b.add_root(T);
  auto p = normalize(b.build());
  SearchConfig cfg;
  cfg.node_limit = 10000;
  // Plain depth-first search keeps choosing the recursive method; deepening
  // on the layer count bounds it.
  cfg.objective = Objective::MinMakespan;
  auto r = cpfd_solve(p, cfg);
  REQUIRE(r.status == SearchStatus::Solved);
  CHECK(validate(p, *r.plan).valid());
}

TEST_CASE("returned plans validate on random instances") {
  std::mt19937 rng(2024);
  int solved = 0;
  for (int i = 0; i < 80; ++i) {
    auto p = gen::random_problem(rng);
    for (auto mode : {SwitchMode::Literal, SwitchMode::Voluntary}) {
      SearchConfig cfg;
      cfg.mode = mode;
      cfg.node_limit = 200000;
      cfg.memoize = i % 2 == 0;
      auto r = cpfd_solve(p, cfg);
      if (r.status != SearchStatus::Solved) continue;
      ++solved;
      auto v = validate(p, *r.plan);
      INFO(v.reason);
      REQUIRE(v.valid());
    }
  }
  CHECK(solved > 20);
}

TEST_CASE("memoization does not change solvability") {
  std::mt19937 rng(99);
  for (int i = 0; i < 60; ++i) {
    auto p = gen::random_problem(rng);
    SearchConfig plain;
    plain.mode = SwitchMode::Voluntary;
    SearchConfig memo = plain;
    memo.memoize = true;
    auto a = cpfd_solve(p, plain), b = cpfd_solve(p, memo);
    REQUIRE(a.status == b.status);
  }
}

TEST_CASE("concurrent configurations return the first solution") {
  auto p = fixtures::concurrent_example();
  SearchConfig a, b;
  b.mode = SwitchMode::Voluntary;
  b.objective = Objective::MinMakespan;
  auto r = solve_concurrently(p, {a, b});
  REQUIRE(r.status == SearchStatus::Solved);
  CHECK(validate(p, *r.plan).valid());

  std::atomic<bool> stop{true};
  SearchConfig cancelled;
  cancelled.cancel = &stop;
  CHECK(cpfd_solve(p, cancelled).status == SearchStatus::ResourceExhausted);
}
