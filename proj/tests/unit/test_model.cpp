#include <doctest.h>

#include <algorithm>
#include <random>

#include "lhtn/builder.hpp"
#include "lhtn/model.hpp"
#include "support/fixtures.hpp"
#include "support/generator.hpp"
#include "support/oracles.hpp"

using namespace lhtn;

namespace {

GroundAction act(PropSet pre, PropSet add, PropSet del) {
  GroundAction a;
  a.pre = std::move(pre);
  a.add = std::move(add);
  a.del = std::move(del);
  return a;
}

std::set<PropId> as_set(const State& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("set helpers keep sorted unique vectors") {
  CHECK(make_set({3, 1, 3, 2}) == PropSet{1, 2, 3});
  CHECK(includes({1, 2, 3}, {1, 3}));
  CHECK_FALSE(includes({1, 3}, {2}));
  CHECK(intersects({1, 4}, {4, 5}));
  CHECK_FALSE(intersects({1}, {}));
  CHECK(set_union({1, 3}, {2}) == PropSet{1, 2, 3});
  CHECK(set_difference({1, 2, 3}, {2}) == PropSet{1, 3});
  CHECK(set_intersection({1, 2, 3}, {2, 3, 4}) == PropSet{2, 3});
}

TEST_CASE("independence on the worked example") {
  const PropId p1 = 0, p2 = 1;
  auto t1 = act({}, {p1}, {});
  auto t2 = act({p1, p2}, {}, {});
  auto t3 = act({}, {}, {p2});
  CHECK(independent(t1, t3));
  CHECK_FALSE(independent(t2, t3));
  CHECK_FALSE(independent(t3, t2));
  CHECK(independent(t1, t2));
  CHECK(independent(act({5}, {6}, {}), act({6}, {5}, {})));
}

TEST_CASE("independence agrees with the set-based definition") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> bit(0, 3);
  for (int i = 0; i < 2000; ++i) {
    auto pick = [&] {
      PropSet s;
      for (PropId q = 0; q < 5; ++q) {
        if (bit(rng) == 0) s.push_back(q);
      }
      return s;
    };
    auto a = act(pick(), pick(), pick());
    auto b = act(pick(), pick(), pick());
    REQUIRE(independent(a, b) == oracle::independent(a, b));
    REQUIRE(independent(a, b) == independent(b, a));
  }
}

TEST_CASE("dependent_set includes the action itself") {
  auto p = fixtures::sequential_example();
  auto a1 = fixtures::action(p, "(t1)"), a2 = fixtures::action(p, "(t2)"), a3 = fixtures::action(p, "(t3)");
  std::vector<ActionId> expect{a2, a3};
  std::sort(expect.begin(), expect.end());
  auto got = dependent_set(p.actions[a2], p.actions);
  std::sort(got.begin(), got.end());
  CHECK(got == expect);
  got = dependent_set(p.actions[a3], p.actions);
  std::sort(got.begin(), got.end());
  CHECK(got == expect);
  CHECK(dependent_set(p.actions[a1], p.actions) == std::vector<ActionId>{a1});
}

TEST_CASE("apply and apply_layer") {
  auto p = fixtures::concurrent_example();
  auto p1 = p.find_proposition("(p1)"), p2 = p.find_proposition("(p2)");
  auto a1 = fixtures::action(p, "(t1)"), a3 = fixtures::action(p, "(t3)"), a2 = fixtures::action(p, "(t2)");
  CHECK(lhtn::apply({p2}, p.actions[a1]) == make_set({p1, p2}));
  CHECK(lhtn::apply({p2}, act({}, {}, {})) == State{p2});
  ActionLayer layer{a1, a3};
  std::sort(layer.begin(), layer.end());
  CHECK(apply_layer({p2}, layer, p.actions) == make_set({p1, p2}));
  CHECK(apply_layer({p2}, {}, p.actions) == State{p2});

  auto thrown = [&](auto f) {
    try {
      f();
    } catch (const ModelError& e) {
      return e.code();
    }
    return ErrorCode::Cycle;
  };
  CHECK(thrown([&] { lhtn::apply({p2}, p.actions[a2]); }) == ErrorCode::Inapplicable);
  ActionLayer both{a1, a2};
  std::sort(both.begin(), both.end());
  CHECK(thrown([&] { apply_layer({p2}, both, p.actions); }) == ErrorCode::Inapplicable);

  auto seq = fixtures::sequential_example();
  ActionLayer dep{fixtures::action(seq, "(t2)"), fixtures::action(seq, "(t3)")};
  std::sort(dep.begin(), dep.end());
  State full = make_set({seq.find_proposition("(p1)"), seq.find_proposition("(p2)")});
  CHECK(thrown([&] { apply_layer(full, dep, seq.actions); }) == ErrorCode::NotIndependent);
  CHECK(lhtn::apply(full, seq.actions[fixtures::action(seq, "(t3)")]) == State{seq.find_proposition("(p1)")});
}

TEST_CASE("apply_layer equals every linearization on random independent layers") {
  std::mt19937 rng(11);
  int layers = 0;
  for (int inst = 0; inst < 60; ++inst) {
    auto p = gen::random_problem(rng);
    std::vector<ActionId> ids;
    for (const auto& a : p.actions) {
      if (!a.dummy) ids.push_back(a.id);
    }
    State s = p.init;
    for (const auto& a : p.actions) s = set_union(s, a.pre);
    for (std::size_t mask = 1; mask < (1u << std::min<std::size_t>(ids.size(), 6)); ++mask) {
      std::vector<ActionId> layer;
      for (std::size_t i = 0; i < ids.size() && i < 6; ++i) {
        if (mask & (1u << i)) layer.push_back(ids[i]);
      }
      if (layer.size() > 3) continue;
      bool ok = true;
      for (std::size_t i = 0; i < layer.size() && ok; ++i)
        for (std::size_t j = i + 1; j < layer.size() && ok; ++j)
          ok = oracle::independent(p.actions[layer[i]], p.actions[layer[j]]);
      if (!ok) continue;
      ++layers;
      auto expected = as_set(apply_layer(s, layer, p.actions));
      do {
        std::vector<const GroundAction*> seq;
        for (auto a : layer) seq.push_back(&p.actions[a]);
        REQUIRE(oracle::apply_sequence(as_set(s), seq) == expected);
      } while (std::next_permutation(layer.begin(), layer.end()));
    }
  }
  CHECK(layers > 100);
}

TEST_CASE("trailing nodes and precedence") {
  TaskNetwork tn;
  CHECK(trailing(tn).empty());
  auto a = tn.add_node(0), b = tn.add_node(1), c = tn.add_node(2);
  CHECK(trailing(tn) == std::vector<NodeId>{a, b, c});
  tn.add_edge(a, b);
  tn.add_edge(b, c);
  CHECK(trailing(tn) == std::vector<NodeId>{a});
  CHECK(tn.precedes(a, c));
  CHECK_FALSE(tn.precedes(c, a));
  CHECK(tn.last_nodes() == std::vector<NodeId>{c});
  CHECK_THROWS_AS(tn.add_edge(c, a), ModelError);
}

TEST_CASE("precedence agrees with Floyd-Warshall closure") {
  std::mt19937 rng(3);
  for (int round = 0; round < 40; ++round) {
    TaskNetwork tn;
    int n = std::uniform_int_distribution<int>(1, 20)(rng);
    for (int i = 0; i < n; ++i) tn.add_node(0);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (std::bernoulli_distribution(0.12)(rng)) tn.add_edge(i, j);
    auto reach = oracle::closure(tn);
    auto nodes = tn.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = 0; j < nodes.size(); ++j) REQUIRE(tn.precedes(nodes[i], nodes[j]) == reach[i][j]);
  }
}

TEST_CASE("progress_action on the worked example") {
  auto p = fixtures::sequential_example();
  NodeId root = p.network.nodes().front();
  auto m0 = p.find_method("(m0)");
  auto q = progress_method(p, root, m0);
  CHECK(q.network.size() == 4);
  CHECK(q.network.edges().size() == 3);

  auto node_of = [&](const GroundHtnProblem& g, const std::string& task) {
    for (auto n : g.network.nodes()) {
      if (g.tasks[g.network.task_of(n)].name == task) return n;
    }
    return kNone;
  };
  auto r = progress_action(q, node_of(q, "(t1)"), fixtures::action(q, "(t1)"));
  CHECK(r.init == make_set({q.find_proposition("(p1)"), q.find_proposition("(p2)")}));
  CHECK(r.network.size() == 3);
  CHECK(node_of(r, "(t1)") == kNone);

  try {
    progress_action(q, node_of(q, "(t2)"), fixtures::action(q, "(t2)"));
    FAIL("expected Inapplicable");
  } catch (const ModelError& e) {
    CHECK(e.code() == ErrorCode::Inapplicable);
  }
  try {
    progress_action(q, node_of(q, "(t2)"), fixtures::action(q, "(t1)"));
    FAIL("expected WrongTask");
  } catch (const ModelError& e) {
    CHECK(e.code() == ErrorCode::WrongTask);
  }

  ProblemBuilder b;
  auto t = b.primitive("t");
  b.action("a", t, {}, {}, {});
  b.add_root(t);
  auto one = b.build();
  auto done = progress_action(one, 0, 0);
  CHECK(done.network.empty());
}

TEST_CASE("progress_method splices and inherits successors") {
  auto p = fixtures::decomposition_graph_example();
  REQUIRE(p.network.size() == 1);
  NodeId t0 = p.network.nodes().front();
  CHECK(p.tasks[p.network.task_of(t0)].name == "T0");

  auto q = progress_method(p, t0, p.find_method("M1"));
  REQUIRE(q.network.size() == 4);
  std::map<std::string, NodeId> by;
  for (auto n : q.network.nodes()) by[q.tasks[q.network.task_of(n)].name] = n;
  REQUIRE(by.count("__noop[M1]"));
  CHECK(q.network.precedes(by["t1"], by["T1"]));
  for (auto name : {"T1", "t1", "T2"}) CHECK(q.network.precedes(by[name], by["__noop[M1]"]));
  CHECK(trailing(q.network) == std::vector<NodeId>{by["t1"], by["T2"]});

  // T2 has a successor (the no-op); its replacement t4 must inherit it.
  auto r = progress_method(q, by["T2"], q.find_method("M4"));
  NodeId t4 = kNone;
  for (auto n : r.network.nodes()) {
    if (r.tasks[r.network.task_of(n)].name == "t4") t4 = n;
  }
  REQUIRE(t4 != kNone);
  CHECK(r.network.precedes(t4, by["__noop[M1]"]));
  CHECK(t4 >= q.network.next_id());

  try {
    progress_method(q, by["T1"], q.find_method("M2"));
    FAIL("expected NotTrailing");
  } catch (const ModelError& e) {
    CHECK(e.code() == ErrorCode::NotTrailing);
  }
  try {
    progress_method(q, by["T2"], q.find_method("M2"));
    FAIL("expected WrongTask");
  } catch (const ModelError& e) {
    CHECK(e.code() == ErrorCode::WrongTask);
  }
}

TEST_CASE("erase_dummies drops dummy actions and emptied layers") {
  auto p = fixtures::concurrent_example();
  ActionId noop = kNone;
  for (const auto& a : p.actions) {
    if (a.dummy) noop = a.id;
  }
  REQUIRE(noop != kNone);
  auto a1 = fixtures::action(p, "(t1)");
  auto out = erase_dummies({{a1}, {noop}}, p);
  CHECK(out == std::vector<ActionLayer>{{a1}});
  CHECK(layer_to_string({a1}, p) == "{(t1)}");
}
