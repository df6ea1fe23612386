#include "lhtn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <unordered_set>

#include "lhtn/cpfd.hpp"

namespace lhtn {

// --- decode ------------------------------------------------------------------

LayeredPlan decode(const ClassicalPlan& plan, const CthdEncoding& enc) {
  const GroundHtnProblem& p = enc.source;
  TaskNetwork tn = p.network;
  std::vector<NodeId> node_in(enc.holder_count, kNone);
  node_in[0] = tn.nodes().front();

  std::vector<ActionLayer> raw(1);
  ProgressionTrace trace;
  for (std::uint32_t id : plan.actions) {
    if (id >= enc.origin.size()) throw UnknownAction("encoded action " + std::to_string(id));
    const EncodedOrigin& o = enc.origin[id];
    switch (o.kind) {
      case OriginKind::Compound: {
        NodeId n = node_in.at(o.holders[0]);
        const Method& m = p.methods.at(o.source);
        trace.push_back({StepKind::Method, n, m.id});
        std::vector<NodeId> inserted = splice_method(tn, n, m);
        std::vector<NodeId> local = m.network.nodes();
        std::vector<NodeId> order = holder_order(m);
        auto global = [&](NodeId l) {
          return inserted[static_cast<std::size_t>(std::find(local.begin(), local.end(), l) - local.begin())];
        };
        node_in[o.holders[0]] = global(m.last_node);
        for (std::size_t j = 0; j < order.size(); ++j) node_in.at(o.holders[j + 1]) = global(order[j]);
        break;
      }
      case OriginKind::Primitive: {
        NodeId n = node_in.at(o.holders[0]);
        trace.push_back({StepKind::Action, n, o.source});
        ActionLayer& layer = raw.back();
        layer.insert(std::upper_bound(layer.begin(), layer.end(), o.source), o.source);
        node_in[o.holders[0]] = kNone;
        break;
      }
      case OriginKind::Switch:
        if (!raw.back().empty()) {
          trace.push_back({StepKind::Switch, kNone, kNone});
          raw.emplace_back();
        }
        break;
    }
  }
  if (!raw.back().empty()) {
    trace.push_back({StepKind::Switch, kNone, kNone});
  } else {
    raw.pop_back();
  }
  return {erase_dummies(raw, p), std::move(trace)};
}

// --- validate ------------------------------------------------------------------

const char* to_string(VerdictCode c) {
  switch (c) {
    case VerdictCode::Valid: return "valid";
    case VerdictCode::MissingTrace: return "missing-trace";
    case VerdictCode::UnknownNode: return "unknown-node";
    case VerdictCode::NotTrailing: return "not-trailing";
    case VerdictCode::WrongTask: return "wrong-task";
    case VerdictCode::NotPrimitive: return "not-primitive";
    case VerdictCode::NotCompound: return "not-compound";
    case VerdictCode::Inapplicable: return "inapplicable";
    case VerdictCode::NotIndependent: return "not-independent";
    case VerdictCode::DuplicateAction: return "duplicate-action";
    case VerdictCode::EmptyLayer: return "empty-layer";
    case VerdictCode::UnresolvedTasks: return "unresolved-tasks";
    case VerdictCode::LayerMismatch: return "layer-mismatch";
  }
  return "?";
}

namespace {

VerdictCode from_model(ErrorCode c) {
  switch (c) {
    case ErrorCode::Inapplicable: return VerdictCode::Inapplicable;
    case ErrorCode::NotIndependent: return VerdictCode::NotIndependent;
    case ErrorCode::NotTrailing: return VerdictCode::NotTrailing;
    case ErrorCode::WrongTask: return VerdictCode::WrongTask;
    case ErrorCode::NotPrimitive: return VerdictCode::NotPrimitive;
    case ErrorCode::NotCompound: return VerdictCode::NotCompound;
    case ErrorCode::UnknownNode: return VerdictCode::UnknownNode;
    case ErrorCode::EmptyLayer: return VerdictCode::EmptyLayer;
    case ErrorCode::DuplicateAction: return VerdictCode::DuplicateAction;
    case ErrorCode::ConflictingEffects:
    case ErrorCode::Cycle: break;
  }
  return VerdictCode::Inapplicable;
}

}  // namespace

Verdict validate(const GroundHtnProblem& p, const LayeredPlan& plan) {
  if (plan.trace.empty() && !plan.layers.empty()) {
    return {VerdictCode::MissingTrace, "plan carries no decomposition trace", 0};
  }
  SearchNode node = initial_node(p);
  std::size_t i = 0;
  try {
    for (; i < plan.trace.size(); ++i) {
      const TraceStep& step = plan.trace[i];
      switch (step.kind) {
        case StepKind::Method:
          if (step.resolver >= p.methods.size()) {
            return {VerdictCode::WrongTask, "unknown method " + std::to_string(step.resolver), i};
          }
          decompose(p, node, step.node, step.resolver);
          break;
        case StepKind::Action:
          if (step.resolver >= p.actions.size()) {
            return {VerdictCode::WrongTask, "unknown action " + std::to_string(step.resolver), i};
          }
          add_to_layer(p, node, step.node, step.resolver);
          break;
        case StepKind::Switch:
          switch_layer(p, node);
          break;
      }
    }
    if (!node.current_layer().empty()) switch_layer(p, node);
  } catch (const ModelError& e) {
    return {from_model(e.code()), e.what(), i};
  }
  if (!node.network.empty()) {
    return {VerdictCode::UnresolvedTasks, std::to_string(node.network.size()) + " task(s) left", i};
  }
  std::vector<ActionLayer> raw(node.layers.begin(), node.layers.end());
  if (!raw.empty() && raw.back().empty()) raw.pop_back();
  if (erase_dummies(raw, p) != plan.layers) {
    return {VerdictCode::LayerMismatch, "layers differ from the replayed trace", i};
  }
  return {};
}

// --- oracle --------------------------------------------------------------------

std::optional<std::size_t> OracleResult::min_makespan() const {
  std::optional<std::size_t> best;
  for (const auto& plan : plans) {
    if (!best || plan.size() < *best) best = plan.size();
  }
  return best;
}

namespace {

class Oracle {
 public:
  Oracle(const GroundHtnProblem& p, const OracleLimits& limits) : p_(p), limits_(limits) {}

  OracleResult run() {
    std::vector<ActionLayer> prefix;
    explore(p_.network, p_.init, prefix, kNone);
    result_.complete = !aborted_;
    return std::move(result_);
  }

 private:
  static void put(std::string& key, std::uint32_t v) { key.append(reinterpret_cast<const char*>(&v), sizeof v); }

  std::string key(const TaskNetwork& tn, const State& s, const std::vector<ActionLayer>& prefix,
                  NodeId floor) const {
    std::string k;
    for (NodeId n : tn.nodes()) {
      put(k, n);
      put(k, tn.task_of(n));
      for (NodeId x : tn.successors(n)) put(k, x);
      put(k, kNone);
    }
    put(k, kNone);
    put(k, tn.next_id());
    put(k, floor);
    for (PropId q : s) put(k, q);
    put(k, kNone);
    for (const auto& l : prefix) {
      for (ActionId a : l) put(k, a);
      put(k, kNone);
    }
    return k;
  }

  bool done() const { return aborted_ || (limits_.stop_at_first && !result_.plans.empty()); }

  // `floor`: decompositions in the current phase go to increasing node ids,
  // so each set of decompositions is explored once.
  void explore(const TaskNetwork& tn, const State& s, std::vector<ActionLayer>& prefix, NodeId floor) {
    if (done()) return;
    if (++result_.states > limits_.max_states) {
      aborted_ = true;
      return;
    }
    if (tn.empty()) {
      result_.plans.insert(prefix);
      return;
    }
    if (!seen_.insert(key(tn, s, prefix, floor)).second) return;

    std::vector<NodeId> trailing_nodes = tn.trailing();
    for (NodeId n : trailing_nodes) {
      if (floor != kNone && n <= floor) continue;
      TaskId t = tn.task_of(n);
      if (p_.is_primitive(t)) continue;
      for (MethodId m : p_.methods_of(t)) {
        TaskNetwork child = tn;
        splice_method(child, n, p_.methods[m]);
        if (child.size() > limits_.max_nodes) continue;
        explore(child, s, prefix, n);
        if (done()) return;
      }
    }

    std::vector<NodeId> prim;
    for (NodeId n : trailing_nodes) {
      if (p_.is_primitive(tn.task_of(n))) prim.push_back(n);
    }
    std::vector<std::pair<NodeId, ActionId>> chosen;
    choose_layer(tn, s, prefix, prim, 0, chosen);
  }

  void choose_layer(const TaskNetwork& tn, const State& s, std::vector<ActionLayer>& prefix,
                    const std::vector<NodeId>& prim, std::size_t i, std::vector<std::pair<NodeId, ActionId>>& chosen) {
    if (done()) return;
    if (i == prim.size()) {
      if (chosen.empty()) return;
      close_layer(tn, s, prefix, chosen);
      return;
    }
    choose_layer(tn, s, prefix, prim, i + 1, chosen);
    for (ActionId a : p_.actions_of(tn.task_of(prim[i]))) {
      const GroundAction& act = p_.actions[a];
      if (!includes(s, act.pre)) continue;
      bool ok = std::all_of(chosen.begin(), chosen.end(), [&](const auto& c) {
        return c.second != a && independent(act, p_.actions[c.second]);
      });
      if (!ok) continue;
      chosen.emplace_back(prim[i], a);
      choose_layer(tn, s, prefix, prim, i + 1, chosen);
      chosen.pop_back();
    }
  }

  void close_layer(const TaskNetwork& tn, const State& s, std::vector<ActionLayer>& prefix,
                   const std::vector<std::pair<NodeId, ActionId>>& chosen) {
    ActionLayer layer, real;
    for (auto [n, a] : chosen) {
      layer.push_back(a);
      if (!p_.actions[a].dummy) real.push_back(a);
    }
    std::sort(layer.begin(), layer.end());
    std::sort(real.begin(), real.end());
    if (!real.empty() && prefix.size() + 1 > limits_.max_layers) return;
    State next = s;
    for (ActionId a : layer) next = set_difference(next, p_.actions[a].del);
    for (ActionId a : layer) next = set_union(next, p_.actions[a].add);
    TaskNetwork child = tn;
    for (auto [n, a] : chosen) child.remove_node(n);
    if (!real.empty()) prefix.push_back(real);
    explore(child, next, prefix, kNone);
    if (!real.empty()) prefix.pop_back();
  }

  const GroundHtnProblem& p_;
  OracleLimits limits_;
  OracleResult result_;
  bool aborted_ = false;
  std::unordered_set<std::string> seen_;
};

}  // namespace

OracleResult oracle_enumerate(const GroundHtnProblem& p, const OracleLimits& limits) {
  return Oracle(p, limits).run();
}

std::optional<std::size_t> max_network_size(const GroundHtnProblem& p, std::size_t cap) {
  // Expanding a node never shrinks the network, so the largest network is a
  // fully expanded one: per task, the best method's sum over its subtasks.
  std::vector<int> mark(p.tasks.size(), 0);  // 0 new, 1 in progress, 2 done
  std::vector<std::size_t> best(p.tasks.size(), 0);
  bool cyclic = false;
  std::function<std::size_t(TaskId)> size_of = [&](TaskId t) -> std::size_t {
    if (p.is_primitive(t)) return 1;
    if (mark[t] == 2) return best[t];
    if (mark[t] == 1) {
      cyclic = true;
      return cap + 1;
    }
    mark[t] = 1;
    std::size_t b = 0;
    for (MethodId m : p.methods_of(t)) {
      std::size_t sum = 0;
      for (NodeId n : p.methods[m].network.nodes()) {
        sum = std::min(cap + 1, sum + size_of(p.methods[m].network.task_of(n)));
      }
      b = std::max(b, sum);
    }
    mark[t] = 2;
    best[t] = std::max<std::size_t>(b, 1);
    return best[t];
  };
  std::size_t total = 0;
  for (NodeId n : p.network.nodes()) total += size_of(p.network.task_of(n));
  if (cyclic || total > cap) return std::nullopt;
  return total;
}

// --- round trip ------------------------------------------------------------------

RoundTripResult round_trip(const GroundHtnProblem& p, const RoundTripConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  std::uint32_t lo = cfg.encoding.bound, hi = cfg.encoding.bound;
  if (cfg.deepen) std::tie(lo, hi) = *cfg.deepen;
  RoundTripResult r;
  for (std::uint32_t b = lo; b <= hi; ++b) {
    EncodingConfig ec = cfg.encoding;
    ec.bound = b;
    auto t0 = Clock::now();
    CthdEncoding enc = encode(p, ec);
    auto t1 = Clock::now();
    SolveResult s = cfg.search == ClassicalSearch::Bfs ? solve_bfs(enc.problem, cfg.limits)
                                                       : solve_greedy(enc.problem, cfg.limits);
    r.encode_seconds += std::chrono::duration<double>(t1 - t0).count();
    r.search_seconds += s.seconds;
    r.bound = b;
    r.stats = enc.stats;
    r.status = s.status;
    if (s.status == SolveStatus::Solved) {
      r.classical_length = s.plan.actions.size();
      r.plan = decode(s.plan, enc);
      r.verdict = validate(p, *r.plan);
      return r;
    }
    if (s.status == SolveStatus::ResourceExhausted) return r;
  }
  return r;
}

}  // namespace lhtn
