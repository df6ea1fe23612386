#include "lhtn/cpfd.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_set>

namespace lhtn {

const char* to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::Solved: return "solved";
    case SearchStatus::Unsolvable: return "unsolvable";
    case SearchStatus::ResourceExhausted: return "resource-exhausted";
  }
  return "?";
}

SearchNode initial_node(const GroundHtnProblem& p) {
  SearchNode node;
  node.network = p.network;
  node.state = p.init;
  node.layers.emplace_back();
  return node;
}

std::vector<ActionId> primitive_resolvers(const GroundHtnProblem& p, const SearchNode& node, NodeId n) {
  std::vector<ActionId> out;
  for (ActionId a : p.actions_of(node.network.task_of(n))) {
    const GroundAction& act = p.actions[a];
    if (!includes(node.state, act.pre)) continue;
    bool ok = std::all_of(node.current_layer().begin(), node.current_layer().end(), [&](ActionId b) {
      return b != a && independent(act, p.actions[b]);
    });
    if (ok) out.push_back(a);
  }
  return out;
}

std::vector<MethodId> compound_resolvers(const GroundHtnProblem& p, const SearchNode& node, NodeId n) {
  return p.methods_of(node.network.task_of(n));
}

void add_to_layer(const GroundHtnProblem& p, SearchNode& node, NodeId n, ActionId a) {
  if (!node.network.contains(n)) throw ModelError(ErrorCode::UnknownNode, "node " + std::to_string(n));
  TaskId t = node.network.task_of(n);
  if (!p.is_primitive(t)) throw ModelError(ErrorCode::NotPrimitive, p.tasks[t].name);
  if (node.network.has_predecessor(n) || node.resolved.count(n)) {
    throw ModelError(ErrorCode::NotTrailing, "node " + std::to_string(n));
  }
  const GroundAction& act = p.actions.at(a);
  if (act.task != t) throw ModelError(ErrorCode::WrongTask, act.name + " does not resolve " + p.tasks[t].name);
  if (!includes(node.state, act.pre)) throw ModelError(ErrorCode::Inapplicable, act.name);
  ActionLayer& layer = node.layers.back();
  for (ActionId b : layer) {
    if (b == a) throw ModelError(ErrorCode::DuplicateAction, act.name);
    if (!independent(act, p.actions[b])) {
      throw ModelError(ErrorCode::NotIndependent, act.name + " / " + p.actions[b].name);
    }
  }
  layer.insert(std::upper_bound(layer.begin(), layer.end(), a), a);
  node.resolved.insert(n);
  node.trace.push_back({StepKind::Action, n, a});
}

void decompose(const GroundHtnProblem& p, SearchNode& node, NodeId n, MethodId m) {
  progress_method(p, node.network, n, m);
  node.trace.push_back({StepKind::Method, n, m});
}

void switch_layer(const GroundHtnProblem& p, SearchNode& node) {
  if (node.current_layer().empty()) throw ModelError(ErrorCode::EmptyLayer, "cannot close an empty layer");
  node.state = apply_layer(node.state, node.current_layer(), p.actions);
  // Resolved nodes were trailing when resolved, so they have no predecessors
  // and removing them loses no transitive constraint.
  for (NodeId n : node.resolved) node.network.remove_node(n);
  node.resolved.clear();
  node.layers.emplace_back();
  node.trace.push_back({StepKind::Switch, kNone, kNone});
}

namespace {

using Clock = std::chrono::steady_clock;

void put(std::string& key, std::uint32_t v) { key.append(reinterpret_cast<const char*>(&v), sizeof v); }

class Search {
 public:
  Search(const GroundHtnProblem& p, const SearchConfig& cfg, bool enumerate)
      : p_(p), cfg_(cfg), enumerate_(enumerate), start_(Clock::now()) {}

  void set_bound(std::optional<std::size_t> bound) {
    bound_ = bound;
    bound_hit_ = false;
    memo_.clear();
  }

  // Returns true if the search stopped (solution in first-solution mode, or
  // resources exhausted).
  bool run() {
    SearchNode root = initial_node(p_);
    return dfs(root);
  }

  bool exhausted() const { return exhausted_; }
  bool bound_hit() const { return bound_hit_; }
  std::optional<LayeredPlan>& found() { return found_; }
  std::set<std::vector<ActionLayer>>& collected() { return collected_; }
  SearchStats stats() const {
    SearchStats s = stats_;
    s.seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    return s;
  }

 private:
  bool out_of_budget() {
    if (++stats_.expansions > cfg_.node_limit) return true;
    if (cfg_.cancel && cfg_.cancel->load(std::memory_order_relaxed)) return true;
    if (cfg_.time_limit > 0 && (stats_.expansions & 1023) == 0) {
      if (std::chrono::duration<double>(Clock::now() - start_).count() > cfg_.time_limit) return true;
    }
    return false;
  }

  bool is_real(const ActionLayer& layer) const {
    return std::any_of(layer.begin(), layer.end(), [&](ActionId a) { return !p_.actions[a].dummy; });
  }

  std::size_t real_layers(const SearchNode& node) const {
    return static_cast<std::size_t>(std::count_if(node.layers.begin(), node.layers.end(),
                                                  [&](const ActionLayer& l) { return is_real(l); }));
  }

  std::string memo_key(const SearchNode& node) const {
    std::string key;
    for (NodeId n : node.network.nodes()) {
      put(key, n);
      put(key, node.network.task_of(n));
      put(key, static_cast<std::uint32_t>(node.network.successors(n).size()));
      for (NodeId s : node.network.successors(n)) put(key, s);
    }
    put(key, kNone);
    put(key, node.network.next_id());
    for (PropId q : node.state) put(key, q);
    put(key, kNone);
    for (ActionId a : node.current_layer()) put(key, a);
    put(key, kNone);
    for (NodeId n : node.resolved) put(key, n);
    put(key, kNone);
    if (bound_) put(key, static_cast<std::uint32_t>(real_layers(node)));
    if (enumerate_) {
      for (std::size_t i = 0; i + 1 < node.layers.size(); ++i) {
        for (ActionId a : node.layers[i]) {
          if (!p_.actions[a].dummy) put(key, a);
        }
        put(key, kNone);
      }
    }
    return key;
  }

  LayeredPlan finish(const SearchNode& node) const {
    LayeredPlan plan;
    plan.trace = node.trace;
    std::vector<ActionLayer> raw = node.layers;
    if (!raw.back().empty()) {
      plan.trace.push_back({StepKind::Switch, kNone, kNone});
    } else {
      raw.pop_back();
    }
    plan.layers = erase_dummies(raw, p_);
    return plan;
  }

  bool recurse(SearchNode&& child) { return dfs(child); }

  bool dfs(SearchNode& node) {
    if (out_of_budget()) {
      exhausted_ = true;
      return true;
    }
    if (node.network.empty()) {
      LayeredPlan plan = finish(node);
      if (enumerate_) {
        collected_.insert(plan.layers);
        return false;
      }
      found_ = std::move(plan);
      return true;
    }
    if (bound_ && real_layers(node) > *bound_) {
      bound_hit_ = true;
      return false;
    }
    std::string key;
    if (cfg_.memoize) {
      key = memo_key(node);
      if (memo_.count(key)) {
        ++stats_.memo_hits;
        return false;
      }
      // In enumeration mode, record on entry: revisits add no new plans.
      if (enumerate_) memo_.insert(key);
    }

    const bool layer_open = !node.current_layer().empty();
    bool switched = false;
    auto do_switch = [&]() {
      switched = true;
      SearchNode child = node;
      switch_layer(p_, child);
      return recurse(std::move(child));
    };

    std::vector<NodeId> to_solve;
    for (NodeId n : node.network.trailing()) {
      if (!node.resolved.count(n)) to_solve.push_back(n);
    }
    // Every trailing node is already in the open layer: nothing can be
    // selected until the layer is closed.
    if (to_solve.empty() && layer_open) {
      if (do_switch()) return true;
    }

    for (NodeId n : to_solve) {
      TaskId t = node.network.task_of(n);
      if (p_.is_primitive(t)) {
        auto resolvers = primitive_resolvers(p_, node, n);
        if (resolvers.empty()) {
          if (cfg_.mode == SwitchMode::Literal && layer_open && !switched) {
            if (do_switch()) return true;
          }
          continue;
        }
        for (ActionId a : resolvers) {
          SearchNode child = node;
          add_to_layer(p_, child, n, a);
          if (recurse(std::move(child))) return true;
        }
      } else {
        for (MethodId m : compound_resolvers(p_, node, n)) {
          SearchNode child = node;
          decompose(p_, child, n, m);
          if (recurse(std::move(child))) return true;
        }
      }
    }
    if (cfg_.mode == SwitchMode::Voluntary && layer_open && !switched) {
      if (do_switch()) return true;
    }
    if (cfg_.memoize && !enumerate_) memo_.insert(std::move(key));
    return false;
  }

  const GroundHtnProblem& p_;
  const SearchConfig& cfg_;
  bool enumerate_;
  Clock::time_point start_;
  std::optional<std::size_t> bound_;
  bool bound_hit_ = false;
  bool exhausted_ = false;
  SearchStats stats_;
  std::unordered_set<std::string> memo_;
  std::optional<LayeredPlan> found_;
  std::set<std::vector<ActionLayer>> collected_;
};

}  // namespace

SearchResult cpfd_solve(const GroundHtnProblem& p, const SearchConfig& cfg) {
  SearchResult result;
  Search search(p, cfg, false);
  if (cfg.objective == Objective::FirstSolution) {
    search.run();
    result.stats = search.stats();
    if (search.found()) {
      result.status = SearchStatus::Solved;
      result.plan = std::move(search.found());
    } else {
      result.status = search.exhausted() ? SearchStatus::ResourceExhausted : SearchStatus::Unsolvable;
    }
    return result;
  }
  result.status = SearchStatus::ResourceExhausted;
  for (std::size_t bound = 0; bound <= cfg.max_makespan; ++bound) {
    search.set_bound(bound);
    search.run();
    if (search.found()) {
      result.status = SearchStatus::Solved;
      result.plan = std::move(search.found());
      break;
    }
    if (search.exhausted()) break;
    if (!search.bound_hit()) {
      result.status = SearchStatus::Unsolvable;
      break;
    }
  }
  result.stats = search.stats();
  return result;
}

EnumerationResult cpfd_enumerate(const GroundHtnProblem& p, const SearchConfig& cfg, std::size_t max_makespan) {
  Search search(p, cfg, true);
  search.set_bound(max_makespan);
  search.run();
  EnumerationResult out;
  out.plans = std::move(search.collected());
  out.complete = !search.exhausted();
  out.stats = search.stats();
  return out;
}

SearchResult solve_concurrently(const GroundHtnProblem& p, const std::vector<SearchConfig>& configs) {
  if (configs.empty()) throw std::invalid_argument("no search configuration given");
  std::atomic<bool> stop{false};
  std::vector<SearchResult> results(configs.size());
  std::mutex mu;
  std::optional<std::size_t> first;
  {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      workers.emplace_back([&, i] {
        SearchConfig cfg = configs[i];
        cfg.cancel = &stop;
        results[i] = cpfd_solve(p, cfg);
        if (results[i].status == SearchStatus::Solved) {
          std::lock_guard lock(mu);
          if (!first) first = i;
          stop = true;
        }
      });
    }
  }
  return first ? results[*first] : results.front();
}

}  // namespace lhtn
