#include "lhtn/model.hpp"

#include <algorithm>
#include <sstream>

namespace lhtn {

PropSet make_set(std::vector<PropId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

bool includes(const PropSet& super, const PropSet& sub) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

bool intersects(const PropSet& a, const PropSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

PropSet set_union(const PropSet& a, const PropSet& b) {
  PropSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

PropSet set_difference(const PropSet& a, const PropSet& b) {
  PropSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

PropSet set_intersection(const PropSet& a, const PropSet& b) {
  PropSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Inapplicable: return "Inapplicable";
    case ErrorCode::NotIndependent: return "NotIndependent";
    case ErrorCode::NotTrailing: return "NotTrailing";
    case ErrorCode::WrongTask: return "WrongTask";
    case ErrorCode::NotPrimitive: return "NotPrimitive";
    case ErrorCode::NotCompound: return "NotCompound";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::EmptyLayer: return "EmptyLayer";
    case ErrorCode::ConflictingEffects: return "ConflictingEffects";
    case ErrorCode::Cycle: return "Cycle";
    case ErrorCode::DuplicateAction: return "DuplicateAction";
  }
  return "?";
}

ModelError::ModelError(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

// --- TaskNetwork -----------------------------------------------------------

NodeId TaskNetwork::add_node(TaskId task) {
  NodeId id = next_id_;
  add_node_with_id(id, task);
  return id;
}

void TaskNetwork::add_node_with_id(NodeId id, TaskId task) {
  auto [it, inserted] = nodes_.try_emplace(id);
  if (!inserted) throw std::invalid_argument("duplicate node id " + std::to_string(id));
  it->second.task = task;
  next_id_ = std::max(next_id_, id + 1);
}

const TaskNetwork::Entry& TaskNetwork::entry(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw ModelError(ErrorCode::UnknownNode, "node " + std::to_string(id));
  return it->second;
}

void TaskNetwork::add_edge(NodeId before, NodeId after) {
  entry(before);
  entry(after);
  if (before == after || precedes(after, before)) {
    throw ModelError(ErrorCode::Cycle,
                     "edge " + std::to_string(before) + " -> " + std::to_string(after) + " closes a cycle");
  }
  if (nodes_[before].succ.insert(after).second) ++nodes_[after].preds;
}

void TaskNetwork::remove_node(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw ModelError(ErrorCode::UnknownNode, "node " + std::to_string(id));
  for (NodeId s : it->second.succ) --nodes_[s].preds;
  if (it->second.preds != 0) {
    for (auto& [other, e] : nodes_) e.succ.erase(id);
  }
  nodes_.erase(it);
}

TaskId TaskNetwork::task_of(NodeId id) const { return entry(id).task; }

std::vector<NodeId> TaskNetwork::nodes() const {
  std::vector<NodeId> out;
  out.reserve(nodes_.size());
  for (const auto& [id, e] : nodes_) out.push_back(id);
  return out;
}

const std::set<NodeId>& TaskNetwork::successors(NodeId id) const { return entry(id).succ; }

std::size_t TaskNetwork::predecessor_count(NodeId id) const { return entry(id).preds; }

bool TaskNetwork::precedes(NodeId before, NodeId after) const {
  std::vector<NodeId> stack{before};
  std::set<NodeId> seen;
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    for (NodeId s : entry(cur).succ) {
      if (s == after) return true;
      if (seen.insert(s).second) stack.push_back(s);
    }
  }
  return false;
}

std::vector<std::pair<NodeId, NodeId>> TaskNetwork::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const auto& [id, e] : nodes_) {
    for (NodeId s : e.succ) out.emplace_back(id, s);
  }
  return out;
}

std::vector<NodeId> TaskNetwork::trailing() const {
  std::vector<NodeId> out;
  for (const auto& [id, e] : nodes_) {
    if (e.preds == 0) out.push_back(id);
  }
  return out;
}

std::vector<NodeId> TaskNetwork::last_nodes() const {
  std::vector<NodeId> out;
  for (const auto& [id, e] : nodes_) {
    if (e.succ.empty()) out.push_back(id);
  }
  return out;
}

bool TaskNetwork::operator==(const TaskNetwork& other) const {
  if (nodes_.size() != other.nodes_.size()) return false;
  for (auto i = nodes_.begin(), j = other.nodes_.begin(); i != nodes_.end(); ++i, ++j) {
    if (i->first != j->first || i->second.task != j->second.task || i->second.succ != j->second.succ) return false;
  }
  return true;
}

// --- GroundHtnProblem ------------------------------------------------------

void GroundHtnProblem::build_index() {
  task_actions_.assign(tasks.size(), {});
  task_methods_.assign(tasks.size(), {});
  task_by_name_.clear();
  action_by_name_.clear();
  method_by_name_.clear();
  prop_by_name_.clear();
  for (const auto& t : tasks) task_by_name_.emplace(t.name, t.id);
  for (const auto& a : actions) {
    task_actions_.at(a.task).push_back(a.id);
    action_by_name_.emplace(a.name, a.id);
  }
  for (const auto& m : methods) {
    task_methods_.at(m.task).push_back(m.id);
    method_by_name_.emplace(m.name, m.id);
  }
  for (const auto& p : propositions) prop_by_name_.emplace(p.name, p.id);
}

namespace {
template <typename Map>
std::uint32_t lookup(const Map& map, const std::string& name) {
  auto it = map.find(name);
  return it == map.end() ? kNone : it->second;
}
}  // namespace

TaskId GroundHtnProblem::find_task(const std::string& name) const { return lookup(task_by_name_, name); }
ActionId GroundHtnProblem::find_action(const std::string& name) const { return lookup(action_by_name_, name); }
MethodId GroundHtnProblem::find_method(const std::string& name) const { return lookup(method_by_name_, name); }
PropId GroundHtnProblem::find_proposition(const std::string& name) const { return lookup(prop_by_name_, name); }

// --- independence and transitions -------------------------------------------

bool independent(const GroundAction& a, const GroundAction& b) {
  return !intersects(a.del, b.pre) && !intersects(a.del, b.add) && !intersects(b.del, a.pre) &&
         !intersects(b.del, a.add);
}

namespace {
// Over-approximation of a conditional action: every condition counts as a
// precondition and every conditional effect as possible.
GroundAction flatten(const ConditionalAction& c) {
  GroundAction g;
  g.pre = c.pre;
  g.add = c.add;
  g.del = c.del;
  for (const auto& e : c.effects) {
    g.pre = set_union(g.pre, e.condition);
    g.add = set_union(g.add, e.add);
    g.del = set_union(g.del, e.del);
  }
  return g;
}
}  // namespace

bool independent(const ConditionalAction& a, const ConditionalAction& b) {
  return independent(flatten(a), flatten(b));
}

std::vector<ActionId> dependent_set(const GroundAction& a, std::span<const GroundAction> actions) {
  std::vector<ActionId> out;
  for (const auto& b : actions) {
    if (b.id == a.id || !independent(a, b)) out.push_back(b.id);
  }
  return out;
}

State apply(const State& s, const GroundAction& a) {
  if (!includes(s, a.pre)) throw ModelError(ErrorCode::Inapplicable, "action " + a.name);
  return set_union(set_difference(s, a.del), a.add);
}

State apply_layer(const State& s, const ActionLayer& layer, std::span<const GroundAction> actions) {
  PropSet pre, add, del;
  for (std::size_t i = 0; i < layer.size(); ++i) {
    const GroundAction& a = actions[layer[i]];
    for (std::size_t j = i + 1; j < layer.size(); ++j) {
      if (layer[i] == layer[j]) throw ModelError(ErrorCode::DuplicateAction, a.name);
      if (!independent(a, actions[layer[j]])) {
        throw ModelError(ErrorCode::NotIndependent, a.name + " / " + actions[layer[j]].name);
      }
    }
    pre = set_union(pre, a.pre);
    add = set_union(add, a.add);
    del = set_union(del, a.del);
  }
  if (!includes(s, pre)) throw ModelError(ErrorCode::Inapplicable, "layer preconditions not satisfied");
  return set_union(set_difference(s, del), add);
}

// --- progression -----------------------------------------------------------

std::vector<NodeId> trailing(const TaskNetwork& tn) { return tn.trailing(); }

std::vector<NodeId> splice_method(TaskNetwork& tn, NodeId n, const Method& m) {
  std::vector<NodeId> local = m.network.nodes();
  std::map<NodeId, NodeId> to_global;
  std::vector<NodeId> inserted;
  inserted.reserve(local.size());
  for (NodeId l : local) {
    NodeId g = tn.add_node(m.network.task_of(l));
    to_global[l] = g;
    inserted.push_back(g);
  }
  for (auto [from, to] : m.network.edges()) tn.add_edge(to_global[from], to_global[to]);
  // Every inserted node inherits the successors of the decomposed node.
  std::vector<NodeId> succ(tn.successors(n).begin(), tn.successors(n).end());
  tn.remove_node(n);
  for (NodeId g : inserted) {
    for (NodeId s : succ) tn.add_edge(g, s);
  }
  return inserted;
}

void progress_action(const GroundHtnProblem& p, TaskNetwork& tn, State& state, NodeId n, ActionId a) {
  if (!tn.contains(n)) throw ModelError(ErrorCode::UnknownNode, "node " + std::to_string(n));
  const GroundAction& act = p.actions.at(a);
  TaskId t = tn.task_of(n);
  if (!p.is_primitive(t)) throw ModelError(ErrorCode::NotPrimitive, p.tasks[t].name);
  if (tn.has_predecessor(n)) throw ModelError(ErrorCode::NotTrailing, "node " + std::to_string(n));
  if (act.task != t) throw ModelError(ErrorCode::WrongTask, act.name + " does not resolve " + p.tasks[t].name);
  state = lhtn::apply(state, act);
  tn.remove_node(n);
}

std::vector<NodeId> progress_method(const GroundHtnProblem& p, TaskNetwork& tn, NodeId n, MethodId m) {
  if (!tn.contains(n)) throw ModelError(ErrorCode::UnknownNode, "node " + std::to_string(n));
  const Method& method = p.methods.at(m);
  TaskId t = tn.task_of(n);
  if (p.is_primitive(t)) throw ModelError(ErrorCode::NotCompound, p.tasks[t].name);
  if (tn.has_predecessor(n)) throw ModelError(ErrorCode::NotTrailing, "node " + std::to_string(n));
  if (method.task != t) {
    throw ModelError(ErrorCode::WrongTask, method.name + " does not decompose " + p.tasks[t].name);
  }
  return splice_method(tn, n, method);
}

GroundHtnProblem progress_action(const GroundHtnProblem& p, NodeId n, ActionId a) {
  GroundHtnProblem out = p;
  progress_action(p, out.network, out.init, n, a);
  return out;
}

GroundHtnProblem progress_method(const GroundHtnProblem& p, NodeId n, MethodId m) {
  GroundHtnProblem out = p;
  progress_method(p, out.network, n, m);
  return out;
}

std::vector<ActionLayer> erase_dummies(const std::vector<ActionLayer>& layers, const GroundHtnProblem& p) {
  std::vector<ActionLayer> out;
  for (const auto& layer : layers) {
    ActionLayer kept;
    for (ActionId a : layer) {
      if (!p.actions.at(a).dummy) kept.push_back(a);
    }
    if (!kept.empty()) out.push_back(std::move(kept));
  }
  return out;
}

std::string layer_to_string(const ActionLayer& layer, const GroundHtnProblem& p) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < layer.size(); ++i) {
    if (i) os << ", ";
    os << p.actions.at(layer[i]).name;
  }
  os << '}';
  return os.str();
}

}  // namespace lhtn
