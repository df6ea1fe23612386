#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lhtn {

using PropId = std::uint32_t;
using TaskId = std::uint32_t;
using ActionId = std::uint32_t;
using MethodId = std::uint32_t;
using NodeId = std::uint32_t;

inline constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

// Sorted, duplicate-free vector of proposition ids. Used for action
// conditions/effects and for states.
using PropSet = std::vector<PropId>;
using State = PropSet;

PropSet make_set(std::vector<PropId> ids);
inline PropSet make_set(std::initializer_list<PropId> ids) { return make_set(std::vector<PropId>(ids)); }

bool includes(const PropSet& super, const PropSet& sub);
bool intersects(const PropSet& a, const PropSet& b);
PropSet set_union(const PropSet& a, const PropSet& b);
PropSet set_difference(const PropSet& a, const PropSet& b);
PropSet set_intersection(const PropSet& a, const PropSet& b);

enum class ErrorCode {
  Inapplicable,
  NotIndependent,
  NotTrailing,
  WrongTask,
  NotPrimitive,
  NotCompound,
  UnknownNode,
  EmptyLayer,
  ConflictingEffects,
  Cycle,
  DuplicateAction,
};

const char* to_string(ErrorCode code);

class ModelError : public std::runtime_error {
 public:
  ModelError(ErrorCode code, const std::string& what);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct Proposition {
  PropId id = kNone;
  std::string name;
};

enum class TaskKind { Primitive, Compound };

struct Task {
  TaskId id = kNone;
  std::string name;
  TaskKind kind = TaskKind::Primitive;
};

struct GroundAction {
  ActionId id = kNone;
  TaskId task = kNone;
  std::string name;
  PropSet pre;
  PropSet add;
  PropSet del;
  // Compiled-in helper action (method precondition holder or no-op last task).
  // Erased from emitted plans.
  bool dummy = false;
};

struct ConditionalEffect {
  PropSet condition;
  PropSet add;
  PropSet del;
};

// ADL action: unconditional part plus condition-guarded effects. Effects are
// evaluated on the state before application; adds win over deletes.
struct ConditionalAction {
  std::uint32_t id = kNone;
  std::string name;
  PropSet pre;
  PropSet pre_neg;
  PropSet add;
  PropSet del;
  std::vector<ConditionalEffect> effects;
  bool layer_switch = false;
};

/// Partial order of task nodes. Direct edges are stored; the precedence
/// relation is their transitive closure, answered on demand by DFS.
/// Fresh node ids come from a monotone counter that is copied with the
/// network, so ids are stable along one search branch.
class TaskNetwork {
 public:
  NodeId add_node(TaskId task);
  void add_node_with_id(NodeId id, TaskId task);
  // Throws ModelError(Cycle) if the edge would close a cycle.
  void add_edge(NodeId before, NodeId after);
  void remove_node(NodeId id);

  bool contains(NodeId id) const { return nodes_.count(id) != 0; }
  TaskId task_of(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  std::vector<NodeId> nodes() const;
  const std::set<NodeId>& successors(NodeId id) const;
  std::size_t predecessor_count(NodeId id) const;
  bool has_predecessor(NodeId id) const { return predecessor_count(id) != 0; }
  bool precedes(NodeId before, NodeId after) const;
  std::vector<std::pair<NodeId, NodeId>> edges() const;
  std::vector<NodeId> trailing() const;
  std::vector<NodeId> last_nodes() const;

  NodeId next_id() const { return next_id_; }
  void set_next_id(NodeId id) { next_id_ = id; }

  bool operator==(const TaskNetwork& other) const;

 private:
  struct Entry {
    TaskId task = kNone;
    std::set<NodeId> succ;
    std::size_t preds = 0;
  };
  const Entry& entry(NodeId id) const;

  std::map<NodeId, Entry> nodes_;
  NodeId next_id_ = 0;
};

struct Method {
  MethodId id = kNone;
  TaskId task = kNone;
  std::string name;
  TaskNetwork network;
  NodeId last_node = kNone;
  // Empty after normalization.
  PropSet pre;
};

struct GroundHtnProblem {
  std::vector<Proposition> propositions;
  std::vector<Task> tasks;
  std::vector<GroundAction> actions;
  std::vector<Method> methods;
  State init;
  TaskNetwork network;

  // Rebuilds the task -> resolver indexes and name lookups. Must be called
  // after any structural edit.
  void build_index();

  const std::vector<ActionId>& actions_of(TaskId task) const { return task_actions_.at(task); }
  const std::vector<MethodId>& methods_of(TaskId task) const { return task_methods_.at(task); }
  bool is_primitive(TaskId task) const { return tasks.at(task).kind == TaskKind::Primitive; }

  TaskId find_task(const std::string& name) const;
  ActionId find_action(const std::string& name) const;
  MethodId find_method(const std::string& name) const;
  PropId find_proposition(const std::string& name) const;

 private:
  std::vector<std::vector<ActionId>> task_actions_;
  std::vector<std::vector<MethodId>> task_methods_;
  std::unordered_map<std::string, TaskId> task_by_name_;
  std::unordered_map<std::string, ActionId> action_by_name_;
  std::unordered_map<std::string, MethodId> method_by_name_;
  std::unordered_map<std::string, PropId> prop_by_name_;
};

using ActionLayer = std::vector<ActionId>;  // sorted

enum class StepKind { Method, Action, Switch };

struct TraceStep {
  StepKind kind = StepKind::Switch;
  NodeId node = kNone;
  std::uint32_t resolver = kNone;

  bool operator==(const TraceStep&) const = default;
};

using ProgressionTrace = std::vector<TraceStep>;

struct LayeredPlan {
  std::vector<ActionLayer> layers;
  ProgressionTrace trace;

  std::size_t makespan() const { return layers.size(); }
};

// --- independence and state transition ------------------------------------

bool independent(const GroundAction& a, const GroundAction& b);
bool independent(const ConditionalAction& a, const ConditionalAction& b);

/// Ids of the actions in `actions` that are not independent of `a`; `a`
/// itself is always included so one ground action cannot appear twice in a
/// layer.
std::vector<ActionId> dependent_set(const GroundAction& a, std::span<const GroundAction> actions);

State apply(const State& s, const GroundAction& a);
State apply_layer(const State& s, const ActionLayer& layer, std::span<const GroundAction> actions);

// --- progression -----------------------------------------------------------

std::vector<NodeId> trailing(const TaskNetwork& tn);

/// Splices method `m` in place of node `n` without checking applicability.
/// Fresh ids are assigned in ascending order of the method-local node ids;
/// the returned vector maps method-local order to the inserted ids.
std::vector<NodeId> splice_method(TaskNetwork& tn, NodeId n, const Method& m);

void progress_action(const GroundHtnProblem& p, TaskNetwork& tn, State& state, NodeId n, ActionId a);
std::vector<NodeId> progress_method(const GroundHtnProblem& p, TaskNetwork& tn, NodeId n, MethodId m);

GroundHtnProblem progress_action(const GroundHtnProblem& p, NodeId n, ActionId a);
GroundHtnProblem progress_method(const GroundHtnProblem& p, NodeId n, MethodId m);

/// Removes dummy actions and the layers they leave empty.
std::vector<ActionLayer> erase_dummies(const std::vector<ActionLayer>& layers, const GroundHtnProblem& p);

std::string layer_to_string(const ActionLayer& layer, const GroundHtnProblem& p);

}  // namespace lhtn
