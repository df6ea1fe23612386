#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lhtn/model.hpp"

namespace lhtn {

// Incremental construction of a ground problem, used by the grounder, the
// normalizer and tests. Names are unique per kind.
class ProblemBuilder {
 public:
  ProblemBuilder() = default;
  explicit ProblemBuilder(GroundHtnProblem base);

  PropId proposition(const std::string& name);
  TaskId primitive(const std::string& name);
  TaskId compound(const std::string& name);
  // Throws ModelError(ConflictingEffects) when add and del overlap.
  ActionId action(const std::string& name, TaskId task, PropSet pre, PropSet add, PropSet del, bool dummy = false);
  // `ordering` holds (before, after) pairs of indices into `subtasks`.
  MethodId method(const std::string& name, TaskId task, const std::vector<TaskId>& subtasks,
                  const std::vector<std::pair<std::size_t, std::size_t>>& ordering, PropSet pre = {});

  void set_init(PropSet init) { problem_.init = make_set(std::move(init)); }
  NodeId add_root(TaskId task) { return problem_.network.add_node(task); }
  void order_roots(NodeId before, NodeId after) { problem_.network.add_edge(before, after); }

  GroundHtnProblem build();

 private:
  TaskId task(const std::string& name, TaskKind kind);

  GroundHtnProblem problem_;
  std::unordered_map<std::string, PropId> props_;
  std::unordered_map<std::string, TaskId> tasks_;
};

// Unique last node of a network, or kNone.
NodeId unique_last_node(const TaskNetwork& tn);

}  // namespace lhtn
