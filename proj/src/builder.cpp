#include "lhtn/builder.hpp"

namespace lhtn {

ProblemBuilder::ProblemBuilder(GroundHtnProblem base) : problem_(std::move(base)) {
  for (const auto& p : problem_.propositions) props_.emplace(p.name, p.id);
  for (const auto& t : problem_.tasks) tasks_.emplace(t.name, t.id);
}

PropId ProblemBuilder::proposition(const std::string& name) {
  auto [it, inserted] = props_.try_emplace(name, static_cast<PropId>(problem_.propositions.size()));
  if (inserted) problem_.propositions.push_back({it->second, name});
  return it->second;
}

TaskId ProblemBuilder::task(const std::string& name, TaskKind kind) {
  auto [it, inserted] = tasks_.try_emplace(name, static_cast<TaskId>(problem_.tasks.size()));
  if (inserted) {
    problem_.tasks.push_back({it->second, name, kind});
  } else if (problem_.tasks[it->second].kind != kind) {
    throw std::invalid_argument("task " + name + " declared both primitive and compound");
  }
  return it->second;
}

TaskId ProblemBuilder::primitive(const std::string& name) { return task(name, TaskKind::Primitive); }
TaskId ProblemBuilder::compound(const std::string& name) { return task(name, TaskKind::Compound); }

ActionId ProblemBuilder::action(const std::string& name, TaskId task, PropSet pre, PropSet add, PropSet del,
                                bool dummy) {
  if (problem_.tasks.at(task).kind != TaskKind::Primitive) {
    throw std::invalid_argument("action " + name + " resolves a compound task");
  }
  GroundAction a;
  a.id = static_cast<ActionId>(problem_.actions.size());
  a.task = task;
  a.name = name;
  a.pre = make_set(std::move(pre));
  a.add = make_set(std::move(add));
  a.del = make_set(std::move(del));
  a.dummy = dummy;
  if (intersects(a.add, a.del)) throw ModelError(ErrorCode::ConflictingEffects, "action " + name);
  problem_.actions.push_back(std::move(a));
  return problem_.actions.back().id;
}

MethodId ProblemBuilder::method(const std::string& name, TaskId task, const std::vector<TaskId>& subtasks,
                                const std::vector<std::pair<std::size_t, std::size_t>>& ordering, PropSet pre) {
  if (problem_.tasks.at(task).kind != TaskKind::Compound) {
    throw std::invalid_argument("method " + name + " decomposes a primitive task");
  }
  Method m;
  m.id = static_cast<MethodId>(problem_.methods.size());
  m.task = task;
  m.name = name;
  m.pre = make_set(std::move(pre));
  for (TaskId t : subtasks) m.network.add_node(t);
  for (auto [before, after] : ordering) {
    m.network.add_edge(static_cast<NodeId>(before), static_cast<NodeId>(after));
  }
  m.last_node = unique_last_node(m.network);
  problem_.methods.push_back(std::move(m));
  return problem_.methods.back().id;
}

GroundHtnProblem ProblemBuilder::build() {
  for (auto& m : problem_.methods) m.last_node = unique_last_node(m.network);
  problem_.build_index();
  return problem_;
}

NodeId unique_last_node(const TaskNetwork& tn) {
  auto last = tn.last_nodes();
  return last.size() == 1 ? last.front() : kNone;
}

}  // namespace lhtn
