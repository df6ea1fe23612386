#include "lhtn/builder.hpp"
#include "lhtn/hddl.hpp"

namespace lhtn {

bool is_normalized(const GroundHtnProblem& p) {
  if (p.network.size() != 1) return false;
  for (const auto& m : p.methods) {
    if (!m.pre.empty()) return false;
    if (unique_last_node(m.network) == kNone || m.last_node != unique_last_node(m.network)) return false;
  }
  return true;
}

GroundHtnProblem normalize(const GroundHtnProblem& problem) {
  GroundHtnProblem p = problem;

  auto fresh_task = [&](const std::string& base, TaskKind kind) {
    std::string name = base;
    for (int k = 2; p.find_task(name) != kNone; ++k) name = base + "#" + std::to_string(k);
    TaskId id = static_cast<TaskId>(p.tasks.size());
    p.tasks.push_back({id, name, kind});
    p.build_index();
    return id;
  };
  auto dummy_action = [&](TaskId task, PropSet pre) {
    GroundAction a;
    a.id = static_cast<ActionId>(p.actions.size());
    a.task = task;
    a.name = p.tasks[task].name;
    a.pre = std::move(pre);
    a.dummy = true;
    p.actions.push_back(std::move(a));
  };

  // Single root task.
  if (p.network.size() != 1) {
    TaskId root = fresh_task("__root", TaskKind::Compound);
    Method m;
    m.id = static_cast<MethodId>(p.methods.size());
    m.task = root;
    m.name = "__root_method";
    // Re-key the initial network densely from 0 for the method-local network.
    std::map<NodeId, NodeId> local;
    for (NodeId n : p.network.nodes()) {
      NodeId l = static_cast<NodeId>(local.size());
      local[n] = l;
      m.network.add_node_with_id(l, p.network.task_of(n));
    }
    for (auto [a, b] : p.network.edges()) m.network.add_edge(local[a], local[b]);
    p.methods.push_back(std::move(m));
    p.network = TaskNetwork{};
    p.network.add_node(root);
  }

  for (std::size_t mi = 0; mi < p.methods.size(); ++mi) {
    // Method preconditions become a dummy action preceding every subtask.
    if (!p.methods[mi].pre.empty()) {
      TaskId t = fresh_task("__pre[" + p.methods[mi].name + "]", TaskKind::Primitive);
      dummy_action(t, p.methods[mi].pre);
      Method& m = p.methods[mi];
      std::vector<NodeId> original = m.network.nodes();
      NodeId n = m.network.add_node(t);
      for (NodeId o : original) m.network.add_edge(n, o);
      m.pre.clear();
    }
    // A unique last task, using a no-op if needed.
    if (unique_last_node(p.methods[mi].network) == kNone) {
      TaskId t = fresh_task("__noop[" + p.methods[mi].name + "]", TaskKind::Primitive);
      dummy_action(t, {});
      Method& m = p.methods[mi];
      std::vector<NodeId> original = m.network.nodes();
      NodeId n = m.network.add_node(t);
      for (NodeId o : original) m.network.add_edge(o, n);
    }
    p.methods[mi].last_node = unique_last_node(p.methods[mi].network);
  }
  p.build_index();
  return p;
}

}  // namespace lhtn
