#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "lhtn/builder.hpp"
#include "lhtn/hddl.hpp"

namespace lhtn {

namespace {

std::string atom_key(const std::string& pred, const std::vector<std::string>& args) {
  std::string out = "(" + pred;
  for (const auto& a : args) out += " " + a;
  return out + ")";
}

bool is_variable(const std::string& term) { return !term.empty() && term.front() == '?'; }

struct GroundTaskRef {
  std::string name;
  std::vector<std::string> args;
  std::string key() const { return atom_key(name, args); }
};

struct GroundMethodRecord {
  std::string name;
  std::string task;
  std::vector<std::string> subtasks;
  std::vector<std::pair<std::size_t, std::size_t>> ordering;
  std::vector<std::string> pre;  // fluent atom keys
};

struct GroundActionRecord {
  std::string name;
  std::vector<std::string> pre, add, del;
};

class Grounder {
 public:
  Grounder(const LiftedDomain& d, const LiftedProblem& p) : d_(d), p_(p) {}

  GroundHtnProblem run() {
    collect_objects();
    collect_statics();
    check_init();

    std::vector<std::string> roots;
    for (const auto& st : p_.network.subtasks) roots.push_back(resolve_root_task(st.task));

    std::deque<std::string> queue(roots.begin(), roots.end());
    while (!queue.empty()) {
      std::string key = queue.front();
      queue.pop_front();
      if (!seen_.insert(key).second) continue;
      order_.push_back(key);
      const GroundTaskRef& ref = refs_.at(key);
      if (d_.find_action(ref.name)) {
        ground_action(key, ref);
      } else {
        for (const auto& m : d_.methods) {
          if (m.task.predicate == ref.name) ground_method(m, key, ref, queue);
        }
      }
    }

    // Decomposition achievability fixpoint.
    std::set<std::string> achievable;
    for (const auto& [key, a] : actions_) achievable.insert(key);
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& m : methods_) {
        if (achievable.count(m.task)) continue;
        bool ok = std::all_of(m.subtasks.begin(), m.subtasks.end(),
                              [&](const std::string& s) { return achievable.count(s) != 0; });
        if (ok) {
          achievable.insert(m.task);
          changed = true;
        }
      }
    }
    auto method_ok = [&](const GroundMethodRecord& m) {
      return std::all_of(m.subtasks.begin(), m.subtasks.end(),
                         [&](const std::string& s) { return achievable.count(s) != 0; });
    };

    // Reachability from the roots through achievable methods.
    std::set<std::string> reachable(roots.begin(), roots.end());
    std::deque<std::string> work(roots.begin(), roots.end());
    std::multimap<std::string, const GroundMethodRecord*> by_task;
    for (const auto& m : methods_) {
      if (method_ok(m)) by_task.emplace(m.task, &m);
    }
    while (!work.empty()) {
      std::string t = work.front();
      work.pop_front();
      auto [lo, hi] = by_task.equal_range(t);
      for (auto it = lo; it != hi; ++it) {
        for (const auto& s : it->second->subtasks) {
          if (reachable.insert(s).second) work.push_back(s);
        }
      }
    }

    ProblemBuilder b;
    for (const auto& f : init_fluents_) b.proposition(f);
    auto props = [&](const std::vector<std::string>& keys) {
      std::vector<PropId> out;
      for (const auto& k : keys) out.push_back(b.proposition(k));
      return make_set(std::move(out));
    };
    for (const auto& key : order_) {
      if (!reachable.count(key)) continue;
      if (d_.find_action(refs_.at(key).name)) {
        TaskId t = b.primitive(key);
        auto it = actions_.find(key);
        if (it != actions_.end()) {
          b.action(it->second.name, t, props(it->second.pre), props(it->second.add), props(it->second.del));
        }
      } else {
        b.compound(key);
      }
    }
    for (const auto& m : methods_) {
      if (!reachable.count(m.task) || !method_ok(m)) continue;
      std::vector<TaskId> subtasks;
      for (const auto& s : m.subtasks) {
        subtasks.push_back(d_.find_action(refs_.at(s).name) ? b.primitive(s) : b.compound(s));
      }
      b.method(m.name, b.compound(m.task), subtasks, m.ordering, props(m.pre));
    }

    std::vector<NodeId> root_nodes;
    for (const auto& r : roots) {
      TaskId t = d_.find_action(refs_.at(r).name) ? b.primitive(r) : b.compound(r);
      root_nodes.push_back(b.add_root(t));
    }
    for (auto [i, j] : p_.network.ordering) b.order_roots(root_nodes[i], root_nodes[j]);

    if (!p_.goal.empty()) add_goal(b, root_nodes);

    std::vector<PropId> init;
    for (const auto& f : init_fluents_) init.push_back(b.proposition(f));
    b.set_init(make_set(std::move(init)));
    return b.build();
  }

 private:
  void collect_objects() {
    auto add = [&](const TypedName& o) {
      if (!d_.has_type(o.type)) throw ResolutionError("object " + o.name + " has undeclared type " + o.type);
      object_type_[o.name] = o.type;
      objects_.push_back(o.name);
    };
    for (const auto& c : d_.constants) add(c);
    for (const auto& o : p_.objects) {
      if (object_type_.count(o.name)) continue;
      add(o);
    }
  }

  bool is_subtype(std::string type, const std::string& ancestor) const {
    for (int guard = 0; guard < 1000; ++guard) {
      if (type == ancestor || ancestor == "object") return true;
      auto it = d_.type_parent.find(type);
      if (it == d_.type_parent.end()) return false;
      type = it->second;
    }
    throw ResolutionError("cyclic type hierarchy at " + type);
  }

  const std::vector<std::string>& objects_of(const std::string& type) {
    auto it = by_type_.find(type);
    if (it != by_type_.end()) return it->second;
    std::vector<std::string> out;
    for (const auto& o : objects_) {
      if (is_subtype(object_type_.at(o), type)) out.push_back(o);
    }
    return by_type_.emplace(type, std::move(out)).first->second;
  }

  void collect_statics() {
    std::set<std::string> fluent;
    for (const auto& a : d_.actions) {
      for (const auto& e : a.add) fluent.insert(e.predicate);
      for (const auto& e : a.del) fluent.insert(e.predicate);
    }
    for (const auto& pd : d_.predicates) {
      if (!fluent.count(pd.name)) static_preds_.insert(pd.name);
    }
    for (const auto& f : p_.init) {
      if (static_preds_.count(f.predicate)) {
        static_facts_.insert(atom_key(f.predicate, f.args));
      } else if (std::find(init_fluents_.begin(), init_fluents_.end(), atom_key(f.predicate, f.args)) ==
                 init_fluents_.end()) {
        init_fluents_.push_back(atom_key(f.predicate, f.args));
      }
    }
  }

  void check_init() {
    std::set<std::string> declared;
    for (const auto& pd : d_.predicates) declared.insert(pd.name);
    for (const auto& f : p_.init) {
      if (!declared.count(f.predicate)) throw ResolutionError("undeclared predicate " + f.predicate + " in :init");
      for (const auto& a : f.args) {
        if (!object_type_.count(a)) throw ResolutionError("undeclared object " + a + " in :init");
      }
    }
  }

  std::string resolve_root_task(const AtomSchema& task) {
    GroundTaskRef ref{task.predicate, {}};
    if (!d_.find_task(task.predicate) && !d_.find_action(task.predicate)) {
      throw ResolutionError("undeclared task " + task.predicate + " in :htn");
    }
    for (const auto& a : task.args) {
      if (is_variable(a)) throw UnsupportedFeature("variables in the initial task network");
      if (!object_type_.count(a)) throw ResolutionError("undeclared object " + a + " in :htn");
      ref.args.push_back(a);
    }
    std::string key = ref.key();
    refs_.emplace(key, ref);
    return key;
  }

  using Binding = std::map<std::string, std::string>;

  std::optional<std::string> term(const std::string& t, const Binding& bind) const {
    if (!is_variable(t)) {
      if (!object_type_.count(t)) throw ResolutionError("undeclared constant " + t);
      return t;
    }
    auto it = bind.find(t);
    if (it == bind.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::vector<std::string>> ground_args(const AtomSchema& a, const Binding& bind) const {
    std::vector<std::string> out;
    for (const auto& t : a.args) {
      auto v = term(t, bind);
      if (!v) return std::nullopt;
      out.push_back(*v);
    }
    return out;
  }

  // False if some fully-bound static part of the condition is violated.
  bool statics_hold(const ConditionSchema& c, const Binding& bind) const {
    for (const auto& a : c.positive) {
      if (!static_preds_.count(a.predicate)) continue;
      auto args = ground_args(a, bind);
      if (args && !static_facts_.count(atom_key(a.predicate, *args))) return false;
    }
    for (const auto& a : c.negative) {
      if (!static_preds_.count(a.predicate)) continue;
      auto args = ground_args(a, bind);
      if (args && static_facts_.count(atom_key(a.predicate, *args))) return false;
    }
    for (const auto& [x, y] : c.equal) {
      auto a = term(x, bind);
      auto b = term(y, bind);
      if (a && b && *a != *b) return false;
    }
    for (const auto& [x, y] : c.not_equal) {
      auto a = term(x, bind);
      auto b = term(y, bind);
      if (a && b && *a == *b) return false;
    }
    return true;
  }

  std::vector<std::string> fluent_keys(const std::vector<AtomSchema>& atoms, const Binding& bind,
                                       bool skip_static) const {
    std::vector<std::string> out;
    for (const auto& a : atoms) {
      if (skip_static && static_preds_.count(a.predicate)) continue;
      auto args = ground_args(a, bind);
      if (!args) throw ResolutionError("unbound variable in atom " + a.predicate);
      out.push_back(atom_key(a.predicate, *args));
    }
    return out;
  }

  void reject_fluent_negatives(const ConditionSchema& c, const std::string& where) const {
    for (const auto& a : c.negative) {
      if (!static_preds_.count(a.predicate)) {
        throw UnsupportedFeature("negative precondition on fluent " + a.predicate + " in " + where);
      }
    }
  }

  bool bind_params(const std::vector<TypedName>& params, const std::vector<std::string>& args, Binding& bind) {
    if (params.size() != args.size()) return false;
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (!is_subtype(object_type_.at(args[i]), params[i].type)) return false;
      bind[params[i].name] = args[i];
    }
    return true;
  }

  void ground_action(const std::string& key, const GroundTaskRef& ref) {
    const ActionSchema& a = *d_.find_action(ref.name);
    reject_fluent_negatives(a.pre, "action " + a.name);
    Binding bind;
    if (!bind_params(a.params, ref.args, bind)) return;
    if (!statics_hold(a.pre, bind)) return;
    GroundActionRecord rec;
    rec.name = key;
    rec.pre = fluent_keys(a.pre.positive, bind, true);
    rec.add = fluent_keys(a.add, bind, false);
    rec.del = fluent_keys(a.del, bind, false);
    actions_.emplace(key, std::move(rec));
  }

  void ground_method(const MethodSchema& m, const std::string& task_key, const GroundTaskRef& ref,
                     std::deque<std::string>& queue) {
    reject_fluent_negatives(m.pre, "method " + m.name);
    if (m.task.args.size() != ref.args.size()) return;
    Binding bind;
    std::map<std::string, std::string> param_type;
    for (const auto& p : m.params) param_type[p.name] = p.type;
    for (std::size_t i = 0; i < ref.args.size(); ++i) {
      const std::string& t = m.task.args[i];
      if (!is_variable(t)) {
        if (t != ref.args[i]) return;
        continue;
      }
      auto it = bind.find(t);
      if (it != bind.end() && it->second != ref.args[i]) return;
      auto pt = param_type.find(t);
      if (pt == param_type.end()) throw ResolutionError("method " + m.name + " uses undeclared variable " + t);
      if (!is_subtype(object_type_.at(ref.args[i]), pt->second)) return;
      bind[t] = ref.args[i];
    }
    if (const TaskDecl* decl = d_.find_task(ref.name)) {
      if (decl->params.size() != ref.args.size()) return;
      for (std::size_t i = 0; i < ref.args.size(); ++i) {
        if (!is_subtype(object_type_.at(ref.args[i]), decl->params[i].type)) return;
      }
    }
    std::vector<const TypedName*> free;
    for (const auto& p : m.params) {
      if (!bind.count(p.name)) free.push_back(&p);
    }
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (!statics_hold(m.pre, bind)) return;
      if (i == free.size()) {
        emit_method(m, task_key, bind, queue);
        return;
      }
      for (const auto& o : objects_of(free[i]->type)) {
        bind[free[i]->name] = o;
        rec(i + 1);
      }
      bind.erase(free[i]->name);
    };
    rec(0);
  }

  void emit_method(const MethodSchema& m, const std::string& task_key, const Binding& bind,
                   std::deque<std::string>& queue) {
    GroundMethodRecord rec;
    std::vector<std::string> margs;
    for (const auto& p : m.params) margs.push_back(bind.at(p.name));
    rec.name = atom_key(m.name, margs);
    rec.task = task_key;
    for (const auto& st : m.network.subtasks) {
      auto args = ground_args(st.task, bind);
      if (!args) throw ResolutionError("unbound variable in subtask " + st.task.predicate + " of " + m.name);
      GroundTaskRef ref{st.task.predicate, *args};
      std::string key = ref.key();
      refs_.emplace(key, ref);
      rec.subtasks.push_back(key);
      queue.push_back(key);
    }
    rec.ordering = m.network.ordering;
    rec.pre = fluent_keys(m.pre.positive, bind, true);
    methods_.push_back(std::move(rec));
  }

  void add_goal(ProblemBuilder& b, const std::vector<NodeId>& root_nodes) {
    Binding none;
    reject_fluent_negatives(p_.goal, ":goal");
    TaskId goal_task = b.primitive("__goal");
    if (statics_hold(p_.goal, none)) {
      std::vector<PropId> pre;
      for (const auto& k : fluent_keys(p_.goal.positive, none, true)) pre.push_back(b.proposition(k));
      b.action("__goal", goal_task, make_set(std::move(pre)), {}, {}, true);
    }
    NodeId g = b.add_root(goal_task);
    for (NodeId r : root_nodes) b.order_roots(r, g);
  }

  const LiftedDomain& d_;
  const LiftedProblem& p_;
  std::map<std::string, std::string> object_type_;
  std::vector<std::string> objects_;
  std::map<std::string, std::vector<std::string>> by_type_;
  std::set<std::string> static_preds_;
  std::unordered_set<std::string> static_facts_;
  std::vector<std::string> init_fluents_;

  std::unordered_map<std::string, GroundTaskRef> refs_;
  std::unordered_set<std::string> seen_;
  std::vector<std::string> order_;
  std::map<std::string, GroundActionRecord> actions_;
  std::vector<GroundMethodRecord> methods_;
};

}  // namespace

GroundHtnProblem ground(const LiftedDomain& domain, const LiftedProblem& problem) {
  return Grounder(domain, problem).run();
}

}  // namespace lhtn
