#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lhtn/model.hpp"
#include "lhtn/sexpr.hpp"

namespace lhtn {

struct TypedName {
  std::string name;
  std::string type = "object";
};

// Arguments are variables (leading '?') or constants.
struct AtomSchema {
  std::string predicate;
  std::vector<std::string> args;
};

struct ConditionSchema {
  std::vector<AtomSchema> positive;
  std::vector<AtomSchema> negative;
  std::vector<std::pair<std::string, std::string>> equal;
  std::vector<std::pair<std::string, std::string>> not_equal;

  bool empty() const { return positive.empty() && negative.empty() && equal.empty() && not_equal.empty(); }
};

struct PredicateDecl {
  std::string name;
  std::vector<TypedName> params;
};

struct TaskDecl {
  std::string name;
  std::vector<TypedName> params;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> params;
  ConditionSchema pre;
  std::vector<AtomSchema> add;
  std::vector<AtomSchema> del;
};

struct SubtaskSchema {
  std::string label;
  AtomSchema task;
};

// Task list with ordering constraints expressed over subtask positions.
struct NetworkSchema {
  std::vector<SubtaskSchema> subtasks;
  std::vector<std::pair<std::size_t, std::size_t>> ordering;
};

struct MethodSchema {
  std::string name;
  std::vector<TypedName> params;
  AtomSchema task;
  ConditionSchema pre;
  NetworkSchema network;
};

struct LiftedDomain {
  std::string name;
  std::vector<std::string> requirements;
  std::map<std::string, std::string> type_parent;  // type -> supertype
  std::vector<TypedName> constants;
  std::vector<PredicateDecl> predicates;
  std::vector<TaskDecl> tasks;
  std::vector<ActionSchema> actions;
  std::vector<MethodSchema> methods;

  const ActionSchema* find_action(const std::string& name) const;
  const TaskDecl* find_task(const std::string& name) const;
  bool has_type(const std::string& type) const;
};

struct LiftedProblem {
  std::string name;
  std::string domain;
  std::vector<TypedName> objects;
  std::vector<AtomSchema> init;
  NetworkSchema network;
  ConditionSchema goal;
};

LiftedDomain parse_domain(std::string_view text);
LiftedProblem parse_problem(std::string_view text);

/// Typed instantiation of the lifted input into a ground problem. Static
/// facts are compiled out, statically false instances dropped, and tasks and
/// methods that cannot be decomposed down to actions, or that are
/// unreachable from the initial network, are pruned. A state goal, if
/// present, becomes a dummy action ordered after the whole initial network.
GroundHtnProblem ground(const LiftedDomain& domain, const LiftedProblem& problem);

/// Enforces a single root node, a unique last node per method, and
/// precondition-free methods, using dummy tasks and actions.
GroundHtnProblem normalize(const GroundHtnProblem& problem);

bool is_normalized(const GroundHtnProblem& problem);

// Convenience: parse + ground + normalize.
GroundHtnProblem load_problem(std::string_view domain_text, std::string_view problem_text);
GroundHtnProblem load_problem_files(const std::string& domain_path, const std::string& problem_path);

std::string read_file(const std::string& path);

}  // namespace lhtn
