#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lhtn/model.hpp"

namespace lhtn {

struct ClassicalProblem {
  std::vector<std::string> propositions;
  std::vector<ConditionalAction> actions;
  State init;
  PropSet goal;

  // Name lookup for actions; filled by index().
  std::unordered_map<std::string, std::uint32_t> action_index;
  void index();
};

struct ClassicalPlan {
  std::vector<std::uint32_t> actions;
};

bool applicable(const State& s, const ConditionalAction& a);
// ADL semantics: all effect conditions are tested against `s`; adds win.
State execute(const State& s, const ConditionalAction& a);

/// Executes the plan from the initial state; nullopt if some step is
/// inapplicable. Goal satisfaction is not checked.
std::optional<State> replay(const ClassicalProblem& p, const ClassicalPlan& plan);
bool is_valid_plan(const ClassicalProblem& p, const ClassicalPlan& plan);

struct SolverLimits {
  std::size_t max_expansions = 5'000'000;
  double time_limit = 120.0;  // seconds; <= 0 disables
};

enum class SolveStatus { Solved, Unsolvable, ResourceExhausted };

const char* to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::Unsolvable;
  ClassicalPlan plan;
  std::size_t expanded = 0;
  std::size_t generated = 0;
  double seconds = 0.0;
};

/// Breadth-first search with duplicate detection over bit-set states;
/// returns a plan of minimal length.
SolveResult solve_bfs(const ClassicalProblem& p, const SolverLimits& limits = {});

/// Greedy best-first search on the number of unsatisfied goals. Ties prefer
/// states reached by non-switch actions. Not optimal.
SolveResult solve_greedy(const ClassicalProblem& p, const SolverLimits& limits = {});

/// Reads a plan written by an external planner: one action per line,
/// `(name arg ...)` or `name arg ...`, `;` comments ignored, case-insensitive.
/// Throws std::runtime_error naming the first unknown action.
ClassicalPlan read_plan(std::istream& in, const ClassicalProblem& p);
void write_plan(std::ostream& out, const ClassicalPlan& plan, const ClassicalProblem& p);

}  // namespace lhtn
