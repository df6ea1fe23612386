#pragma once

#include <atomic>
#include <cstddef>
#include <optional>
#include <set>
#include <vector>

#include "lhtn/model.hpp"

namespace lhtn {

enum class SwitchMode {
  // Layers close only when the selected primitive task has no valid resolver
  // (or nothing outside the resolved set is trailing).
  Literal,
  // Additionally, closing a nonempty layer is always an available choice.
  Voluntary,
};

enum class Objective { FirstSolution, MinMakespan };

struct SearchConfig {
  SwitchMode mode = SwitchMode::Literal;
  Objective objective = Objective::FirstSolution;
  std::size_t node_limit = 2'000'000;
  double time_limit = 60.0;  // seconds; <= 0 disables
  // Upper bound on the layer count explored by min-makespan deepening.
  std::size_t max_makespan = 64;
  bool memoize = false;
  // Polled at every expansion; set by another search to cancel this one.
  const std::atomic<bool>* cancel = nullptr;
};

enum class SearchStatus { Solved, Unsolvable, ResourceExhausted };

const char* to_string(SearchStatus s);

struct SearchStats {
  std::size_t expansions = 0;
  std::size_t memo_hits = 0;
  double seconds = 0.0;
};

struct SearchResult {
  SearchStatus status = SearchStatus::Unsolvable;
  std::optional<LayeredPlan> plan;
  SearchStats stats;
};

/// Search node of the concurrent forward decomposition procedure.
struct SearchNode {
  TaskNetwork network;
  State state;
  std::vector<ActionLayer> layers;  // last entry is the open layer
  std::set<NodeId> resolved;        // nodes resolved in the open layer
  ProgressionTrace trace;

  const ActionLayer& current_layer() const { return layers.back(); }
};

SearchNode initial_node(const GroundHtnProblem& p);

/// Actions resolving the primitive task at `n` that are applicable in the
/// layer-start state and independent of every action of the open layer.
std::vector<ActionId> primitive_resolvers(const GroundHtnProblem& p, const SearchNode& node, NodeId n);
std::vector<MethodId> compound_resolvers(const GroundHtnProblem& p, const SearchNode& node, NodeId n);

// Node-level moves. Each validates its preconditions and throws ModelError.
void add_to_layer(const GroundHtnProblem& p, SearchNode& node, NodeId n, ActionId a);
void decompose(const GroundHtnProblem& p, SearchNode& node, NodeId n, MethodId m);
void switch_layer(const GroundHtnProblem& p, SearchNode& node);

/// Depth-first backtracking realization of the layered decomposition
/// procedure. The returned plan has dummy actions erased; its trace keeps them.
SearchResult cpfd_solve(const GroundHtnProblem& p, const SearchConfig& cfg);

struct EnumerationResult {
  // Distinct plans by erased layer content.
  std::set<std::vector<ActionLayer>> plans;
  bool complete = true;
  SearchStats stats;
};

/// Every plan the search can emit with at most `max_makespan` layers that
/// contain a non-dummy action.
EnumerationResult cpfd_enumerate(const GroundHtnProblem& p, const SearchConfig& cfg, std::size_t max_makespan);

/// Runs the configurations concurrently and returns the first solved result
/// (or the first result in configuration order when none solves). The others
/// are cancelled.
SearchResult solve_concurrently(const GroundHtnProblem& p, const std::vector<SearchConfig>& configs);

}  // namespace lhtn
