#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lhtn/classical.hpp"
#include "lhtn/encoder.hpp"
#include "lhtn/model.hpp"

namespace lhtn {

class UnknownAction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a classical plan over an encoding back as a layered plan. Layer
/// switches close the open layer; empty layers are dropped; dummy actions
/// are erased from the layers but kept in the trace.
LayeredPlan decode(const ClassicalPlan& plan, const CthdEncoding& enc);

enum class VerdictCode {
  Valid,
  MissingTrace,
  UnknownNode,
  NotTrailing,
  WrongTask,
  NotPrimitive,
  NotCompound,
  Inapplicable,
  NotIndependent,
  DuplicateAction,
  EmptyLayer,
  UnresolvedTasks,
  LayerMismatch,
};

const char* to_string(VerdictCode c);

struct Verdict {
  VerdictCode code = VerdictCode::Valid;
  std::string reason;
  std::size_t step = 0;  // trace index of the failing step

  bool valid() const { return code == VerdictCode::Valid; }
};

/// Replays the plan's trace from the problem's initial network and state.
/// Checks every decomposition and resolution, per-layer independence and
/// applicability in the layer's start state, that every task gets resolved,
/// and that the plan's layers equal the trace's layers with dummies erased.
Verdict validate(const GroundHtnProblem& p, const LayeredPlan& plan);

struct OracleLimits {
  std::size_t max_layers = 4;       // layers holding a non-dummy action
  std::size_t max_nodes = 64;       // task network size, resolved nodes included
  std::size_t max_states = 2'000'000;
  bool stop_at_first = false;
};

struct OracleResult {
  std::set<std::vector<ActionLayer>> plans;  // dummy-erased layer sequences
  bool complete = true;                      // false if max_states was hit
  std::size_t states = 0;
  std::optional<std::size_t> min_makespan() const;
};

/// Brute-force enumeration straight from the progression semantics: at each
/// point either decompose a trailing compound node, or close a layer made of
/// any nonempty set of trailing primitive nodes with any assignment of
/// resolvers that are applicable, distinct and pairwise independent.
OracleResult oracle_enumerate(const GroundHtnProblem& p, const OracleLimits& limits);

/// Largest task network reachable by decompositions alone, resolved nodes
/// counted (the holder count an encoding needs to be complete). nullopt if
/// it exceeds `cap`.
std::optional<std::size_t> max_network_size(const GroundHtnProblem& p, std::size_t cap);

enum class ClassicalSearch { Bfs, Greedy };

struct RoundTripConfig {
  EncodingConfig encoding;
  std::optional<std::pair<std::uint32_t, std::uint32_t>> deepen;  // bound range
  ClassicalSearch search = ClassicalSearch::Bfs;
  SolverLimits limits;
};

struct RoundTripResult {
  SolveStatus status = SolveStatus::Unsolvable;
  std::uint32_t bound = 0;
  std::optional<LayeredPlan> plan;
  std::optional<Verdict> verdict;
  EncodingStats stats;
  std::size_t classical_length = 0;
  double encode_seconds = 0.0;
  double search_seconds = 0.0;
};

/// Encodes, solves with the built-in planner, decodes and validates. With
/// `deepen` set, bounds are tried in increasing order until one is solvable.
RoundTripResult round_trip(const GroundHtnProblem& p, const RoundTripConfig& cfg);

}  // namespace lhtn
