#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lhtn/classical.hpp"
#include "lhtn/model.hpp"

namespace lhtn {

using Holder = std::uint32_t;

enum class EffectsMode {
  Conditional,   // one switch action with `when` effects
  CompiledAway,  // 2^b unconditional switch variants with negative preconditions
};

struct EncodingConfig {
  std::uint32_t bound = 4;  // number of taskholders
  EffectsMode effects = EffectsMode::Conditional;
  std::uint32_t compile_threshold = 10;
};

class EncodingError : public std::runtime_error {
 public:
  enum class Kind { ZeroBound, NotNormalized, NonCrescentAssignment, NotEnoughHolders, CompileThresholdExceeded };
  EncodingError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class OriginKind { Compound, Primitive, Switch };

struct EncodedOrigin {
  OriginKind kind = OriginKind::Switch;
  std::uint32_t source = kNone;  // method id, action id, or switch variant mask
  std::vector<Holder> holders;   // (h1, h2..hk) for methods, (h) for actions
};

struct EncodingStats {
  std::size_t propositions = 0;
  std::size_t operators = 0;
  std::size_t compound = 0;
  std::size_t primitive = 0;
  std::size_t switches = 0;
};

// PDDL identifiers for the source problem's objects.
struct PddlNames {
  std::vector<std::string> tasks;
  std::vector<std::string> actions;
  std::vector<std::string> fluents;  // 0-ary predicates for source propositions
  std::vector<std::string> methods;  // a_m schema names
  std::vector<std::string> primitives;  // a_p schema names
  std::vector<std::string> holders;
};

struct CthdEncoding {
  ClassicalProblem problem;
  std::uint32_t holder_count = 0;
  EffectsMode effects = EffectsMode::Conditional;
  std::vector<EncodedOrigin> origin;  // indexed by encoded action id
  EncodingStats stats;
  GroundHtnProblem source;
  PddlNames names;
  std::unordered_map<std::string, PropId> prop_index;

  PropId prop(const std::string& name) const { return prop_index.at(name); }
};

// --- taskholder assignments ------------------------------------------------

/// Strictly increasing tuples of `count` holders drawn from 0..b-1 without
/// `h1`, in lexicographic order.
std::vector<std::vector<Holder>> crescent_assignments(std::uint32_t b, Holder h1, std::uint32_t count);
/// Ordered tuples of distinct holders without `h1` (the count an encoding
/// without the stack discipline would ground).
std::vector<std::vector<Holder>> unordered_assignments(std::uint32_t b, Holder h1, std::uint32_t count);

/// Sum over h1 of C(b-1, count).
std::uint64_t crescent_count(std::uint32_t b, std::uint32_t count);
/// Sum over h1 of P(b-1, count).
std::uint64_t unordered_count(std::uint32_t b, std::uint32_t count);

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

// --- encoding --------------------------------------------------------------

/// Propositions of the encoding itself (not_constraint, prec_th, empty,
/// resolved, in, not_planned) as PDDL atom names, in generation order.
std::vector<std::string> encode_propositions(const GroundHtnProblem& p, std::uint32_t b);

/// Actions of the dependent set of `a` plus those adding one of its
/// preconditions. Resolving `a` requires none of them planned in the open
/// layer.
std::vector<ActionId> blocking_actions(const GroundHtnProblem& p, ActionId a);

/// `p` must be normalized. Throws EncodingError.
CthdEncoding encode(const GroundHtnProblem& p, const EncodingConfig& cfg);

/// Single encoded actions, for inspection. `assignment` is (h1, h2..hk).
ConditionalAction encode_method(const CthdEncoding& enc, MethodId m, const std::vector<Holder>& assignment);
ConditionalAction encode_primitive(const CthdEncoding& enc, ActionId a, Holder h);
std::vector<ConditionalAction> encode_switch(const CthdEncoding& enc);

/// Number of new holders a method needs (subtasks minus its last task).
std::uint32_t new_holders(const Method& m);

/// Subtask local ids of `m` in holder order: non-last nodes ascending, the
/// last node is not included.
std::vector<NodeId> holder_order(const Method& m);

}  // namespace lhtn
