#pragma once

#include <string>
#include <string_view>

#include "lhtn/classical.hpp"
#include "lhtn/encoder.hpp"

namespace lhtn {

struct PddlText {
  std::string domain;
  std::string problem;
};

/// Lifted PDDL for an encoding. Taskholders, tasks and actions are domain
/// constants; source propositions become 0-ary predicates. Declarations come
/// out in id order, so equal encodings give byte-identical text.
PddlText write_pddl(const CthdEncoding& enc, const std::string& name = "cthd");

/// Parses and grounds a STRIPS/ADL domain and problem: typing, equality,
/// negative preconditions, conjunctive preconditions, `forall`/`when`
/// effects. Static predicates are evaluated during grounding and dropped
/// from preconditions. Ground action names are `(schema arg ...)`.
/// Throws ParseError, UnsupportedFeature or ResolutionError.
ClassicalProblem read_pddl(std::string_view domain, std::string_view problem);

/// Number of objects (constants included) of the given type in a parsed pair.
std::size_t count_objects(std::string_view domain, std::string_view problem, const std::string& type);

/// Name-based canonical text of a classical problem: the sorted action list
/// with sorted condition/effect names, then init and goal. Proposition ids,
/// declaration order and the layer-switch flag do not take part. Actions
/// with a precondition that is false initially and added by no action are
/// omitted, matching the reader's static pruning.
std::string canonical_form(const ClassicalProblem& p);

}  // namespace lhtn
