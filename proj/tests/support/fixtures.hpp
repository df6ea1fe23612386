#pragma once

#include <string>

#include "lhtn/model.hpp"

namespace fixtures {

std::string data_path(const std::string& file);

// Three unordered primitive tasks under T0; init {p2}.
// t1: add p1.  t2: pre p1, p2.  t3: pre p2 (concurrent) or del p2 (sequential).
lhtn::GroundHtnProblem concurrent_example();
lhtn::GroundHtnProblem sequential_example();

// T0 -> M1 (T1, t1, T2 with t1 before T1); T1 -> M2 (t2) | M3 (t3);
// T2 -> M4 (t4). Normalized.
lhtn::GroundHtnProblem decomposition_graph_example();

lhtn::ActionId action(const lhtn::GroundHtnProblem& p, const std::string& name);

}  // namespace fixtures
