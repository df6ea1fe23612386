#pragma once

#include <cstdint>
#include <random>

#include "lhtn/model.hpp"

namespace gen {

struct Params {
  int max_props = 6;
  int max_actions = 6;
  int max_methods = 4;
  int max_subtasks = 3;
  bool totally_ordered = false;
  double order_probability = 0.3;
  double method_pre_probability = 0.2;
};

// Random recursion-free HTN problem, normalized. Compound task i only refers
// to compound tasks j > i, so every decomposition chain terminates.
lhtn::GroundHtnProblem random_problem(std::mt19937& rng, const Params& params = {});

}  // namespace gen
