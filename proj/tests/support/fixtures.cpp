#include "support/fixtures.hpp"

#include <stdexcept>

#include "lhtn/builder.hpp"
#include "lhtn/hddl.hpp"

namespace fixtures {

std::string data_path(const std::string& file) { return std::string(LHTN_TEST_DATA) + "/" + file; }

lhtn::GroundHtnProblem concurrent_example() {
  return lhtn::load_problem_files(data_path("concurrent-domain.hddl"), data_path("concurrent-problem.hddl"));
}

lhtn::GroundHtnProblem sequential_example() {
  return lhtn::load_problem_files(data_path("sequential-domain.hddl"), data_path("sequential-problem.hddl"));
}

lhtn::GroundHtnProblem decomposition_graph_example() {
  lhtn::ProblemBuilder b;
  auto T0 = b.compound("T0"), T1 = b.compound("T1"), T2 = b.compound("T2");
  auto t1 = b.primitive("t1"), t2 = b.primitive("t2"), t3 = b.primitive("t3"), t4 = b.primitive("t4");
  auto done = b.proposition("done");
  b.action("a(t1)", t1, {}, {done}, {});
  b.action("a(t2)", t2, {done}, {}, {});
  b.action("a(t3)", t3, {done}, {}, {});
  b.action("a(t4)", t4, {}, {}, {});
  b.method("M1", T0, {T1, t1, T2}, {{1, 0}});
  b.method("M2", T1, {t2}, {});
  b.method("M3", T1, {t3}, {});
  b.method("M4", T2, {t4}, {});
  b.add_root(T0);
  return lhtn::normalize(b.build());
}

lhtn::ActionId action(const lhtn::GroundHtnProblem& p, const std::string& name) {
  lhtn::ActionId a = p.find_action(name);
  if (a == lhtn::kNone) throw std::invalid_argument("no action " + name);
  return a;
}

}  // namespace fixtures
