#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "lhtn/hddl.hpp"

namespace lhtn {

const ActionSchema* LiftedDomain::find_action(const std::string& n) const {
  for (const auto& a : actions) {
    if (a.name == n) return &a;
  }
  return nullptr;
}

const TaskDecl* LiftedDomain::find_task(const std::string& n) const {
  for (const auto& t : tasks) {
    if (t.name == n) return &t;
  }
  return nullptr;
}

bool LiftedDomain::has_type(const std::string& type) const {
  return type == "object" || type_parent.count(type) != 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

const SExpr& expect_list(const SExpr& e, const std::string& what) {
  if (!e.is_list) syntax_error(e, "expected " + what);
  return e;
}

const std::string& expect_atom(const SExpr& e, const std::string& what) {
  if (e.is_list) syntax_error(e, "expected " + what);
  return e.atom;
}

std::vector<TypedName> parse_typed_list(const SExpr& list) {
  expect_list(list, "typed list");
  std::vector<TypedName> out;
  std::size_t pending = 0;
  for (std::size_t i = 0; i < list.items.size(); ++i) {
    const SExpr& item = list.items[i];
    if (item.is("-")) {
      if (i + 1 >= list.items.size()) syntax_error(item, "missing type after '-'");
      const SExpr& type = list.items[++i];
      if (type.is_list) {
        if (type.head() == "either") throw UnsupportedFeature("either types");
        syntax_error(type, "expected type name");
      }
      for (std::size_t k = out.size() - pending; k < out.size(); ++k) out[k].type = type.atom;
      pending = 0;
      continue;
    }
    out.push_back({expect_atom(item, "name"), "object"});
    ++pending;
  }
  return out;
}

AtomSchema parse_atom(const SExpr& e) {
  expect_list(e, "atom");
  if (e.items.empty()) syntax_error(e, "empty atom");
  AtomSchema atom;
  atom.predicate = expect_atom(e.items.front(), "predicate name");
  for (std::size_t i = 1; i < e.items.size(); ++i) atom.args.push_back(expect_atom(e.items[i], "term"));
  return atom;
}

void parse_condition_into(const SExpr& e, ConditionSchema& out) {
  expect_list(e, "condition");
  if (e.items.empty()) return;
  const std::string& head = e.head();
  if (head == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) parse_condition_into(e.items[i], out);
    return;
  }
  if (head == "or" || head == "imply" || head == "forall" || head == "exists" || head == "when") {
    throw UnsupportedFeature("'" + head + "' in condition at " + std::to_string(e.line) + ":" +
                             std::to_string(e.column));
  }
  if (head == "=") {
    if (e.items.size() != 3) syntax_error(e, "'=' takes two terms");
    out.equal.emplace_back(expect_atom(e.items[1], "term"), expect_atom(e.items[2], "term"));
    return;
  }
  if (head == "not") {
    if (e.items.size() != 2) syntax_error(e, "'not' takes one argument");
    const SExpr& inner = expect_list(e.items[1], "negated atom");
    if (inner.head() == "=") {
      if (inner.items.size() != 3) syntax_error(inner, "'=' takes two terms");
      out.not_equal.emplace_back(expect_atom(inner.items[1], "term"), expect_atom(inner.items[2], "term"));
      return;
    }
    if (inner.head() == "and" || inner.head() == "or" || inner.head() == "not") {
      throw UnsupportedFeature("complex negated condition");
    }
    out.negative.push_back(parse_atom(inner));
    return;
  }
  if (head.empty()) syntax_error(e, "expected predicate name");
  out.positive.push_back(parse_atom(e));
}

ConditionSchema parse_condition(const SExpr& e) {
  ConditionSchema out;
  parse_condition_into(e, out);
  return out;
}

void parse_effect_into(const SExpr& e, ActionSchema& action) {
  expect_list(e, "effect");
  if (e.items.empty()) return;
  const std::string& head = e.head();
  if (head == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) parse_effect_into(e.items[i], action);
    return;
  }
  if (head == "forall" || head == "when" || head == "increase" || head == "decrease" || head == "assign") {
    throw UnsupportedFeature("'" + head + "' effect");
  }
  if (head == "not") {
    if (e.items.size() != 2) syntax_error(e, "'not' takes one argument");
    action.del.push_back(parse_atom(e.items[1]));
    return;
  }
  if (head.empty()) syntax_error(e, "expected predicate name");
  action.add.push_back(parse_atom(e));
}

std::vector<SubtaskSchema> parse_subtasks(const SExpr& e) {
  expect_list(e, "subtask list");
  std::vector<SubtaskSchema> out;
  if (e.items.empty()) return out;
  std::vector<const SExpr*> entries;
  if (e.head() == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) entries.push_back(&e.items[i]);
  } else {
    entries.push_back(&e);
  }
  for (const SExpr* entry : entries) {
    expect_list(*entry, "subtask");
    if (entry->items.size() == 2 && entry->items[0].is_atom() && entry->items[1].is_list) {
      out.push_back({entry->items[0].atom, parse_atom(entry->items[1])});
    } else {
      out.push_back({"", parse_atom(*entry)});
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_ordering(const SExpr& e) {
  expect_list(e, "ordering");
  std::vector<std::pair<std::string, std::string>> out;
  if (e.items.empty()) return out;
  std::vector<const SExpr*> entries;
  if (e.head() == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) entries.push_back(&e.items[i]);
  } else {
    entries.push_back(&e);
  }
  for (const SExpr* entry : entries) {
    expect_list(*entry, "ordering constraint");
    if (entry->items.size() != 3) syntax_error(*entry, "ordering constraint takes two labels");
    const std::string& op = expect_atom(entry->items[0], "'<' or '>'");
    const std::string& a = expect_atom(entry->items[1], "label");
    const std::string& b = expect_atom(entry->items[2], "label");
    if (op == "<") {
      out.emplace_back(a, b);
    } else if (op == ">") {
      out.emplace_back(b, a);
    } else {
      syntax_error(entry->items[0], "unsupported ordering operator '" + op + "'");
    }
  }
  return out;
}

// Fills `net` from the keyword arguments of a :method or :htn block.
void parse_network_keywords(const SExpr& block, std::size_t start, NetworkSchema& net, bool& saw_tasks,
                            std::function<bool(const std::string&, const SExpr&)> other) {
  std::vector<std::pair<std::string, std::string>> ordering;
  const SExpr* ordering_at = nullptr;
  bool total = false;
  for (std::size_t i = start; i < block.items.size(); i += 2) {
    const SExpr& key = block.items[i];
    const std::string& k = expect_atom(key, "keyword");
    if (i + 1 >= block.items.size()) syntax_error(key, "missing value for " + k);
    const SExpr& value = block.items[i + 1];
    if (k == ":subtasks" || k == ":tasks" || k == ":ordered-subtasks" || k == ":ordered-tasks") {
      net.subtasks = parse_subtasks(value);
      total = (k == ":ordered-subtasks" || k == ":ordered-tasks");
      saw_tasks = true;
    } else if (k == ":ordering") {
      ordering = parse_ordering(value);
      ordering_at = &value;
    } else if (k == ":constraints") {
      if (value.is_list && !value.items.empty()) throw UnsupportedFeature("method :constraints");
    } else if (!other(k, value)) {
      syntax_error(key, "unexpected keyword " + k);
    }
  }
  if (total) {
    for (std::size_t i = 0; i + 1 < net.subtasks.size(); ++i) net.ordering.emplace_back(i, i + 1);
    if (!ordering.empty()) syntax_error(*ordering_at, ":ordering combined with ordered subtasks");
    return;
  }
  std::map<std::string, std::size_t> label_index;
  for (std::size_t i = 0; i < net.subtasks.size(); ++i) {
    if (!net.subtasks[i].label.empty()) label_index[net.subtasks[i].label] = i;
  }
  for (const auto& [a, b] : ordering) {
    auto ia = label_index.find(a);
    auto ib = label_index.find(b);
    if (ia == label_index.end() || ib == label_index.end()) {
      syntax_error(*ordering_at, "ordering references unknown subtask label '" +
                                     (ia == label_index.end() ? a : b) + "'");
    }
    net.ordering.emplace_back(ia->second, ib->second);
  }
  // Reject cycles with a witness path.
  std::size_t n = net.subtasks.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (auto [a, b] : net.ordering) succ[a].push_back(b);
  std::vector<int> color(n, 0);
  std::vector<std::size_t> path;
  std::function<bool(std::size_t)> dfs = [&](std::size_t v) {
    color[v] = 1;
    path.push_back(v);
    for (std::size_t w : succ[v]) {
      if (color[w] == 1) {
        path.push_back(w);
        return true;
      }
      if (color[w] == 0 && dfs(w)) return true;
    }
    color[v] = 2;
    path.pop_back();
    return false;
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (color[v] == 0 && dfs(v)) {
      std::size_t start_at = 0;
      while (path[start_at] != path.back()) ++start_at;
      std::string witness;
      for (std::size_t k = start_at; k < path.size(); ++k) {
        if (!witness.empty()) witness += " < ";
        const auto& st = net.subtasks[path[k]];
        witness += st.label.empty() ? st.task.predicate : st.label;
      }
      syntax_error(ordering_at ? *ordering_at : block, "ordering cycle: " + witness);
    }
  }
}

std::vector<TypedName> parse_parameters(const SExpr& value) { return parse_typed_list(value); }

const SExpr& top_define(const std::vector<SExpr>& all, std::string_view text_kind) {
  if (all.empty()) throw ParseError(1, 1, std::string("empty ") + std::string(text_kind) + " file");
  if (all.size() > 1) syntax_error(all[1], "trailing content after define");
  const SExpr& def = all.front();
  if (!def.is_list || def.head() != "define") syntax_error(def, "expected (define ...)");
  if (def.items.size() < 2 || !def.items[1].is_list || def.items[1].items.size() != 2) {
    syntax_error(def, std::string("expected (") + std::string(text_kind) + " name)");
  }
  if (!def.items[1].items[0].is(text_kind)) {
    syntax_error(def.items[1], std::string("expected (") + std::string(text_kind) + " name)");
  }
  return def;
}

}  // namespace

LiftedDomain parse_domain(std::string_view text) {
  auto all = parse_sexprs(text);
  const SExpr& def = top_define(all, "domain");
  LiftedDomain d;
  d.name = expect_atom(def.items[1].items[1], "domain name");
  for (std::size_t s = 2; s < def.items.size(); ++s) {
    const SExpr& sec = expect_list(def.items[s], "domain section");
    const std::string& head = sec.head();
    if (head == ":requirements") {
      for (std::size_t i = 1; i < sec.items.size(); ++i) d.requirements.push_back(expect_atom(sec.items[i], "requirement"));
    } else if (head == ":types") {
      SExpr rest = sec;
      rest.items.erase(rest.items.begin());
      for (auto& t : parse_typed_list(rest)) {
        if (t.name != "object") d.type_parent[t.name] = t.type;
      }
    } else if (head == ":constants") {
      SExpr rest = sec;
      rest.items.erase(rest.items.begin());
      d.constants = parse_typed_list(rest);
    } else if (head == ":predicates") {
      for (std::size_t i = 1; i < sec.items.size(); ++i) {
        const SExpr& p = expect_list(sec.items[i], "predicate declaration");
        if (p.items.empty()) syntax_error(p, "empty predicate declaration");
        SExpr params = p;
        params.items.erase(params.items.begin());
        d.predicates.push_back({expect_atom(p.items[0], "predicate name"), parse_typed_list(params)});
      }
    } else if (head == ":task") {
      if (sec.items.size() < 2) syntax_error(sec, "task without name");
      TaskDecl t{expect_atom(sec.items[1], "task name"), {}};
      for (std::size_t i = 2; i + 1 < sec.items.size(); i += 2) {
        if (sec.items[i].is(":parameters")) {
          t.params = parse_parameters(sec.items[i + 1]);
        } else {
          syntax_error(sec.items[i], "unexpected keyword in :task");
        }
      }
      d.tasks.push_back(std::move(t));
    } else if (head == ":action") {
      if (sec.items.size() < 2) syntax_error(sec, "action without name");
      ActionSchema a;
      a.name = expect_atom(sec.items[1], "action name");
      for (std::size_t i = 2; i < sec.items.size(); i += 2) {
        const std::string& k = expect_atom(sec.items[i], "keyword");
        if (i + 1 >= sec.items.size()) syntax_error(sec.items[i], "missing value for " + k);
        const SExpr& v = sec.items[i + 1];
        if (k == ":parameters") {
          a.params = parse_parameters(v);
        } else if (k == ":precondition") {
          a.pre = parse_condition(v);
        } else if (k == ":effect") {
          parse_effect_into(v, a);
        } else {
          syntax_error(sec.items[i], "unexpected keyword " + k + " in :action");
        }
      }
      d.actions.push_back(std::move(a));
    } else if (head == ":method") {
      if (sec.items.size() < 2) syntax_error(sec, "method without name");
      MethodSchema m;
      m.name = expect_atom(sec.items[1], "method name");
      bool saw_task = false;
      bool saw_tasks = false;
      parse_network_keywords(sec, 2, m.network, saw_tasks, [&](const std::string& k, const SExpr& v) {
        if (k == ":parameters") {
          m.params = parse_parameters(v);
        } else if (k == ":task") {
          m.task = parse_atom(v);
          saw_task = true;
        } else if (k == ":precondition") {
          m.pre = parse_condition(v);
        } else {
          return false;
        }
        return true;
      });
      if (!saw_task) syntax_error(sec, "method " + m.name + " has no :task");
      d.methods.push_back(std::move(m));
    } else if (head == ":functions" || head == ":durative-action" || head == ":derived" || head == ":process" ||
               head == ":event") {
      throw UnsupportedFeature(head + " section");
    } else {
      syntax_error(sec, "unknown domain section '" + head + "'");
    }
  }
  // Declared-name checks.
  for (const auto& m : d.methods) {
    if (!d.find_task(m.task.predicate)) {
      throw ResolutionError("method " + m.name + " decomposes undeclared task " + m.task.predicate);
    }
    for (const auto& st : m.network.subtasks) {
      if (!d.find_task(st.task.predicate) && !d.find_action(st.task.predicate)) {
        throw ResolutionError("method " + m.name + " references undeclared task " + st.task.predicate);
      }
    }
  }
  return d;
}

LiftedProblem parse_problem(std::string_view text) {
  auto all = parse_sexprs(text);
  const SExpr& def = top_define(all, "problem");
  LiftedProblem p;
  p.name = expect_atom(def.items[1].items[1], "problem name");
  for (std::size_t s = 2; s < def.items.size(); ++s) {
    const SExpr& sec = expect_list(def.items[s], "problem section");
    const std::string& head = sec.head();
    if (head == ":domain") {
      if (sec.items.size() != 2) syntax_error(sec, "expected (:domain name)");
      p.domain = expect_atom(sec.items[1], "domain name");
    } else if (head == ":requirements") {
      continue;
    } else if (head == ":objects") {
      SExpr rest = sec;
      rest.items.erase(rest.items.begin());
      p.objects = parse_typed_list(rest);
    } else if (head == ":init") {
      for (std::size_t i = 1; i < sec.items.size(); ++i) {
        const SExpr& f = sec.items[i];
        if (f.head() == "=") throw UnsupportedFeature("numeric fluents in :init");
        if (f.head() == "not") syntax_error(f, "negative literal in :init");
        p.init.push_back(parse_atom(f));
      }
    } else if (head == ":htn") {
      bool saw_tasks = false;
      parse_network_keywords(sec, 1, p.network, saw_tasks, [&](const std::string& k, const SExpr& v) {
        if (k == ":parameters") {
          if (v.is_list && !v.items.empty()) throw UnsupportedFeature(":htn parameters");
          return true;
        }
        return false;
      });
    } else if (head == ":goal") {
      if (sec.items.size() != 2) syntax_error(sec, "expected (:goal condition)");
      p.goal = parse_condition(sec.items[1]);
    } else if (head == ":metric" || head == ":constraints") {
      throw UnsupportedFeature(head + " in problem");
    } else {
      syntax_error(sec, "unknown problem section '" + head + "'");
    }
  }
  return p;
}

GroundHtnProblem load_problem(std::string_view domain_text, std::string_view problem_text) {
  return normalize(ground(parse_domain(domain_text), parse_problem(problem_text)));
}

GroundHtnProblem load_problem_files(const std::string& domain_path, const std::string& problem_path) {
  return load_problem(read_file(domain_path), read_file(problem_path));
}

}  // namespace lhtn
