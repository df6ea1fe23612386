#include "lhtn/pddl.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "lhtn/sexpr.hpp"

namespace lhtn {

namespace {

// --- writer ----------------------------------------------------------------

std::string lit(const std::string& pred, std::initializer_list<std::string> args) {
  std::string s = "(" + pred;
  for (const auto& a : args) s += " " + a;
  return s + ")";
}

std::string neg(const std::string& l) { return "(not " + l + ")"; }

// Conjunction keeping first-occurrence order and dropping repeats.
class Conj {
 public:
  void add(std::string s) {
    if (seen_.insert(s).second) items_.push_back(std::move(s));
  }
  std::string str(const std::string& indent) const {
    if (items_.empty()) return "(and)";
    std::string out = "(and";
    for (const auto& s : items_) out += "\n" + indent + "  " + s;
    return out + ")";
  }

 private:
  std::vector<std::string> items_;
  std::set<std::string> seen_;
};

std::string fluent(const CthdEncoding& enc, PropId q) { return "(" + enc.names.fluents[q] + ")"; }

std::string method_schema(const CthdEncoding& enc, const Method& m) {
  const auto& n = enc.names;
  const std::uint32_t b = enc.holder_count;
  std::vector<NodeId> order = holder_order(m);
  auto var = [](std::size_t j) { return "?h" + std::to_string(j + 1); };
  std::map<NodeId, std::string> holder_of{{m.last_node, var(0)}};
  for (std::size_t j = 0; j < order.size(); ++j) holder_of[order[j]] = var(j + 1);

  std::string params;
  for (std::size_t j = 0; j <= order.size(); ++j) params += (j ? " " : "") + var(j);
  Conj pre, eff;
  pre.add(lit("in", {n.tasks[m.task], var(0)}));
  for (std::uint32_t i = 0; i < b; ++i) pre.add(lit("not_constraint", {n.holders[i], var(0)}));
  for (std::size_t j = 1; j <= order.size(); ++j) {
    if (j > 1) pre.add(lit("prec_th", {var(j - 1), var(j)}));
    pre.add(neg(lit("=", {var(0), var(j)})));
    pre.add(lit("empty", {var(j)}));
  }
  eff.add(neg(lit("in", {n.tasks[m.task], var(0)})));
  for (NodeId node : m.network.nodes()) eff.add(lit("in", {n.tasks[m.network.task_of(node)], holder_of[node]}));
  for (std::size_t j = 1; j <= order.size(); ++j) {
    eff.add(neg(lit("empty", {var(j)})));
    eff.add(neg(lit("not_constraint", {var(j), var(0)})));
  }
  for (auto [u, v] : m.network.edges()) eff.add(neg(lit("not_constraint", {holder_of[u], holder_of[v]})));

  std::ostringstream out;
  out << "  ; " << m.name << "\n";
  out << "  (:action " << n.methods[m.id] << "\n";
  out << "    :parameters (" << params << " - taskholder)\n";
  out << "    :precondition " << pre.str("    ") << "\n";
  out << "    :effect " << eff.str("    ") << ")\n";
  return out.str();
}

std::string primitive_schema(const CthdEncoding& enc, const GroundAction& a) {
  const auto& n = enc.names;
  Conj pre, eff;
  for (PropId q : a.pre) pre.add(fluent(enc, q));
  pre.add(lit("in", {n.tasks[a.task], "?h"}));
  for (std::uint32_t i = 0; i < enc.holder_count; ++i) pre.add(lit("not_constraint", {n.holders[i], "?h"}));
  for (ActionId x : blocking_actions(enc.source, a.id)) pre.add(lit("not_planned", {n.actions[x]}));
  for (PropId q : a.add) eff.add(fluent(enc, q));
  eff.add(lit("resolved", {"?h"}));
  for (PropId q : a.del) eff.add(neg(fluent(enc, q)));
  eff.add(neg(lit("not_planned", {n.actions[a.id]})));
  eff.add(neg(lit("in", {n.tasks[a.task], "?h"})));

  std::ostringstream out;
  out << "  ; " << a.name << "\n";
  out << "  (:action " << n.primitives[a.id] << "\n";
  out << "    :parameters (?h - taskholder)\n";
  out << "    :precondition " << pre.str("    ") << "\n";
  out << "    :effect " << eff.str("    ") << ")\n";
  return out.str();
}

std::string switch_schemas(const CthdEncoding& enc) {
  const auto& n = enc.names;
  const std::uint32_t b = enc.holder_count;
  std::ostringstream out;
  if (enc.effects == EffectsMode::Conditional) {
    Conj eff, release;
    for (const auto& a : n.actions) eff.add(lit("not_planned", {a}));
    release.add(neg(lit("resolved", {"?h"})));
    release.add(lit("empty", {"?h"}));
    for (std::uint32_t i = 0; i < b; ++i) release.add(lit("not_constraint", {"?h", n.holders[i]}));
    eff.add("(forall (?h - taskholder)\n        (when (resolved ?h) " + release.str("        ") + "))");
    out << "  (:action switch\n";
    out << "    :parameters ()\n";
    out << "    :precondition (and)\n";
    out << "    :effect " << eff.str("    ") << ")\n";
    return out.str();
  }
  for (std::uint32_t mask = 0; mask < (1u << b); ++mask) {
    Conj pre, eff;
    for (const auto& a : n.actions) eff.add(lit("not_planned", {a}));
    for (std::uint32_t h = 0; h < b; ++h) {
      std::string r = lit("resolved", {n.holders[h]});
      if (mask & (1u << h)) {
        pre.add(r);
        eff.add(neg(r));
        eff.add(lit("empty", {n.holders[h]}));
        for (std::uint32_t i = 0; i < b; ++i) eff.add(lit("not_constraint", {n.holders[h], n.holders[i]}));
      } else {
        pre.add(neg(r));
      }
    }
    out << "  (:action switch-" << mask << "\n";
    out << "    :parameters ()\n";
    out << "    :precondition " << pre.str("    ") << "\n";
    out << "    :effect " << eff.str("    ") << ")\n";
  }
  return out.str();
}

}  // namespace

PddlText write_pddl(const CthdEncoding& enc, const std::string& name) {
  const auto& n = enc.names;
  const bool conditional = enc.effects == EffectsMode::Conditional;
  std::ostringstream d;
  d << "(define (domain " << name << ")\n";
  d << "  (:requirements :strips :typing :equality :negative-preconditions"
    << (conditional ? " :conditional-effects" : "") << ")\n";
  d << "  (:types taskholder task action)\n";
  d << "  (:constants";
  auto constants = [&](const std::vector<std::string>& names, const char* type) {
    if (names.empty()) return;
    d << "\n   ";
    for (const auto& c : names) d << " " << c;
    d << " - " << type;
  };
  constants(n.holders, "taskholder");
  constants(n.tasks, "task");
  constants(n.actions, "action");
  d << ")\n";
  d << "  (:predicates\n";
  d << "    (not_constraint ?x ?y - taskholder)\n";
  d << "    (prec_th ?x ?y - taskholder)\n";
  d << "    (empty ?x - taskholder)\n";
  d << "    (resolved ?x - taskholder)\n";
  d << "    (in ?t - task ?x - taskholder)\n";
  d << "    (not_planned ?a - action)";
  for (const auto& f : n.fluents) d << "\n    (" << f << ")";
  d << ")\n";
  for (const Method& m : enc.source.methods) d << "\n" << method_schema(enc, m);
  for (const GroundAction& a : enc.source.actions) d << "\n" << primitive_schema(enc, a);
  d << "\n" << switch_schemas(enc);
  d << ")\n";

  std::ostringstream p;
  p << "(define (problem " << name << "-problem)\n";
  p << "  (:domain " << name << ")\n";
  p << "  (:init";
  for (PropId q : enc.problem.init) p << "\n    " << enc.problem.propositions[q];
  p << ")\n";
  p << "  (:goal (and";
  for (PropId q : enc.problem.goal) p << "\n    " << enc.problem.propositions[q];
  p << ")))\n";
  return {d.str(), p.str()};
}

// --- reader ----------------------------------------------------------------

namespace {

struct Schema {
  std::string name;
  std::vector<std::pair<std::string, std::string>> params;  // (var, type)
  const SExpr* pre = nullptr;
  const SExpr* eff = nullptr;
};

struct Domain {
  std::shared_ptr<const SExpr> tree;  // schemas point into it
  std::string name;
  std::map<std::string, std::string> type_parent;
  std::vector<std::pair<std::string, std::string>> objects;  // constants, then problem objects
  std::map<std::string, std::size_t> arity;
  std::vector<Schema> schemas;
};

const SExpr& list_at(const SExpr& e, std::size_t i, const std::string& what) {
  if (!e.is_list || i >= e.items.size()) syntax_error(e, "expected " + what);
  return e.items[i];
}

std::vector<std::pair<std::string, std::string>> typed_list(const SExpr& list, std::size_t from = 0) {
  if (!list.is_list) syntax_error(list, "expected typed list");
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t pending = 0;
  for (std::size_t i = from; i < list.items.size(); ++i) {
    const SExpr& item = list.items[i];
    if (item.is("-")) {
      if (i + 1 >= list.items.size()) syntax_error(item, "missing type after '-'");
      const SExpr& type = list.items[++i];
      if (type.is_list) throw UnsupportedFeature("either types");
      for (std::size_t k = out.size() - pending; k < out.size(); ++k) out[k].second = type.atom;
      pending = 0;
      continue;
    }
    if (item.is_list) syntax_error(item, "expected name");
    out.emplace_back(item.atom, "object");
    ++pending;
  }
  return out;
}

bool is_subtype(const Domain& d, std::string type, const std::string& of) {
  for (int guard = 0; guard < 64; ++guard) {
    if (type == of) return true;
    auto it = d.type_parent.find(type);
    if (it == d.type_parent.end()) return of == "object";
    type = it->second;
  }
  return false;
}

std::vector<std::string> objects_of(const Domain& d, const std::string& type) {
  std::vector<std::string> out;
  for (const auto& [name, t] : d.objects) {
    if (is_subtype(d, t, type)) out.push_back(name);
  }
  return out;
}

void collect_effect_predicates(const SExpr& e, std::set<std::string>& out) {
  if (!e.is_list || e.items.empty()) return;
  const std::string& h = e.head();
  if (h == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) collect_effect_predicates(e.items[i], out);
  } else if (h == "not") {
    collect_effect_predicates(list_at(e, 1, "literal"), out);
  } else if (h == "forall" || h == "when") {
    collect_effect_predicates(list_at(e, 2, "effect"), out);
  } else {
    out.insert(h);
  }
}

Domain parse_domain_text(std::string_view text) {
  Domain d;
  d.tree = std::make_shared<const SExpr>(parse_single_sexpr(text));
  const SExpr& root = *d.tree;
  if (root.head() != "define") syntax_error(root, "expected (define ...)");
  const SExpr& header = list_at(root, 1, "(domain name)");
  if (header.head() != "domain") syntax_error(header, "expected (domain name)");
  d.name = list_at(header, 1, "domain name").atom;
  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const SExpr& sec = root.items[i];
    const std::string& h = sec.head();
    if (h == ":requirements") continue;
    if (h == ":types") {
      for (auto& [t, parent] : typed_list(sec, 1)) {
        if (t != "object") d.type_parent[t] = parent;
      }
    } else if (h == ":constants") {
      for (auto& o : typed_list(sec, 1)) d.objects.push_back(o);
    } else if (h == ":predicates") {
      for (std::size_t k = 1; k < sec.items.size(); ++k) {
        const SExpr& decl = sec.items[k];
        if (!decl.is_list || decl.items.empty()) syntax_error(decl, "expected predicate declaration");
        d.arity[decl.head()] = typed_list(decl, 1).size();
      }
    } else if (h == ":action") {
      Schema s;
      s.name = list_at(sec, 1, "action name").atom;
      for (std::size_t k = 2; k + 1 < sec.items.size(); k += 2) {
        const SExpr& key = sec.items[k];
        const SExpr& value = sec.items[k + 1];
        if (key.is(":parameters")) {
          s.params = typed_list(value);
        } else if (key.is(":precondition")) {
          s.pre = &value;
        } else if (key.is(":effect")) {
          s.eff = &value;
        } else {
          syntax_error(key, "unknown action field " + key.to_string());
        }
      }
      d.schemas.push_back(std::move(s));
    } else {
      throw UnsupportedFeature("domain section " + h);
    }
  }
  return d;
}

class Grounder {
 public:
  Grounder(Domain d, const SExpr& problem) : d_(std::move(d)) {
    if (problem.head() != "define") syntax_error(problem, "expected (define ...)");
    const SExpr* init = nullptr;
    const SExpr* goal = nullptr;
    for (std::size_t i = 2; i < problem.items.size(); ++i) {
      const SExpr& sec = problem.items[i];
      const std::string& h = sec.head();
      if (h == ":domain") {
        if (list_at(sec, 1, "domain name").atom != d_.name) {
          throw ResolutionError("problem refers to domain " + sec.items[1].atom);
        }
      } else if (h == ":objects") {
        for (auto& o : typed_list(sec, 1)) d_.objects.push_back(o);
      } else if (h == ":init") {
        init = &sec;
      } else if (h == ":goal") {
        goal = &list_at(sec, 1, "goal");
      } else if (h != ":requirements") {
        throw UnsupportedFeature("problem section " + h);
      }
    }
    for (const auto& [name, type] : d_.objects) known_.insert(name);
    for (const auto& s : d_.schemas) {
      if (s.eff) collect_effect_predicates(*s.eff, fluents_);
    }
    if (init) {
      for (std::size_t i = 1; i < init->items.size(); ++i) {
        std::string a = ground_atom(init->items[i], {});
        init_names_.insert(a);
        out_.init.push_back(prop(a));
      }
    }
    for (const auto& s : d_.schemas) ground_schema(s);
    if (goal) {
      std::vector<const SExpr*> lits;
      flatten(*goal, lits);
      for (const SExpr* l : lits) {
        if (l->head() == "not") throw UnsupportedFeature("negative goals");
        out_.goal.push_back(prop(ground_atom(*l, {})));
      }
    }
    out_.init = make_set(std::move(out_.init));
    out_.goal = make_set(std::move(out_.goal));
    out_.index();
  }

  ClassicalProblem take() { return std::move(out_); }

 private:
  using Binding = std::map<std::string, std::string>;

  PropId prop(const std::string& name) {
    auto [it, inserted] = ids_.emplace(name, static_cast<PropId>(out_.propositions.size()));
    if (inserted) out_.propositions.push_back(name);
    return it->second;
  }

  std::string term(const SExpr& t, const Binding& b) const {
    if (t.is_list) syntax_error(t, "expected term");
    if (!t.atom.empty() && t.atom[0] == '?') {
      auto it = b.find(t.atom);
      if (it == b.end()) syntax_error(t, "unbound variable " + t.atom);
      return it->second;
    }
    if (!known_.count(t.atom)) throw ResolutionError("undeclared object " + t.atom);
    return t.atom;
  }

  std::string ground_atom(const SExpr& a, const Binding& b) const {
    if (!a.is_list || a.items.empty()) syntax_error(a, "expected atom");
    const std::string& pred = a.head();
    auto ar = d_.arity.find(pred);
    if (ar == d_.arity.end()) throw ResolutionError("undeclared predicate " + pred);
    if (ar->second != a.items.size() - 1) syntax_error(a, "wrong arity for " + pred);
    std::string s = "(" + pred;
    for (std::size_t i = 1; i < a.items.size(); ++i) s += " " + term(a.items[i], b);
    return s + ")";
  }

  static void flatten(const SExpr& f, std::vector<const SExpr*>& out) {
    if (f.head() == "and") {
      for (std::size_t i = 1; i < f.items.size(); ++i) flatten(f.items[i], out);
      return;
    }
    const std::string& h = f.head();
    if (h == "or" || h == "imply" || h == "forall" || h == "exists" || h == "when") {
      throw UnsupportedFeature("precondition " + h);
    }
    out.push_back(&f);
  }

  // Literal with every variable bound: true/false for equality and static
  // atoms, nullopt for fluents.
  std::optional<bool> evaluate(const SExpr& l, const Binding& b) const {
    bool negated = l.head() == "not";
    const SExpr& a = negated ? list_at(l, 1, "atom") : l;
    std::optional<bool> v;
    if (a.head() == "=") {
      v = term(list_at(a, 1, "term"), b) == term(list_at(a, 2, "term"), b);
    } else if (!fluents_.count(a.head())) {
      v = init_names_.count(ground_atom(a, b)) != 0;
    }
    if (v && negated) *v = !*v;
    return v;
  }

  static void variables(const SExpr& e, std::set<std::string>& out) {
    if (!e.is_list) {
      if (!e.atom.empty() && e.atom[0] == '?') out.insert(e.atom);
      return;
    }
    for (const auto& c : e.items) variables(c, out);
  }

  void ground_schema(const Schema& s) {
    std::vector<const SExpr*> lits;
    if (s.pre) flatten(*s.pre, lits);
    // Literals checkable once parameter i is bound.
    std::vector<std::vector<const SExpr*>> ready(s.params.size() + 1);
    for (const SExpr* l : lits) {
      std::set<std::string> vars;
      variables(*l, vars);
      std::size_t last = 0;
      for (std::size_t i = 0; i < s.params.size(); ++i) {
        if (vars.count(s.params[i].first)) last = i + 1;
      }
      ready[last].push_back(l);
    }
    std::vector<std::vector<std::string>> domains;
    for (const auto& [var, type] : s.params) domains.push_back(objects_of(d_, type));
    Binding b;
    std::vector<std::string> args;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      for (const SExpr* l : ready[i]) {
        auto v = evaluate(*l, b);
        if (v && !*v) return;
      }
      if (i == s.params.size()) {
        emit(s, lits, b, args);
        return;
      }
      for (const auto& o : domains[i]) {
        b[s.params[i].first] = o;
        args.push_back(o);
        rec(i + 1);
        args.pop_back();
      }
      b.erase(s.params[i].first);
    };
    rec(0);
  }

  void effect(const SExpr& e, Binding& b, ConditionalAction& a) {
    const std::string& h = e.head();
    if (h == "and") {
      for (std::size_t i = 1; i < e.items.size(); ++i) effect(e.items[i], b, a);
    } else if (h == "not") {
      a.del.push_back(prop(ground_atom(list_at(e, 1, "atom"), b)));
    } else if (h == "forall") {
      auto vars = typed_list(list_at(e, 1, "variables"));
      std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == vars.size()) {
          effect(list_at(e, 2, "effect"), b, a);
          return;
        }
        for (const auto& o : objects_of(d_, vars[i].second)) {
          b[vars[i].first] = o;
          rec(i + 1);
        }
        b.erase(vars[i].first);
      };
      rec(0);
    } else if (h == "when") {
      std::vector<const SExpr*> cond;
      flatten(list_at(e, 1, "condition"), cond);
      ConditionalEffect ce;
      for (const SExpr* l : cond) {
        if (l->head() == "not") throw UnsupportedFeature("negative effect conditions");
        if (l->head() == "=" || !fluents_.count(l->head())) {
          auto v = evaluate(*l, b);
          if (!*v) return;
          if (l->head() == "=") continue;
        }
        ce.condition.push_back(prop(ground_atom(*l, b)));
      }
      ConditionalAction inner;
      effect(list_at(e, 2, "effect"), b, inner);
      if (!inner.effects.empty()) throw UnsupportedFeature("nested conditional effects");
      ce.condition = make_set(std::move(ce.condition));
      ce.add = make_set(std::move(inner.add));
      ce.del = make_set(std::move(inner.del));
      a.effects.push_back(std::move(ce));
    } else if (h == "increase" || h == "decrease" || h == "assign") {
      throw UnsupportedFeature("numeric effects");
    } else {
      a.add.push_back(prop(ground_atom(e, b)));
    }
  }

  void emit(const Schema& s, const std::vector<const SExpr*>& lits, Binding& b, const std::vector<std::string>& args) {
    ConditionalAction a;
    a.id = static_cast<std::uint32_t>(out_.actions.size());
    a.name = "(" + s.name;
    for (const auto& x : args) a.name += " " + x;
    a.name += ")";
    for (const SExpr* l : lits) {
      bool negated = l->head() == "not";
      const SExpr& atom = negated ? list_at(*l, 1, "atom") : *l;
      if (atom.head() == "=") continue;
      PropId q = prop(ground_atom(atom, b));
      (negated ? a.pre_neg : a.pre).push_back(q);
    }
    if (s.eff) effect(*s.eff, b, a);
    a.pre = make_set(std::move(a.pre));
    a.pre_neg = make_set(std::move(a.pre_neg));
    a.add = make_set(std::move(a.add));
    a.del = make_set(std::move(a.del));
    out_.actions.push_back(std::move(a));
  }

  Domain d_;
  std::set<std::string> known_;
  std::set<std::string> fluents_;
  std::set<std::string> init_names_;
  std::map<std::string, PropId> ids_;
  ClassicalProblem out_;
};

}  // namespace

ClassicalProblem read_pddl(std::string_view domain, std::string_view problem) {
  Domain d = parse_domain_text(domain);
  SExpr p = parse_single_sexpr(problem);
  return Grounder(std::move(d), p).take();
}

std::size_t count_objects(std::string_view domain, std::string_view problem, const std::string& type) {
  Domain d = parse_domain_text(domain);
  SExpr p = parse_single_sexpr(problem);
  for (std::size_t i = 2; i < p.items.size(); ++i) {
    if (p.items[i].head() == ":objects") {
      for (auto& o : typed_list(p.items[i], 1)) d.objects.push_back(o);
    }
  }
  return objects_of(d, type).size();
}

std::string canonical_form(const ClassicalProblem& p) {
  auto names = [&](const PropSet& s) {
    std::vector<std::string> v;
    for (PropId q : s) v.push_back(p.propositions.at(q));
    std::sort(v.begin(), v.end());
    std::string out;
    for (const auto& x : v) out += x + " ";
    return out;
  };
  // Operators needing an atom that is false initially and added by nothing
  // can never fire; the reader prunes them, so they are left out here too.
  std::vector<bool> producible(p.propositions.size(), false);
  for (PropId q : p.init) producible[q] = true;
  for (const auto& a : p.actions) {
    for (PropId q : a.add) producible[q] = true;
    for (const auto& e : a.effects) {
      for (PropId q : e.add) producible[q] = true;
    }
  }
  std::vector<std::string> actions;
  for (const auto& a : p.actions) {
    if (!std::all_of(a.pre.begin(), a.pre.end(), [&](PropId q) { return producible[q]; })) continue;
    std::string s = a.name + " | pre " + names(a.pre) + "| neg " + names(a.pre_neg) + "| add " + names(a.add) +
                    "| del " + names(a.del);
    std::vector<std::string> effects;
    for (const auto& e : a.effects) {
      effects.push_back("when " + names(e.condition) + "add " + names(e.add) + "del " + names(e.del));
    }
    std::sort(effects.begin(), effects.end());
    for (const auto& e : effects) s += "| " + e;
    actions.push_back(std::move(s));
  }
  std::sort(actions.begin(), actions.end());
  std::string out;
  for (const auto& a : actions) out += a + "\n";
  out += "init " + names(p.init) + "\n";
  out += "goal " + names(p.goal) + "\n";
  return out;
}

}  // namespace lhtn
