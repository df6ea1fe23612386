#include "lhtn/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "lhtn/hddl.hpp"

namespace lhtn {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::uint64_t crescent_count(std::uint32_t b, std::uint32_t count) {
  if (b == 0) return 0;
  return b * binomial(b - 1, count);
}

std::uint64_t unordered_count(std::uint32_t b, std::uint32_t count) {
  if (b == 0 || count > b - 1) return 0;
  std::uint64_t perm = 1;
  for (std::uint32_t i = 0; i < count; ++i) perm *= (b - 1 - i);
  return b * perm;
}

std::vector<std::vector<Holder>> crescent_assignments(std::uint32_t b, Holder h1, std::uint32_t count) {
  std::vector<Holder> pool;
  for (Holder h = 0; h < b; ++h) {
    if (h != h1) pool.push_back(h);
  }
  std::vector<std::vector<Holder>> out;
  if (count > pool.size()) return out;
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = i;
  while (true) {
    std::vector<Holder> tuple;
    for (std::size_t i : idx) tuple.push_back(pool[i]);
    out.push_back(std::move(tuple));
    // next combination
    std::size_t i = count;
    while (i > 0 && idx[i - 1] == pool.size() - count + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < count; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

std::vector<std::vector<Holder>> unordered_assignments(std::uint32_t b, Holder h1, std::uint32_t count) {
  std::vector<std::vector<Holder>> out;
  for (auto tuple : crescent_assignments(b, h1, count)) {
    do {
      out.push_back(tuple);
    } while (std::next_permutation(tuple.begin(), tuple.end()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> holder_order(const Method& m) {
  std::vector<NodeId> out;
  for (NodeId n : m.network.nodes()) {
    if (n != m.last_node) out.push_back(n);
  }
  return out;
}

std::uint32_t new_holders(const Method& m) { return static_cast<std::uint32_t>(m.network.size()) - 1; }

std::vector<ActionId> blocking_actions(const GroundHtnProblem& p, ActionId a) {
  const GroundAction& act = p.actions[a];
  std::vector<ActionId> out = dependent_set(act, p.actions);
  for (const GroundAction& b : p.actions) {
    if (b.id != a && intersects(b.add, act.pre)) out.push_back(b.id);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::string sanitize(const std::string& prefix, std::uint32_t id, const std::string& raw) {
  std::string out = prefix + std::to_string(id);
  bool sep = true;
  std::string body;
  for (char c : raw) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      if (sep && !body.empty()) body.push_back('_');
      body.push_back(static_cast<char>(std::tolower(u)));
      sep = false;
    } else {
      sep = true;
    }
  }
  if (!body.empty()) out += "-" + body;
  return out;
}

std::string atom(const std::string& pred, std::initializer_list<std::string> args) {
  std::string s = "(" + pred;
  for (const auto& a : args) s += " " + a;
  return s + ")";
}

class Encoder {
 public:
  explicit Encoder(const CthdEncoding& enc) : enc_(enc), p_(enc.source), b_(enc.holder_count) {}

  PropId in(TaskId t, Holder h) const { return enc_.prop(atom("in", {enc_.names.tasks[t], th(h)})); }
  PropId empty(Holder h) const { return enc_.prop(atom("empty", {th(h)})); }
  PropId resolved(Holder h) const { return enc_.prop(atom("resolved", {th(h)})); }
  PropId not_constraint(Holder i, Holder j) const { return enc_.prop(atom("not_constraint", {th(i), th(j)})); }
  PropId not_planned(ActionId a) const { return enc_.prop(atom("not_planned", {enc_.names.actions[a]})); }
  PropId prec_th(Holder i, Holder j) const { return enc_.prop(atom("prec_th", {th(i), th(j)})); }
  const std::string& th(Holder h) const { return enc_.names.holders[h]; }

  ConditionalAction method(MethodId mid, const std::vector<Holder>& hs) const {
    const Method& m = p_.methods.at(mid);
    std::vector<NodeId> order = holder_order(m);
    if (hs.size() != order.size() + 1) {
      throw EncodingError(EncodingError::Kind::NotEnoughHolders,
                          m.name + " needs " + std::to_string(order.size() + 1) + " holders");
    }
    for (Holder h : hs) {
      if (h >= b_) throw EncodingError(EncodingError::Kind::NotEnoughHolders, "holder out of range");
    }
    for (std::size_t j = 1; j < hs.size(); ++j) {
      if (hs[j] == hs[0] || (j > 1 && hs[j - 1] >= hs[j])) {
        throw EncodingError(EncodingError::Kind::NonCrescentAssignment, m.name);
      }
    }
    const Holder h1 = hs[0];
    std::map<NodeId, Holder> holder_of{{m.last_node, h1}};
    for (std::size_t j = 0; j < order.size(); ++j) holder_of[order[j]] = hs[j + 1];

    ConditionalAction a;
    a.name = "(" + enc_.names.methods[mid];
    for (Holder h : hs) a.name += " " + th(h);
    a.name += ")";
    std::vector<PropId> pre{in(m.task, h1)}, add, del{in(m.task, h1)};
    for (Holder i = 0; i < b_; ++i) pre.push_back(not_constraint(i, h1));
    for (std::size_t j = 1; j < hs.size(); ++j) {
      if (j > 1) pre.push_back(prec_th(hs[j - 1], hs[j]));
      pre.push_back(empty(hs[j]));
      del.push_back(empty(hs[j]));
      del.push_back(not_constraint(hs[j], h1));
    }
    for (NodeId n : m.network.nodes()) add.push_back(in(m.network.task_of(n), holder_of[n]));
    for (auto [u, v] : m.network.edges()) del.push_back(not_constraint(holder_of[u], holder_of[v]));
    a.pre = make_set(std::move(pre));
    a.add = make_set(std::move(add));
    a.del = make_set(std::move(del));
    return a;
  }

  ConditionalAction primitive(ActionId aid, Holder h) const {
    if (h >= b_) throw EncodingError(EncodingError::Kind::NotEnoughHolders, "holder out of range");
    const GroundAction& src = p_.actions.at(aid);
    ConditionalAction a;
    a.name = atom(enc_.names.primitives[aid], {th(h)});
    std::vector<PropId> pre = src.pre;
    pre.push_back(in(src.task, h));
    for (Holder i = 0; i < b_; ++i) pre.push_back(not_constraint(i, h));
    for (ActionId x : blocking_actions(p_, aid)) pre.push_back(not_planned(x));
    std::vector<PropId> add = src.add;
    add.push_back(resolved(h));
    std::vector<PropId> del = src.del;
    del.push_back(not_planned(aid));
    del.push_back(in(src.task, h));
    a.pre = make_set(std::move(pre));
    a.add = make_set(std::move(add));
    a.del = make_set(std::move(del));
    return a;
  }

  std::vector<PropId> release(Holder h) const {
    std::vector<PropId> out{empty(h)};
    for (Holder i = 0; i < b_; ++i) out.push_back(not_constraint(h, i));
    return out;
  }

  std::vector<PropId> all_not_planned() const {
    std::vector<PropId> out;
    for (ActionId a = 0; a < p_.actions.size(); ++a) out.push_back(not_planned(a));
    return out;
  }

  ConditionalAction conditional_switch() const {
    ConditionalAction a;
    a.name = "(switch)";
    a.layer_switch = true;
    a.add = make_set(all_not_planned());
    for (Holder h = 0; h < b_; ++h) {
      a.effects.push_back({make_set({resolved(h)}), make_set(release(h)), make_set({resolved(h)})});
    }
    return a;
  }

  ConditionalAction switch_variant(std::uint32_t mask) const {
    ConditionalAction a;
    a.name = "(switch-" + std::to_string(mask) + ")";
    a.layer_switch = true;
    std::vector<PropId> pre, pre_neg, add = all_not_planned(), del;
    for (Holder h = 0; h < b_; ++h) {
      if (mask & (1u << h)) {
        pre.push_back(resolved(h));
        auto r = release(h);
        add.insert(add.end(), r.begin(), r.end());
        del.push_back(resolved(h));
      } else {
        pre_neg.push_back(resolved(h));
      }
    }
    a.pre = make_set(std::move(pre));
    a.pre_neg = make_set(std::move(pre_neg));
    a.add = make_set(std::move(add));
    a.del = make_set(std::move(del));
    return a;
  }

  std::vector<ConditionalAction> switches() const {
    if (enc_.effects == EffectsMode::Conditional) return {conditional_switch()};
    std::vector<ConditionalAction> out;
    for (std::uint32_t mask = 0; mask < (1u << b_); ++mask) out.push_back(switch_variant(mask));
    return out;
  }

 private:
  const CthdEncoding& enc_;
  const GroundHtnProblem& p_;
  std::uint32_t b_;
};

PddlNames make_names(const GroundHtnProblem& p, std::uint32_t b) {
  PddlNames n;
  for (const auto& t : p.tasks) n.tasks.push_back(sanitize("t", t.id, t.name));
  for (const auto& a : p.actions) n.actions.push_back(sanitize("a", a.id, a.name));
  for (const auto& q : p.propositions) n.fluents.push_back(sanitize("f", q.id, q.name));
  for (const auto& m : p.methods) n.methods.push_back(sanitize("m", m.id, m.name));
  for (const auto& a : p.actions) n.primitives.push_back(sanitize("p", a.id, a.name));
  for (std::uint32_t h = 0; h < b; ++h) n.holders.push_back("th" + std::to_string(h));
  return n;
}

std::vector<std::string> encoding_propositions(const PddlNames& n, std::uint32_t b) {
  std::vector<std::string> out;
  for (std::uint32_t i = 0; i < b; ++i) {
    for (std::uint32_t j = 0; j < b; ++j) out.push_back(atom("not_constraint", {n.holders[i], n.holders[j]}));
  }
  for (std::uint32_t i = 0; i < b; ++i) {
    for (std::uint32_t j = 0; j < b; ++j) out.push_back(atom("prec_th", {n.holders[i], n.holders[j]}));
  }
  for (std::uint32_t i = 0; i < b; ++i) out.push_back(atom("empty", {n.holders[i]}));
  for (std::uint32_t i = 0; i < b; ++i) out.push_back(atom("resolved", {n.holders[i]}));
  for (const auto& t : n.tasks) {
    for (std::uint32_t i = 0; i < b; ++i) out.push_back(atom("in", {t, n.holders[i]}));
  }
  for (const auto& a : n.actions) out.push_back(atom("not_planned", {a}));
  return out;
}

CthdEncoding prepare(const GroundHtnProblem& p, const EncodingConfig& cfg) {
  if (cfg.bound == 0) throw EncodingError(EncodingError::Kind::ZeroBound, "the holder count must be positive");
  if (!is_normalized(p)) throw EncodingError(EncodingError::Kind::NotNormalized, "problem is not normalized");
  if (cfg.effects == EffectsMode::CompiledAway && (cfg.bound > cfg.compile_threshold || cfg.bound >= 31)) {
    throw EncodingError(EncodingError::Kind::CompileThresholdExceeded,
                        "compiling away conditional effects needs 2^" + std::to_string(cfg.bound) +
                            " switch actions; use conditional effects or raise the threshold");
  }
  CthdEncoding enc;
  enc.source = p;
  enc.holder_count = cfg.bound;
  enc.effects = cfg.effects;
  enc.names = make_names(p, cfg.bound);
  auto& props = enc.problem.propositions;
  for (const auto& f : enc.names.fluents) props.push_back("(" + f + ")");
  for (auto& s : encoding_propositions(enc.names, cfg.bound)) props.push_back(std::move(s));
  for (PropId i = 0; i < props.size(); ++i) enc.prop_index.emplace(props[i], i);
  return enc;
}

}  // namespace

std::vector<std::string> encode_propositions(const GroundHtnProblem& p, std::uint32_t b) {
  return encoding_propositions(make_names(p, b), b);
}

CthdEncoding encode(const GroundHtnProblem& p, const EncodingConfig& cfg) {
  CthdEncoding enc = prepare(p, cfg);
  Encoder e(enc);
  const std::uint32_t b = cfg.bound;
  auto push = [&](ConditionalAction a, EncodedOrigin o) {
    a.id = static_cast<std::uint32_t>(enc.problem.actions.size());
    enc.problem.actions.push_back(std::move(a));
    enc.origin.push_back(std::move(o));
  };

  for (const Method& m : p.methods) {
    for (Holder h1 = 0; h1 < b; ++h1) {
      for (auto& tail : crescent_assignments(b, h1, new_holders(m))) {
        std::vector<Holder> hs{h1};
        hs.insert(hs.end(), tail.begin(), tail.end());
        push(e.method(m.id, hs), {OriginKind::Compound, m.id, hs});
        ++enc.stats.compound;
      }
    }
  }
  for (const GroundAction& a : p.actions) {
    for (Holder h = 0; h < b; ++h) {
      push(e.primitive(a.id, h), {OriginKind::Primitive, a.id, {h}});
      ++enc.stats.primitive;
    }
  }
  std::uint32_t mask = 0;
  for (auto& s : e.switches()) {
    std::uint32_t source = cfg.effects == EffectsMode::Conditional ? kNone : mask++;
    push(std::move(s), {OriginKind::Switch, source, {}});
    ++enc.stats.switches;
  }

  std::vector<PropId> init = p.init;
  init.push_back(e.in(p.tasks[p.network.task_of(p.network.nodes().front())].id, 0));
  for (Holder h = 1; h < b; ++h) init.push_back(e.empty(h));
  for (Holder i = 0; i < b; ++i) {
    for (Holder j = 0; j < b; ++j) {
      if (i < j) init.push_back(e.prec_th(i, j));
      init.push_back(e.not_constraint(i, j));
    }
  }
  for (ActionId a = 0; a < p.actions.size(); ++a) init.push_back(e.not_planned(a));
  enc.problem.init = make_set(std::move(init));
  std::vector<PropId> goal;
  for (Holder h = 0; h < b; ++h) goal.push_back(e.empty(h));
  enc.problem.goal = make_set(std::move(goal));
  enc.problem.index();

  enc.stats.propositions = enc.problem.propositions.size();
  enc.stats.operators = enc.problem.actions.size();
  return enc;
}

ConditionalAction encode_method(const CthdEncoding& enc, MethodId m, const std::vector<Holder>& assignment) {
  return Encoder(enc).method(m, assignment);
}

ConditionalAction encode_primitive(const CthdEncoding& enc, ActionId a, Holder h) {
  return Encoder(enc).primitive(a, h);
}

std::vector<ConditionalAction> encode_switch(const CthdEncoding& enc) {
  return Encoder(enc).switches();
}

}  // namespace lhtn
