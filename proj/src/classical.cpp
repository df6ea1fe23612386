#include "lhtn/classical.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <deque>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

namespace lhtn {

void ClassicalProblem::index() {
  action_index.clear();
  for (std::uint32_t i = 0; i < actions.size(); ++i) action_index.emplace(actions[i].name, i);
}

bool applicable(const State& s, const ConditionalAction& a) {
  if (!includes(s, a.pre)) return false;
  return !intersects(s, a.pre_neg);
}

State execute(const State& s, const ConditionalAction& a) {
  PropSet add = a.add;
  PropSet del = a.del;
  for (const auto& e : a.effects) {
    if (includes(s, e.condition)) {
      add = set_union(add, e.add);
      del = set_union(del, e.del);
    }
  }
  return set_union(set_difference(s, del), add);
}

std::optional<State> replay(const ClassicalProblem& p, const ClassicalPlan& plan) {
  State s = p.init;
  for (std::uint32_t a : plan.actions) {
    if (a >= p.actions.size() || !applicable(s, p.actions[a])) return std::nullopt;
    s = execute(s, p.actions[a]);
  }
  return s;
}

bool is_valid_plan(const ClassicalProblem& p, const ClassicalPlan& plan) {
  auto end = replay(p, plan);
  return end && includes(*end, p.goal);
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Solved: return "solved";
    case SolveStatus::Unsolvable: return "unsolvable";
    case SolveStatus::ResourceExhausted: return "resource-exhausted";
  }
  return "?";
}

namespace {

using Word = std::uint64_t;
using Clock = std::chrono::steady_clock;

struct Mask {
  std::vector<std::pair<std::uint32_t, Word>> words;  // sparse (index, bits)

  static Mask of(const PropSet& s) {
    Mask m;
    for (PropId p : s) {
      std::uint32_t w = p / 64;
      Word bit = Word{1} << (p % 64);
      if (!m.words.empty() && m.words.back().first == w) {
        m.words.back().second |= bit;
      } else {
        m.words.emplace_back(w, bit);
      }
    }
    return m;
  }
  bool subset_of(const Word* s) const {
    for (auto [i, b] : words) {
      if ((s[i] & b) != b) return false;
    }
    return true;
  }
  bool disjoint(const Word* s) const {
    for (auto [i, b] : words) {
      if (s[i] & b) return false;
    }
    return true;
  }
  void set(Word* s) const {
    for (auto [i, b] : words) s[i] |= b;
  }
  void clear(Word* s) const {
    for (auto [i, b] : words) s[i] &= ~b;
  }
};

struct CompiledEffect {
  Mask cond, add, del;
};

struct CompiledAction {
  Mask pre, pre_neg, add, del;
  std::vector<CompiledEffect> effects;
  bool layer_switch = false;
};

// States stored back to back in one pool; the hash set holds indices.
class StateStore {
 public:
  explicit StateStore(std::size_t words) : words_(words), set_(1024, Hash{this}, Eq{this}) {}

  const Word* get(std::uint32_t i) const { return pool_.data() + static_cast<std::size_t>(i) * words_; }
  std::size_t size() const { return pool_.size() / std::max<std::size_t>(words_, 1); }

  // Inserts the scratch state; returns (index, inserted).
  std::pair<std::uint32_t, bool> insert(const std::vector<Word>& s) {
    auto idx = static_cast<std::uint32_t>(count_);
    pool_.insert(pool_.end(), s.begin(), s.end());
    ++count_;
    auto [it, inserted] = set_.insert(idx);
    if (!inserted) {
      pool_.resize(pool_.size() - words_);
      --count_;
      return {*it, false};
    }
    return {idx, true};
  }

 private:
  struct Hash {
    const StateStore* store;
    std::size_t operator()(std::uint32_t i) const {
      const Word* s = store->get(i);
      std::size_t h = 1469598103934665603ull;
      for (std::size_t k = 0; k < store->words_; ++k) {
        h ^= s[k] + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      }
      return h;
    }
  };
  struct Eq {
    const StateStore* store;
    bool operator()(std::uint32_t a, std::uint32_t b) const {
      return std::equal(store->get(a), store->get(a) + store->words_, store->get(b));
    }
  };

  std::size_t words_;
  std::size_t count_ = 0;
  std::vector<Word> pool_;
  std::unordered_set<std::uint32_t, Hash, Eq> set_;
};

class Engine {
 public:
  Engine(const ClassicalProblem& p, const SolverLimits& limits)
      : p_(p), limits_(limits), words_((p.propositions.size() + 63) / 64 + 1), store_(words_), start_(Clock::now()) {
    for (const auto& a : p.actions) {
      CompiledAction c{Mask::of(a.pre), Mask::of(a.pre_neg), Mask::of(a.add), Mask::of(a.del), {}, a.layer_switch};
      for (const auto& e : a.effects) c.effects.push_back({Mask::of(e.condition), Mask::of(e.add), Mask::of(e.del)});
      actions_.push_back(std::move(c));
    }
    goal_ = Mask::of(p.goal);
  }

  std::vector<Word> encode(const State& s) const {
    std::vector<Word> out(words_, 0);
    for (PropId q : s) out[q / 64] |= Word{1} << (q % 64);
    return out;
  }

  bool is_goal(const Word* s) const { return goal_.subset_of(s); }

  std::size_t goal_distance(const Word* s) const {
    std::size_t missing = 0;
    for (auto [i, b] : goal_.words) missing += static_cast<std::size_t>(__builtin_popcountll(b & ~s[i]));
    return missing;
  }

  bool applicable(const CompiledAction& a, const Word* s) const {
    return a.pre.subset_of(s) && a.pre_neg.disjoint(s);
  }

  void successor(const CompiledAction& a, const Word* s, std::vector<Word>& out) const {
    out.assign(s, s + words_);
    scratch_add_.assign(words_, 0);
    scratch_del_.assign(words_, 0);
    a.add.set(scratch_add_.data());
    a.del.set(scratch_del_.data());
    for (const auto& e : a.effects) {
      if (e.cond.subset_of(s)) {
        e.add.set(scratch_add_.data());
        e.del.set(scratch_del_.data());
      }
    }
    for (std::size_t k = 0; k < words_; ++k) out[k] = (out[k] & ~scratch_del_[k]) | scratch_add_[k];
  }

  bool over_budget(std::size_t expanded) const {
    if (expanded >= limits_.max_expansions) return true;
    if (limits_.time_limit > 0 && (expanded & 255) == 0) {
      return std::chrono::duration<double>(Clock::now() - start_).count() > limits_.time_limit;
    }
    return false;
  }

  ClassicalPlan extract(std::uint32_t idx) const {
    ClassicalPlan plan;
    while (parent_[idx] != kNone) {
      plan.actions.push_back(via_[idx]);
      idx = parent_[idx];
    }
    std::reverse(plan.actions.begin(), plan.actions.end());
    return plan;
  }

  SolveResult bfs() {
    SolveResult r;
    if (limits_.max_expansions == 0) return finish(r, SolveStatus::ResourceExhausted);
    auto [root, ins] = store_.insert(encode(p_.init));
    (void)ins;
    parent_.push_back(kNone);
    via_.push_back(kNone);
    if (is_goal(store_.get(root))) return finish(r, SolveStatus::Solved);
    std::deque<std::uint32_t> open{root};
    std::vector<Word> next;
    while (!open.empty()) {
      if (over_budget(r.expanded)) return finish(r, SolveStatus::ResourceExhausted);
      std::uint32_t cur = open.front();
      open.pop_front();
      ++r.expanded;
      for (std::uint32_t ai = 0; ai < actions_.size(); ++ai) {
        const Word* s = store_.get(cur);
        if (!applicable(actions_[ai], s)) continue;
        successor(actions_[ai], s, next);
        auto [idx, fresh] = store_.insert(next);
        if (!fresh) continue;
        ++r.generated;
        parent_.push_back(cur);
        via_.push_back(ai);
        if (is_goal(store_.get(idx))) {
          r.plan = extract(idx);
          return finish(r, SolveStatus::Solved);
        }
        open.push_back(idx);
      }
    }
    return finish(r, SolveStatus::Unsolvable);
  }

  SolveResult greedy() {
    SolveResult r;
    if (limits_.max_expansions == 0) return finish(r, SolveStatus::ResourceExhausted);
    auto [root, ins] = store_.insert(encode(p_.init));
    (void)ins;
    parent_.push_back(kNone);
    via_.push_back(kNone);
    if (is_goal(store_.get(root))) return finish(r, SolveStatus::Solved);
    // (unsatisfied goals, reached by switch, insertion order)
    using Entry = std::tuple<std::size_t, int, std::uint64_t, std::uint32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    std::uint64_t seq = 0;
    open.emplace(goal_distance(store_.get(root)), 0, seq++, root);
    std::vector<Word> next;
    while (!open.empty()) {
      if (over_budget(r.expanded)) return finish(r, SolveStatus::ResourceExhausted);
      std::uint32_t cur = std::get<3>(open.top());
      open.pop();
      ++r.expanded;
      for (std::uint32_t ai = 0; ai < actions_.size(); ++ai) {
        const Word* s = store_.get(cur);
        if (!applicable(actions_[ai], s)) continue;
        successor(actions_[ai], s, next);
        auto [idx, fresh] = store_.insert(next);
        if (!fresh) continue;
        ++r.generated;
        parent_.push_back(cur);
        via_.push_back(ai);
        if (is_goal(store_.get(idx))) {
          r.plan = extract(idx);
          return finish(r, SolveStatus::Solved);
        }
        open.emplace(goal_distance(store_.get(idx)), actions_[ai].layer_switch ? 1 : 0, seq++, idx);
      }
    }
    return finish(r, SolveStatus::Unsolvable);
  }

 private:
  SolveResult& finish(SolveResult& r, SolveStatus status) {
    r.status = status;
    r.seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    if (status == SolveStatus::Solved && !is_valid_plan(p_, r.plan)) {
      throw std::logic_error("solver produced a plan that does not replay");
    }
    return r;
  }

  const ClassicalProblem& p_;
  SolverLimits limits_;
  std::size_t words_;
  StateStore store_;
  Clock::time_point start_;
  std::vector<CompiledAction> actions_;
  Mask goal_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> via_;
  mutable std::vector<Word> scratch_add_, scratch_del_;
};

std::string normalize_plan_line(const std::string& raw) {
  std::string line = raw.substr(0, raw.find(';'));
  std::string out;
  bool space = false;
  for (char c : line) {
    if (c == '(' || c == ')') {
      space = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

SolveResult solve_bfs(const ClassicalProblem& p, const SolverLimits& limits) { return Engine(p, limits).bfs(); }

SolveResult solve_greedy(const ClassicalProblem& p, const SolverLimits& limits) {
  return Engine(p, limits).greedy();
}

ClassicalPlan read_plan(std::istream& in, const ClassicalProblem& p) {
  std::unordered_map<std::string, std::uint32_t> by_name;
  for (std::uint32_t i = 0; i < p.actions.size(); ++i) by_name.emplace(normalize_plan_line(p.actions[i].name), i);
  ClassicalPlan plan;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string key = normalize_plan_line(line);
    if (key.empty()) continue;
    // Some planners prefix steps with "<time>:".
    if (auto colon = key.find(':'); colon != std::string::npos && colon + 1 < key.size() &&
                                    std::all_of(key.begin(), key.begin() + static_cast<long>(colon),
                                                [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '.'; })) {
      key = normalize_plan_line(key.substr(colon + 1));
    }
    auto it = by_name.find(key);
    if (it == by_name.end()) {
      throw std::runtime_error("plan line " + std::to_string(lineno) + ": unknown action '" + key + "'");
    }
    plan.actions.push_back(it->second);
  }
  return plan;
}

void write_plan(std::ostream& out, const ClassicalPlan& plan, const ClassicalProblem& p) {
  for (std::uint32_t a : plan.actions) out << p.actions.at(a).name << '\n';
  out << "; cost = " << plan.actions.size() << " (unit cost)\n";
}

}  // namespace lhtn
