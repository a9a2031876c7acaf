#include "hyperltl/formula.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace hyperltl {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::EmptyLoop: return "EmptyLoop";
    case ErrorKind::DanglingEdge: return "DanglingEdge";
    case ErrorKind::NoInitialState: return "NoInitialState";
    case ErrorKind::NoSuccessor: return "NoSuccessor";
    case ErrorKind::EmptyWordPair: return "EmptyWordPair";
    case ErrorKind::UnknownOpcode: return "UnknownOpcode";
    case ErrorKind::QuantifierUnderTemporal: return "QuantifierUnderTemporal";
    case ErrorKind::Capture: return "CaptureError";
    case ErrorKind::PeriodBlowup: return "PeriodBlowup";
    case ErrorKind::SizeBlowup: return "SizeBlowup";
    case ErrorKind::ComplementBlowup: return "ComplementBlowup";
    case ErrorKind::Budget: return "BudgetExceeded";
    case ErrorKind::NotAModel: return "NotAModel";
    case ErrorKind::Shape: return "ShapeError";
    case ErrorKind::NotASolution: return "NotASolution";
    case ErrorKind::NotTotallyOrdered: return "NotTotallyOrdered";
    case ErrorKind::EmptyModel: return "EmptyModel";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t mix(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return mix(h, s.size());
}

Formula build(Op op, std::string prop, std::string var, Formula lhs, Formula rhs) {
  std::uint64_t h = mix(kFnvOffset, static_cast<std::uint64_t>(op));
  h = mix(h, prop);
  h = mix(h, var);
  h = mix(h, lhs ? lhs->hash : 0x9e3779b97f4a7c15ull);
  h = mix(h, rhs ? rhs->hash : 0x7f4a7c159e3779b9ull);
  return std::make_shared<const Node>(
      Node{op, std::move(prop), std::move(var), std::move(lhs), std::move(rhs), h});
}

}  // namespace

bool is_unary(Op op) {
  return op == Op::Not || op == Op::Next || op == Op::Eventually || op == Op::Always ||
         op == Op::Exists || op == Op::Forall;
}

bool is_binary(Op op) {
  return op == Op::And || op == Op::Or || op == Op::Implies || op == Op::Iff || op == Op::Xor ||
         op == Op::Until;
}

bool is_temporal(Op op) {
  return op == Op::Next || op == Op::Eventually || op == Op::Always || op == Op::Until;
}

bool is_quantifier(Op op) { return op == Op::Exists || op == Op::Forall; }

Formula atom(const std::string& prop, const std::string& var) {
  return build(Op::Atom, prop, var, nullptr, nullptr);
}
Formula top() {
  static const Formula t = build(Op::True, "", "", nullptr, nullptr);
  return t;
}
Formula bottom() {
  static const Formula f = build(Op::False, "", "", nullptr, nullptr);
  return f;
}
Formula lnot(Formula f) { return build(Op::Not, "", "", std::move(f), nullptr); }
Formula land(Formula a, Formula b) { return build(Op::And, "", "", std::move(a), std::move(b)); }
Formula lor(Formula a, Formula b) { return build(Op::Or, "", "", std::move(a), std::move(b)); }

Formula land(const std::vector<Formula>& fs) {
  if (fs.empty()) return top();
  Formula acc = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) acc = land(acc, fs[i]);
  return acc;
}

Formula lor(const std::vector<Formula>& fs) {
  if (fs.empty()) return bottom();
  Formula acc = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) acc = lor(acc, fs[i]);
  return acc;
}

Formula limplies(Formula a, Formula b) {
  return build(Op::Implies, "", "", std::move(a), std::move(b));
}
Formula liff(Formula a, Formula b) { return build(Op::Iff, "", "", std::move(a), std::move(b)); }
Formula lxor(Formula a, Formula b) { return build(Op::Xor, "", "", std::move(a), std::move(b)); }
Formula next(Formula f) { return build(Op::Next, "", "", std::move(f), nullptr); }
Formula next(Formula f, int times) {
  for (int i = 0; i < times; ++i) f = next(std::move(f));
  return f;
}
Formula eventually(Formula f) { return build(Op::Eventually, "", "", std::move(f), nullptr); }
Formula always(Formula f) { return build(Op::Always, "", "", std::move(f), nullptr); }
Formula until(Formula a, Formula b) {
  return build(Op::Until, "", "", std::move(a), std::move(b));
}
Formula exists(const std::string& var, Formula body) {
  return build(Op::Exists, "", var, std::move(body), nullptr);
}
Formula forall(const std::string& var, Formula body) {
  return build(Op::Forall, "", var, std::move(body), nullptr);
}

Formula make(Op op, Formula lhs, Formula rhs) {
  return build(op, "", "", std::move(lhs), std::move(rhs));
}

bool equal(const Formula& a, const Formula& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->hash != b->hash || a->op != b->op || a->prop != b->prop || a->var != b->var)
    return false;
  return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
}

Quant dual(Quant q) { return q == Quant::Exists ? Quant::Forall : Quant::Exists; }

Formula to_formula(const Sentence& s) {
  Formula f = s.matrix;
  for (auto it = s.prefix.rbegin(); it != s.prefix.rend(); ++it)
    f = it->quant == Quant::Exists ? exists(it->var, f) : forall(it->var, f);
  return f;
}

Sentence as_sentence(const Formula& f) {
  Sentence s;
  Formula cur = f;
  while (is_quantifier(cur->op)) {
    s.prefix.push_back({cur->op == Op::Exists ? Quant::Exists : Quant::Forall, cur->var});
    cur = cur->lhs;
  }
  if (has_quantifier(cur))
    throw Error(ErrorKind::Shape, "formula is not in prenex form; use prenex()");
  s.matrix = cur;
  return s;
}

namespace {

template <typename T, typename F>
T memo_fold(const Formula& f, std::unordered_map<const Node*, T>& memo, F&& combine) {
  auto it = memo.find(f.get());
  if (it != memo.end()) return it->second;
  T v = combine(f);
  memo.emplace(f.get(), v);
  return v;
}

}  // namespace

std::set<std::string> free_vars(const Formula& f) {
  std::unordered_map<const Node*, std::set<std::string>> memo;
  std::function<std::set<std::string>(const Formula&)> go = [&](const Formula& g) {
    return memo_fold<std::set<std::string>>(g, memo, [&](const Formula& h) {
      std::set<std::string> out;
      if (h->op == Op::Atom) {
        out.insert(h->var);
      } else {
        if (h->lhs) out = go(h->lhs);
        if (h->rhs) {
          auto r = go(h->rhs);
          out.insert(r.begin(), r.end());
        }
        if (is_quantifier(h->op)) out.erase(h->var);
      }
      return out;
    });
  };
  return go(f);
}

std::set<std::pair<std::string, std::string>> atoms(const Formula& f) {
  std::set<std::pair<std::string, std::string>> out;
  std::unordered_set<const Node*> seen;
  std::vector<const Node*> stack{f.get()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!n || !seen.insert(n).second) continue;
    if (n->op == Op::Atom) out.emplace(n->prop, n->var);
    stack.push_back(n->lhs.get());
    stack.push_back(n->rhs.get());
  }
  return out;
}

std::set<std::string> propositions(const Formula& f) {
  std::set<std::string> out;
  for (const auto& [p, v] : atoms(f)) out.insert(p);
  return out;
}

bool has_quantifier(const Formula& f) {
  std::unordered_map<const Node*, bool> memo;
  std::function<bool(const Formula&)> go = [&](const Formula& g) -> bool {
    if (!g) return false;
    return memo_fold<bool>(g, memo, [&](const Formula& h) {
      return is_quantifier(h->op) || go(h->lhs) || go(h->rhs);
    });
  };
  return go(f);
}

bool is_closed(const Sentence& s) {
  std::set<std::string> bound;
  for (const auto& b : s.prefix) {
    if (!bound.insert(b.var).second) return false;
  }
  for (const auto& v : free_vars(s.matrix))
    if (!bound.count(v)) return false;
  return !has_quantifier(s.matrix);
}

std::size_t formula_size(const Formula& f) {
  std::unordered_set<Formula, FormulaHash, FormulaEq> seen;
  std::vector<Formula> stack{f};
  while (!stack.empty()) {
    Formula n = stack.back();
    stack.pop_back();
    if (!n || !seen.insert(n).second) continue;
    stack.push_back(n->lhs);
    stack.push_back(n->rhs);
  }
  return seen.size();
}

int temporal_depth(const Formula& f) {
  std::unordered_map<const Node*, int> memo;
  std::function<int(const Formula&)> go = [&](const Formula& g) -> int {
    if (!g) return 0;
    return memo_fold<int>(g, memo, [&](const Formula& h) {
      int d = std::max(go(h->lhs), go(h->rhs));
      return is_temporal(h->op) ? d + 1 : d;
    });
  };
  return go(f);
}

int temporal_depth(const Sentence& s) { return temporal_depth(s.matrix); }

std::vector<std::pair<Quant, int>> prefix_blocks(const Sentence& s) {
  std::vector<std::pair<Quant, int>> out;
  for (const auto& b : s.prefix) {
    if (!out.empty() && out.back().first == b.quant)
      ++out.back().second;
    else
      out.emplace_back(b.quant, 1);
  }
  return out;
}

int alternation_depth(const Sentence& s) {
  auto blocks = prefix_blocks(s);
  return blocks.empty() ? 0 : static_cast<int>(blocks.size()) - 1;
}

std::string classify_prefix(const Sentence& s) {
  std::string out;
  for (const auto& [q, n] : prefix_blocks(s)) {
    out += q == Quant::Exists ? "∃" : "∀";
    out += std::to_string(n);
  }
  return out;
}

std::vector<Binder> prefix_from_class(const std::string& pattern) {
  static const std::string kE = "∃", kA = "∀";
  std::vector<Binder> out;
  std::size_t i = 0;
  int counter = 0;
  while (i < pattern.size()) {
    Quant q;
    if (pattern.compare(i, kE.size(), kE) == 0) {
      q = Quant::Exists;
      i += kE.size();
    } else if (pattern.compare(i, kA.size(), kA) == 0) {
      q = Quant::Forall;
      i += kA.size();
    } else {
      throw Error(ErrorKind::InvalidArgument, "bad prefix class '" + pattern + "'");
    }
    std::size_t j = i;
    while (j < pattern.size() && std::isdigit(static_cast<unsigned char>(pattern[j]))) ++j;
    if (j == i) throw Error(ErrorKind::InvalidArgument, "missing count in '" + pattern + "'");
    int n = std::stoi(pattern.substr(i, j - i));
    for (int k = 0; k < n; ++k) out.push_back({q, "v" + std::to_string(counter++)});
    i = j;
  }
  return out;
}

namespace {

// Matches the prefix against a sequence of blocks, each allowed to be empty.
bool prefix_fits(const Sentence& s, const std::vector<Quant>& shape, int max_of_last_forall = -1) {
  std::size_t block = 0;
  int foralls = 0;
  for (const auto& b : s.prefix) {
    while (block < shape.size() && shape[block] != b.quant) ++block;
    if (block == shape.size()) return false;
    if (b.quant == Quant::Forall) ++foralls;
  }
  return max_of_last_forall < 0 || foralls <= max_of_last_forall;
}

}  // namespace

bool is_exists_star(const Sentence& s) { return prefix_fits(s, {Quant::Exists}); }
bool is_forall_star(const Sentence& s) { return prefix_fits(s, {Quant::Forall}); }
bool is_exists_forall(const Sentence& s) {
  return prefix_fits(s, {Quant::Exists, Quant::Forall});
}
bool is_forall_exists(const Sentence& s) {
  return prefix_fits(s, {Quant::Forall, Quant::Exists});
}
bool is_exists_forall1_exists(const Sentence& s) {
  return prefix_fits(s, {Quant::Exists, Quant::Forall, Quant::Exists}, 1);
}

namespace {

bool is_propositional(const Formula& f) {
  switch (f->op) {
    case Op::Atom:
    case Op::True:
    case Op::False:
      return true;
    case Op::Not:
      return is_propositional(f->lhs);
    case Op::And:
    case Op::Or:
    case Op::Implies:
    case Op::Iff:
    case Op::Xor:
      return is_propositional(f->lhs) && is_propositional(f->rhs);
    default:
      return false;
  }
}

bool fragment_level(const Formula& f, Fragment which) {
  switch (f->op) {
    case Op::Atom:
    case Op::True:
    case Op::False:
      return true;
    case Op::Not:
      return fragment_level(f->lhs, which);
    case Op::And:
    case Op::Or:
    case Op::Implies:
    case Op::Iff:
    case Op::Xor:
      return fragment_level(f->lhs, which) && fragment_level(f->rhs, which);
    case Op::Eventually:
    case Op::Always:
      return is_propositional(f->lhs);
    case Op::Next: {
      if (which != Fragment::FGX1) return false;
      Formula cur = f;
      while (cur->op == Op::Next) cur = cur->lhs;
      return is_propositional(cur);
    }
    default:
      return false;
  }
}

}  // namespace

bool in_fragment(const Formula& matrix, Fragment which) {
  if (has_quantifier(matrix)) return false;
  return fragment_level(matrix, which);
}

bool in_fragment(const Sentence& s, Fragment which) { return in_fragment(s.matrix, which); }

std::string fresh_var(const std::string& base, const std::set<std::string>& used) {
  if (!used.count(base)) return base;
  for (int i = 1;; ++i) {
    std::string cand = base + std::to_string(i);
    if (!used.count(cand)) return cand;
  }
}

Formula substitute(const Formula& f, const std::string& from, const std::string& to) {
  if (from == to) return f;
  std::unordered_map<const Node*, Formula> memo;
  std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
    if (!g) return g;
    auto it = memo.find(g.get());
    if (it != memo.end()) return it->second;
    Formula out;
    switch (g->op) {
      case Op::Atom:
        out = g->var == from ? atom(g->prop, to) : g;
        break;
      case Op::True:
      case Op::False:
        out = g;
        break;
      case Op::Exists:
      case Op::Forall:
        if (g->var == from) {
          out = g;
        } else {
          if (g->var == to && free_vars(g->lhs).count(from))
            throw Error(ErrorKind::Capture,
                        "substituting " + to + " for " + from + " would be captured");
          Formula body = go(g->lhs);
          out = g->op == Op::Exists ? exists(g->var, body) : forall(g->var, body);
        }
        break;
      default: {
        Formula l = go(g->lhs), r = go(g->rhs);
        out = (l == g->lhs && r == g->rhs) ? g : make(g->op, l, r);
      }
    }
    memo.emplace(g.get(), out);
    return out;
  };
  return go(f);
}

namespace {

void reject_quantifier_under_temporal(const Formula& f, bool under) {
  if (!f) return;
  if (is_quantifier(f->op) && under)
    throw Error(ErrorKind::QuantifierUnderTemporal,
                "quantifier over " + f->var + " occurs under a temporal operator");
  bool next_under = under || is_temporal(f->op);
  reject_quantifier_under_temporal(f->lhs, next_under);
  reject_quantifier_under_temporal(f->rhs, next_under);
}

// Rewrites ->, <->, xor into not/and/or wherever a quantifier sits below them.
Formula expand_connectives(const Formula& f) {
  if (!has_quantifier(f)) return f;
  switch (f->op) {
    case Op::Implies:
      return lor(lnot(expand_connectives(f->lhs)), expand_connectives(f->rhs));
    case Op::Iff: {
      Formula a = expand_connectives(f->lhs), b = expand_connectives(f->rhs);
      return land(lor(lnot(a), b), lor(lnot(b), a));
    }
    case Op::Xor: {
      Formula a = expand_connectives(f->lhs), b = expand_connectives(f->rhs);
      return lor(land(a, lnot(b)), land(lnot(a), b));
    }
    case Op::Exists:
      return exists(f->var, expand_connectives(f->lhs));
    case Op::Forall:
      return forall(f->var, expand_connectives(f->lhs));
    case Op::Not:
      return lnot(expand_connectives(f->lhs));
    case Op::And:
    case Op::Or:
      return make(f->op, expand_connectives(f->lhs), expand_connectives(f->rhs));
    default:
      return f;
  }
}

// Gives every binder a name distinct from all other binders and from the free
// variables. Binders that are already unique keep their names.
Formula rename_apart(const Formula& f) {
  std::set<std::string> used = free_vars(f);
  std::function<Formula(const Formula&, const std::map<std::string, std::string>&)> go;
  go = [&](const Formula& g, const std::map<std::string, std::string>& env) -> Formula {
    switch (g->op) {
      case Op::Atom: {
        auto it = env.find(g->var);
        return it == env.end() || it->second == g->var ? g : atom(g->prop, it->second);
      }
      case Op::True:
      case Op::False:
        return g;
      case Op::Exists:
      case Op::Forall: {
        std::string name = fresh_var(g->var, used);
        used.insert(name);
        auto inner = env;
        inner[g->var] = name;
        Formula body = go(g->lhs, inner);
        return g->op == Op::Exists ? exists(name, body) : forall(name, body);
      }
      default: {
        Formula l = g->lhs ? go(g->lhs, env) : nullptr;
        Formula r = g->rhs ? go(g->rhs, env) : nullptr;
        return make(g->op, l, r);
      }
    }
  };
  return go(f, {});
}

Quant effective(const Formula& q, bool negated) {
  Quant k = q->op == Op::Exists ? Quant::Exists : Quant::Forall;
  return negated ? dual(k) : k;
}

// Minimal number of prefix blocks when the first block has kind Exists
// (first) or Forall (second); the first block may be empty.
std::pair<int, int> block_cost(const Formula& f, bool negated) {
  if (!has_quantifier(f)) return {0, 0};
  switch (f->op) {
    case Op::Not:
      return block_cost(f->lhs, !negated);
    case Op::And:
    case Op::Or: {
      auto a = block_cost(f->lhs, negated), b = block_cost(f->rhs, negated);
      return {std::max(a.first, b.first), std::max(a.second, b.second)};
    }
    case Op::Exists:
    case Op::Forall: {
      auto body = block_cost(f->lhs, negated);
      Quant k = effective(f, negated);
      int same = std::max(1, k == Quant::Exists ? body.first : body.second);
      int other = same + 1;
      return k == Quant::Exists ? std::pair{same, other} : std::pair{other, same};
    }
    default:
      throw Error(ErrorKind::Shape, "unexpected connective above a quantifier");
  }
}

void place(const Formula& f, Quant slot_kind, std::size_t slot, bool negated,
           std::vector<std::vector<Binder>>& slots) {
  if (!has_quantifier(f)) return;
  switch (f->op) {
    case Op::Not:
      place(f->lhs, slot_kind, slot, !negated, slots);
      return;
    case Op::And:
    case Op::Or:
      place(f->lhs, slot_kind, slot, negated, slots);
      place(f->rhs, slot_kind, slot, negated, slots);
      return;
    case Op::Exists:
    case Op::Forall: {
      Quant k = effective(f, negated);
      if (k != slot_kind) {
        place(f, dual(slot_kind), slot + 1, negated, slots);
        return;
      }
      if (slots.size() <= slot) slots.resize(slot + 1);
      slots[slot].push_back({k, f->var});
      place(f->lhs, slot_kind, slot, negated, slots);
      return;
    }
    default:
      return;
  }
}

Formula strip_quantifiers(const Formula& f) {
  if (!has_quantifier(f)) return f;
  if (is_quantifier(f->op)) return strip_quantifiers(f->lhs);
  Formula l = f->lhs ? strip_quantifiers(f->lhs) : nullptr;
  Formula r = f->rhs ? strip_quantifiers(f->rhs) : nullptr;
  return make(f->op, l, r);
}

}  // namespace

int alternation_depth(const Formula& f) {
  reject_quantifier_under_temporal(f, false);
  auto [e, a] = block_cost(expand_connectives(f), false);
  return std::max(0, std::min(e, a) - 1);
}

Sentence prenex(const Formula& f) {
  reject_quantifier_under_temporal(f, false);
  Formula g = rename_apart(expand_connectives(f));
  auto [e, a] = block_cost(g, false);
  Quant first = e <= a ? Quant::Exists : Quant::Forall;
  std::vector<std::vector<Binder>> slots;
  place(g, first, 0, false, slots);
  Sentence s;
  for (auto& slot : slots) s.prefix.insert(s.prefix.end(), slot.begin(), slot.end());
  s.matrix = strip_quantifiers(g);
  return s;
}

}  // namespace hyperltl
