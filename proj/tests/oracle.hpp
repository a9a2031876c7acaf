#pragma once

// Brute-force reference implementations used only by tests. None of these
// call into the library's evaluator, automata or deciders.

#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hyperltl/formula.hpp"
#include "hyperltl/types.hpp"

namespace oracle {

using hyperltl::Formula;
using hyperltl::LassoTrace;
using hyperltl::Op;
using hyperltl::Valuation;

inline const Valuation& letter(const LassoTrace& t, std::size_t j) {
  if (j < t.stem.size()) return t.stem[j];
  return t.loop[(j - t.stem.size()) % t.loop.size()];
}

using Assignment = std::map<std::string, const LassoTrace*>;

struct Horizon {
  std::size_t stem = 0;
  std::size_t period = 1;
};

inline Horizon horizon_of(const Assignment& pi) {
  Horizon h;
  for (const auto& [v, t] : pi) {
    h.stem = std::max(h.stem, t->stem.size());
    h.period = std::lcm(h.period, t->loop.size());
  }
  return h;
}

// Direct semantics on the unrolled traces. Every position at or beyond the
// common stem repeats with the common period, so searching one period past
// max(j, stem) decides the temporal operators.
inline bool holds(const Formula& f, const Assignment& pi, std::size_t j, const Horizon& h) {
  switch (f->op) {
    case Op::Atom: return letter(*pi.at(f->var), j).count(f->prop) > 0;
    case Op::True: return true;
    case Op::False: return false;
    case Op::Not: return !holds(f->lhs, pi, j, h);
    case Op::And: return holds(f->lhs, pi, j, h) && holds(f->rhs, pi, j, h);
    case Op::Or: return holds(f->lhs, pi, j, h) || holds(f->rhs, pi, j, h);
    case Op::Implies: return !holds(f->lhs, pi, j, h) || holds(f->rhs, pi, j, h);
    case Op::Iff: return holds(f->lhs, pi, j, h) == holds(f->rhs, pi, j, h);
    case Op::Xor: return holds(f->lhs, pi, j, h) != holds(f->rhs, pi, j, h);
    case Op::Next: return holds(f->lhs, pi, j + 1, h);
    case Op::Eventually: {
      std::size_t end = std::max(j, h.stem) + h.period;
      for (std::size_t k = j; k < end; ++k)
        if (holds(f->lhs, pi, k, h)) return true;
      return false;
    }
    case Op::Always: {
      std::size_t end = std::max(j, h.stem) + h.period;
      for (std::size_t k = j; k < end; ++k)
        if (!holds(f->lhs, pi, k, h)) return false;
      return true;
    }
    case Op::Until: {
      std::size_t end = std::max(j, h.stem) + h.period;
      for (std::size_t k = j; k < end; ++k) {
        if (holds(f->rhs, pi, k, h)) return true;
        if (!holds(f->lhs, pi, k, h)) return false;
      }
      return false;
    }
    default: throw std::logic_error("oracle: quantifier in quantifier-free position");
  }
}

inline bool holds(const Formula& f, const Assignment& pi) { return holds(f, pi, 0, horizon_of(pi)); }

inline bool holds(const Formula& f, const std::map<std::string, LassoTrace>& pi) {
  Assignment a;
  for (const auto& [v, t] : pi) a[v] = &t;
  return holds(f, a);
}

// Quantifiers expanded literally, no memoization or miniscoping.
inline bool models(const std::vector<LassoTrace>& model, const hyperltl::Sentence& s) {
  Assignment pi;
  std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
    if (i == s.prefix.size()) return holds(s.matrix, pi);
    bool ex = s.prefix[i].quant == hyperltl::Quant::Exists;
    for (const auto& t : model) {
      pi[s.prefix[i].var] = &t;
      if (go(i + 1) == ex) {
        pi.erase(s.prefix[i].var);
        return ex;
      }
    }
    pi.erase(s.prefix[i].var);
    return !ex;
  };
  return go(0);
}

inline std::vector<Valuation> all_valuations(const std::vector<std::string>& props) {
  std::vector<Valuation> out;
  for (unsigned m = 0; m < (1u << props.size()); ++m) {
    Valuation v;
    for (std::size_t i = 0; i < props.size(); ++i)
      if (m >> i & 1) v.insert(props[i]);
    out.push_back(v);
  }
  return out;
}

// Unrolled prefix long enough to identify a lasso among lassos of total
// length <= n: by Fine and Wilf, 3n positions determine the trace.
inline std::vector<Valuation> fingerprint(const LassoTrace& t, std::size_t n) {
  std::vector<Valuation> out;
  for (std::size_t j = 0; j < 3 * n + 2; ++j) out.push_back(letter(t, j));
  return out;
}

// All distinct lassos x.y^omega with |x| + |y| <= max_len.
inline std::vector<LassoTrace> all_lassos(const std::vector<std::string>& props,
                                          std::size_t max_len) {
  auto vals = all_valuations(props);
  std::set<std::vector<Valuation>> seen;
  std::vector<LassoTrace> out;
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::size_t> idx(len, 0);
    while (true) {
      for (std::size_t s = 0; s < len; ++s) {
        LassoTrace t;
        for (std::size_t i = 0; i < s; ++i) t.stem.push_back(vals[idx[i]]);
        for (std::size_t i = s; i < len; ++i) t.loop.push_back(vals[idx[i]]);
        if (seen.insert(fingerprint(t, max_len)).second) out.push_back(t);
      }
      std::size_t k = 0;
      while (k < len && ++idx[k] == vals.size()) idx[k++] = 0;
      if (k == len) break;
    }
  }
  return out;
}

// Calls visit on every nonempty subset of items with at most max_size elements.
template <typename T>
bool for_each_subset(const std::vector<T>& items, std::size_t max_size,
                     const std::function<bool(const std::vector<T>&)>& visit) {
  std::vector<T> cur;
  std::function<bool(std::size_t)> go = [&](std::size_t start) -> bool {
    if (!cur.empty() && visit(cur)) return true;
    if (cur.size() == max_size) return false;
    for (std::size_t i = start; i < items.size(); ++i) {
      cur.push_back(items[i]);
      if (go(i + 1)) return true;
      cur.pop_back();
    }
    return false;
  };
  return go(0);
}

// Random formula generator shared by property tests.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
  bool coin() { return pick(2) == 0; }

  // Quantifier-free formula with at most `size` nodes.
  Formula qf(int size, const std::vector<std::string>& props, const std::vector<std::string>& vars,
             bool temporal = true, bool allow_until = true, bool allow_next = true) {
    using namespace hyperltl;
    auto leaf = [&]() {
      int r = pick(12);
      if (r == 0) return top();
      if (r == 1) return bottom();
      return atom(props[pick(static_cast<int>(props.size()))], vars[pick(static_cast<int>(vars.size()))]);
    };
    if (size <= 1) return leaf();
    std::vector<Op> ops = {Op::Not, Op::And, Op::Or, Op::Implies, Op::Iff, Op::Xor};
    if (temporal) {
      ops.push_back(Op::Eventually);
      ops.push_back(Op::Always);
      if (allow_next) ops.push_back(Op::Next);
      if (allow_until) ops.push_back(Op::Until);
    }
    Op op = ops[pick(static_cast<int>(ops.size()))];
    if (is_unary(op)) return make(op, qf(size - 1, props, vars, temporal, allow_until, allow_next));
    int left = 1 + pick(std::max(1, size - 2));
    int right = std::max(1, size - 1 - left);
    return make(op, qf(left, props, vars, temporal, allow_until, allow_next),
                qf(right, props, vars, temporal, allow_until, allow_next));
  }

  // Boolean combination of F beta, G beta and, optionally, bare or X^k
  // state formulas; at most `size` nodes.
  Formula fg(int size, const std::vector<std::string>& props, const std::vector<std::string>& vars,
             bool allow_next = false, bool allow_bare = true) {
    using namespace hyperltl;
    auto state = [&](int n) { return qf(std::max(1, n), props, vars, false); };
    if (size <= 2 || pick(3) == 0) {
      int body = std::max(1, size - 1);
      int r = pick(allow_next ? 5 : allow_bare ? 4 : 3);
      if (r == 0) return eventually(state(body));
      if (r == 1) return always(state(body));
      if (r == 2) return lnot(eventually(state(std::max(1, body - 1))));
      if (r == 3) return state(body);
      return next(state(std::max(1, body - 1)), 1 + pick(2));
    }
    std::vector<Op> ops = {Op::Not, Op::And, Op::Or, Op::Implies, Op::Iff, Op::Xor, Op::And, Op::Or};
    Op op = ops[pick(static_cast<int>(ops.size()))];
    if (op == Op::Not) return lnot(fg(size - 1, props, vars, allow_next, allow_bare));
    int left = 1 + pick(std::max(1, size - 2));
    int right = std::max(1, size - 1 - left);
    return make(op, fg(left, props, vars, allow_next, allow_bare),
                fg(right, props, vars, allow_next, allow_bare));
  }

  LassoTrace lasso(const std::vector<std::string>& props, int max_stem, int max_loop) {
    auto vals = all_valuations(props);
    LassoTrace t;
    int s = pick(max_stem + 1), l = 1 + pick(max_loop);
    for (int i = 0; i < s; ++i) t.stem.push_back(vals[pick(static_cast<int>(vals.size()))]);
    for (int i = 0; i < l; ++i) t.loop.push_back(vals[pick(static_cast<int>(vals.size()))]);
    return t;
  }
};

}  // namespace oracle
