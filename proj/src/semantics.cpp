#include "hyperltl/semantics.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <unordered_map>

namespace hyperltl {

namespace {

const Valuation& at(const LassoTrace& t, std::size_t j) {
  if (j < t.stem.size()) return t.stem[j];
  return t.loop[(j - t.stem.size()) % t.loop.size()];
}

struct VecHash {
  std::size_t operator()(const std::vector<int>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (int x : v) h = (h ^ static_cast<std::size_t>(x + 1)) * 1099511628211ull;
    return h;
  }
};

}  // namespace

int KripkeStructure::add_state(const std::string& name, Valuation label, bool is_initial) {
  names.push_back(name);
  labels.push_back(std::move(label));
  succ.emplace_back();
  initial.push_back(is_initial);
  return size() - 1;
}

void KripkeStructure::add_edge(int from, int to) {
  auto& s = succ.at(from);
  if (std::find(s.begin(), s.end(), to) == s.end()) s.push_back(to);
}

void KripkeStructure::validate() const {
  if (std::none_of(initial.begin(), initial.end(), [](bool b) { return b; }))
    throw Error(ErrorKind::NoInitialState, "Kripke structure has no initial state");
  for (int s = 0; s < size(); ++s)
    if (succ[s].empty())
      throw Error(ErrorKind::NoSuccessor, "state '" + names[s] + "' has no successor");
}

Valuation value_at(const LassoTrace& t, std::size_t j) { return at(t, j); }

LassoTrace canonical(const LassoTrace& t) {
  if (t.loop.empty()) throw Error(ErrorKind::EmptyLoop, "trace loop must be nonempty");
  LassoTrace out = t;
  const std::size_t n = out.loop.size();
  for (std::size_t p = 1; p <= n; ++p) {
    if (n % p != 0) continue;
    bool periodic = true;
    for (std::size_t i = p; i < n && periodic; ++i) periodic = out.loop[i] == out.loop[i - p];
    if (periodic) {
      out.loop.resize(p);
      break;
    }
  }
  while (!out.stem.empty() && out.stem.back() == out.loop.back()) {
    std::rotate(out.loop.rbegin(), out.loop.rbegin() + 1, out.loop.rend());
    out.stem.pop_back();
  }
  return out;
}

FiniteTraceModel make_model(std::vector<LassoTrace> traces) {
  for (auto& t : traces) t = canonical(t);
  std::sort(traces.begin(), traces.end());
  traces.erase(std::unique(traces.begin(), traces.end()), traces.end());
  return FiniteTraceModel{std::move(traces)};
}

Alignment align(const std::vector<const LassoTrace*>& ts, std::size_t cap) {
  Alignment al;
  for (const LassoTrace* t : ts) {
    al.stem = std::max(al.stem, t->stem.size());
    std::size_t g = std::gcd(al.period, t->loop.size());
    std::size_t m = al.period / g;
    if (m > cap / t->loop.size())
      throw Error(ErrorKind::PeriodBlowup,
                  "combined loop period exceeds cap " + std::to_string(cap));
    al.period = m * t->loop.size();
  }
  if (al.period > cap)
    throw Error(ErrorKind::PeriodBlowup, "combined loop period exceeds cap " + std::to_string(cap));
  return al;
}

Alignment align(const std::vector<LassoTrace>& ts, std::size_t cap) {
  std::vector<const LassoTrace*> ptrs;
  for (const auto& t : ts) ptrs.push_back(&t);
  return align(ptrs, cap);
}

QfEvaluator::QfEvaluator(const Formula& psi) {
  std::set<std::string> fv = free_vars(psi);
  vars_.assign(fv.begin(), fv.end());
  std::unordered_map<Formula, int, FormulaHash, FormulaEq> index;
  std::function<int(const Formula&)> go = [&](const Formula& f) -> int {
    auto it = index.find(f);
    if (it != index.end()) return it->second;
    if (is_quantifier(f->op))
      throw Error(ErrorKind::Shape, "quantifier inside a quantifier-free evaluation");
    Cell c{f->op, f->prop};
    if (f->op == Op::Atom)
      c.var = static_cast<int>(std::lower_bound(vars_.begin(), vars_.end(), f->var) - vars_.begin());
    if (f->lhs) c.lhs = go(f->lhs);
    if (f->rhs) c.rhs = go(f->rhs);
    cells_.push_back(c);
    int id = static_cast<int>(cells_.size()) - 1;
    index.emplace(f, id);
    return id;
  };
  go(psi);
}

std::vector<char> QfEvaluator::positions(const std::vector<const LassoTrace*>& traces,
                                         const Alignment& al) const {
  if (traces.size() != vars_.size())
    throw Error(ErrorKind::InvalidArgument, "trace assignment does not match free variables");
  const std::size_t H = al.horizon(), S = al.stem;
  std::vector<std::vector<char>> val(cells_.size(), std::vector<char>(H, 0));
  for (std::size_t id = 0; id < cells_.size(); ++id) {
    const Cell& c = cells_[id];
    auto& v = val[id];
    const std::vector<char>* a = c.lhs >= 0 ? &val[c.lhs] : nullptr;
    const std::vector<char>* b = c.rhs >= 0 ? &val[c.rhs] : nullptr;
    switch (c.op) {
      case Op::Atom: {
        const LassoTrace& t = *traces[c.var];
        for (std::size_t j = 0; j < H; ++j) v[j] = at(t, j).count(c.prop) ? 1 : 0;
        break;
      }
      case Op::True: std::fill(v.begin(), v.end(), 1); break;
      case Op::False: break;
      case Op::Not: for (std::size_t j = 0; j < H; ++j) v[j] = !(*a)[j]; break;
      case Op::And: for (std::size_t j = 0; j < H; ++j) v[j] = (*a)[j] && (*b)[j]; break;
      case Op::Or: for (std::size_t j = 0; j < H; ++j) v[j] = (*a)[j] || (*b)[j]; break;
      case Op::Implies: for (std::size_t j = 0; j < H; ++j) v[j] = !(*a)[j] || (*b)[j]; break;
      case Op::Iff: for (std::size_t j = 0; j < H; ++j) v[j] = (*a)[j] == (*b)[j]; break;
      case Op::Xor: for (std::size_t j = 0; j < H; ++j) v[j] = (*a)[j] != (*b)[j]; break;
      case Op::Next: for (std::size_t j = 0; j < H; ++j) v[j] = (*a)[al.succ(j)]; break;
      case Op::Eventually:
      case Op::Always: {
        bool ev = c.op == Op::Eventually;
        bool acc = !ev;
        for (std::size_t j = S; j < H; ++j) acc = ev ? (acc || (*a)[j]) : (acc && (*a)[j]);
        for (std::size_t j = S; j < H; ++j) v[j] = acc;
        for (std::size_t j = S; j-- > 0;)
          v[j] = ev ? ((*a)[j] || v[j + 1]) : ((*a)[j] && v[j + 1]);
        break;
      }
      case Op::Until: {
        // Least fixpoint on the loop needs two backward sweeps.
        for (int pass = 0; pass < 2; ++pass)
          for (std::size_t j = H; j-- > S;) v[j] = (*b)[j] || ((*a)[j] && v[al.succ(j)]);
        for (std::size_t j = S; j-- > 0;) v[j] = (*b)[j] || ((*a)[j] && v[j + 1]);
        break;
      }
      default:
        throw Error(ErrorKind::Shape, "quantifier inside a quantifier-free evaluation");
    }
  }
  return val.back();
}

bool QfEvaluator::holds(const std::vector<const LassoTrace*>& traces, std::size_t cap) const {
  return positions(traces, align(traces, cap))[0] != 0;
}

namespace {

std::vector<const LassoTrace*> bind_vars(const QfEvaluator& ev, const TraceAssignment& pi) {
  std::vector<const LassoTrace*> ts;
  for (const auto& v : ev.variables()) {
    auto it = pi.find(v);
    if (it == pi.end())
      throw Error(ErrorKind::InvalidArgument, "trace variable '" + v + "' is unassigned");
    ts.push_back(&it->second);
  }
  return ts;
}

}  // namespace

bool eval_qf(const Formula& psi, const TraceAssignment& pi, std::size_t cap) {
  QfEvaluator ev(psi);
  return ev.holds(bind_vars(ev, pi), cap);
}

std::vector<char> eval_qf_positions(const Formula& psi, const TraceAssignment& pi, Alignment& al,
                                    std::size_t cap) {
  QfEvaluator ev(psi);
  std::vector<const LassoTrace*> all;
  for (const auto& [v, t] : pi) all.push_back(&t);
  al = align(all, cap);
  return ev.positions(bind_vars(ev, pi), al);
}

struct SentenceEvaluator::Impl {
  enum class Kind { Leaf, And, Or, Quant };
  struct TNode {
    Kind kind = Kind::Leaf;
    hyperltl::Quant quant = hyperltl::Quant::Exists;
    int var = -1;
    int leaf = -1;
    std::vector<int> children;
    std::vector<int> free;  // sorted variable ids
    std::unordered_map<std::vector<int>, char, VecHash> memo;
  };

  const FiniteTraceModel& model;
  std::size_t cap;
  std::vector<QfEvaluator> leaves;
  std::vector<std::vector<int>> leaf_vars;  // variable id per evaluator slot
  std::vector<TNode> nodes;
  std::vector<int> assign;
  int root = -1;

  Impl(const Sentence& s, const FiniteTraceModel& m, std::size_t c) : model(m), cap(c) {
    if (model.traces.empty())
      throw Error(ErrorKind::EmptyModel, "satisfaction is only defined over nonempty models");
    std::map<std::string, int> ids;
    for (const auto& b : s.prefix) {
      if (ids.count(b.var))
        throw Error(ErrorKind::InvalidArgument, "variable '" + b.var + "' quantified twice");
      int id = static_cast<int>(ids.size());
      ids[b.var] = id;
    }
    assign.assign(ids.size(), -1);
    root = flatten(s.matrix, ids);
    for (std::size_t i = s.prefix.size(); i-- > 0;)
      root = push(s.prefix[i].quant, ids.at(s.prefix[i].var), root);
  }

  int add(TNode n) {
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }

  std::vector<int> merge_free(const std::vector<int>& children) {
    std::set<int> fv;
    for (int c : children) fv.insert(nodes[c].free.begin(), nodes[c].free.end());
    return {fv.begin(), fv.end()};
  }

  int junction(Kind k, std::vector<int> children) {
    if (children.size() == 1) return children[0];
    TNode n;
    n.kind = k;
    n.free = merge_free(children);
    n.children = std::move(children);
    return add(std::move(n));
  }

  // Boolean structure above the temporal leaves, with negations pushed down
  // so that quantifiers can be moved past them.
  int flatten(const Formula& f, const std::map<std::string, int>& ids, bool negated = false) {
    if (f->op == Op::Not) return flatten(f->lhs, ids, !negated);
    if (f->op == Op::Implies) {
      Kind k = negated ? Kind::And : Kind::Or;
      return junction(k, {flatten(f->lhs, ids, !negated), flatten(f->rhs, ids, negated)});
    }
    if (f->op == Op::And || f->op == Op::Or) {
      Kind k = (f->op == Op::And) != negated ? Kind::And : Kind::Or;
      std::vector<int> kids;
      std::function<void(const Formula&)> collect = [&](const Formula& g) {
        if (g->op == f->op) {
          collect(g->lhs);
          collect(g->rhs);
        } else {
          kids.push_back(flatten(g, ids, negated));
        }
      };
      collect(f);
      return junction(k, std::move(kids));
    }
    return leaf(negated ? lnot(f) : f, ids);
  }

  int leaf(const Formula& f, const std::map<std::string, int>& ids) {
    leaves.emplace_back(f);
    std::vector<int> vs;
    for (const auto& v : leaves.back().variables()) {
      auto it = ids.find(v);
      if (it == ids.end())
        throw Error(ErrorKind::InvalidArgument, "free trace variable '" + v + "' in sentence");
      vs.push_back(it->second);
    }
    leaf_vars.push_back(vs);
    TNode n;
    n.kind = Kind::Leaf;
    n.leaf = static_cast<int>(leaves.size()) - 1;
    std::sort(vs.begin(), vs.end());
    n.free = vs;
    return add(std::move(n));
  }

  bool uses(int node, int var) const {
    const auto& f = nodes[node].free;
    return std::binary_search(f.begin(), f.end(), var);
  }

  int push(hyperltl::Quant q, int var, int node) {
    if (!uses(node, var)) return node;  // vacuous over a nonempty model
    Kind k = nodes[node].kind;
    if (k == Kind::And || k == Kind::Or) {
      bool distributes = (k == Kind::And) == (q == hyperltl::Quant::Forall);
      std::vector<int> kids = nodes[node].children;
      if (distributes) {
        for (int& c : kids) c = push(q, var, c);
        return junction(k, std::move(kids));
      }
      std::vector<int> with, without;
      for (int c : kids) (uses(c, var) ? with : without).push_back(c);
      if (!without.empty()) {
        int inner = with.size() == 1 ? push(q, var, with[0]) : quant(q, var, junction(k, with));
        without.push_back(inner);
        return junction(k, std::move(without));
      }
    }
    return quant(q, var, node);
  }

  int quant(hyperltl::Quant q, int var, int body) {
    TNode n;
    n.kind = Kind::Quant;
    n.quant = q;
    n.var = var;
    n.children = {body};
    n.free = nodes[body].free;
    n.free.erase(std::find(n.free.begin(), n.free.end(), var));
    return add(std::move(n));
  }

  bool eval(int id) {
    TNode& n = nodes[id];
    std::vector<int> key;
    key.reserve(n.free.size());
    for (int v : n.free) key.push_back(assign[v]);
    auto it = n.memo.find(key);
    if (it != n.memo.end()) return it->second;
    bool r = false;
    switch (n.kind) {
      case Kind::Leaf: {
        std::vector<const LassoTrace*> ts;
        for (int v : leaf_vars[n.leaf]) ts.push_back(&model.traces[assign[v]]);
        r = leaves[n.leaf].holds(ts, cap);
        break;
      }
      case Kind::And:
        r = true;
        for (int c : n.children)
          if (!eval(c)) {
            r = false;
            break;
          }
        break;
      case Kind::Or:
        for (int c : n.children)
          if (eval(c)) {
            r = true;
            break;
          }
        break;
      case Kind::Quant: {
        bool ex = n.quant == hyperltl::Quant::Exists;
        r = !ex;
        int var = n.var, body = n.children[0];
        for (std::size_t t = 0; t < model.traces.size(); ++t) {
          assign[var] = static_cast<int>(t);
          if (eval(body) == ex) {
            r = ex;
            break;
          }
        }
        assign[var] = -1;
        break;
      }
    }
    nodes[id].memo.emplace(std::move(key), r);
    return r;
  }
};

SentenceEvaluator::SentenceEvaluator(const Sentence& s, const FiniteTraceModel& model,
                                     std::size_t cap)
    : impl_(std::make_unique<Impl>(s, model, cap)) {}

SentenceEvaluator::~SentenceEvaluator() = default;

bool SentenceEvaluator::evaluate() { return impl_->eval(impl_->root); }

bool eval_sentence(const Sentence& s, const FiniteTraceModel& model, std::size_t cap) {
  return SentenceEvaluator(s, model, cap).evaluate();
}

FiniteTraceModel kripke_lassos(const KripkeStructure& k, int stem_bound, int loop_bound) {
  if (stem_bound < 0 || loop_bound < 1)
    throw Error(ErrorKind::InvalidArgument, "lasso bounds need stem >= 0 and loop >= 1");
  std::set<LassoTrace> found;
  std::vector<int> path;
  const int max_len = stem_bound + loop_bound;
  auto emit = [&]() {
    const int n = static_cast<int>(path.size());
    for (int s = std::max(0, n - loop_bound); s <= std::min(stem_bound, n - 1); ++s) {
      const auto& out = k.succ[path.back()];
      if (std::find(out.begin(), out.end(), path[s]) == out.end()) continue;
      LassoTrace t;
      for (int i = 0; i < s; ++i) t.stem.push_back(k.labels[path[i]]);
      for (int i = s; i < n; ++i) t.loop.push_back(k.labels[path[i]]);
      found.insert(canonical(t));
    }
  };
  std::function<void()> dfs = [&]() {
    emit();
    if (static_cast<int>(path.size()) == max_len) return;
    for (int nxt : k.succ[path.back()]) {
      path.push_back(nxt);
      dfs();
      path.pop_back();
    }
  };
  for (int q = 0; q < k.size(); ++q) {
    if (!k.initial[q]) continue;
    path = {q};
    dfs();
  }
  return FiniteTraceModel{{found.begin(), found.end()}};
}

}  // namespace hyperltl
