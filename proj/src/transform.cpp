#include "hyperltl/transform.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include "hyperltl/error.hpp"
#include "hyperltl/semantics.hpp"

namespace hyperltl {

namespace {

std::set<std::string> prefix_vars(const Sentence& s) {
  std::set<std::string> out;
  for (const auto& b : s.prefix) out.insert(b.var);
  return out;
}

Formula rename_vars(const Formula& f, const std::map<std::string, std::string>& to) {
  std::unordered_map<const Node*, Formula> memo;
  std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
    auto it = memo.find(g.get());
    if (it != memo.end()) return it->second;
    Formula r;
    switch (g->op) {
      case Op::Atom: {
        auto m = to.find(g->var);
        r = m == to.end() ? g : atom(g->prop, m->second);
        break;
      }
      case Op::True:
      case Op::False: r = g; break;
      case Op::Exists:
      case Op::Forall:
        throw Error(ErrorKind::Shape, "renaming expects a quantifier-free matrix");
      default: r = make(g->op, g->lhs ? go(g->lhs) : nullptr, g->rhs ? go(g->rhs) : nullptr);
    }
    memo.emplace(g.get(), r);
    return r;
  };
  return go(f);
}

Formula rename_props(const Formula& f, const std::function<Formula(const Formula&)>& on_atom) {
  std::unordered_map<const Node*, Formula> memo;
  std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
    auto it = memo.find(g.get());
    if (it != memo.end()) return it->second;
    Formula r;
    if (g->op == Op::Atom) r = on_atom(g);
    else if (g->op == Op::True || g->op == Op::False) r = g;
    else r = make(g->op, g->lhs ? go(g->lhs) : nullptr, g->rhs ? go(g->rhs) : nullptr);
    memo.emplace(g.get(), r);
    return r;
  };
  return go(f);
}

// Does (model, fixed) satisfy prefix[from..] . matrix? Plain expansion.
bool holds_under(const std::vector<Binder>& prefix, std::size_t from, const Formula& matrix,
                 const FiniteTraceModel& model, TraceAssignment& fixed) {
  if (from == prefix.size()) return eval_qf(matrix, fixed);
  bool ex = prefix[from].quant == Quant::Exists;
  const std::string& v = prefix[from].var;
  auto saved = fixed.find(v) == fixed.end() ? std::optional<LassoTrace>() : fixed.at(v);
  bool result = !ex;
  for (const auto& t : model.traces) {
    fixed[v] = t;
    if (holds_under(prefix, from + 1, matrix, model, fixed) == ex) {
      result = ex;
      break;
    }
  }
  if (saved) fixed[v] = *saved;
  else fixed.erase(v);
  return result;
}

Formula conj(const std::vector<Formula>& fs) { return fs.empty() ? top() : land(fs); }
Formula disj(const std::vector<Formula>& fs) { return fs.empty() ? bottom() : lor(fs); }

// Smallest r such that no proposition starts with base + r.
std::string unused_marker_base(const std::set<std::string>& props, const std::string& base) {
  for (int r = 0;; ++r) {
    std::string cand = base + std::to_string(r) + "_";
    bool clash = std::any_of(props.begin(), props.end(),
                             [&](const std::string& p) { return p.rfind(cand, 0) == 0; });
    if (!clash) return cand;
  }
}

bool is_prop_only(const Formula& f) {
  switch (f->op) {
    case Op::Atom:
    case Op::True:
    case Op::False: return true;
    case Op::Not: return is_prop_only(f->lhs);
    case Op::And:
    case Op::Or:
    case Op::Implies:
    case Op::Iff:
    case Op::Xor: return is_prop_only(f->lhs) && is_prop_only(f->rhs);
    default: return false;
  }
}

// Copies of t with extra propositions added at the given positions; the loop
// is re-cut after the last annotated position so the result stays a lasso.
LassoTrace annotate(const LassoTrace& t, std::size_t upto,
                    const std::map<std::size_t, Valuation>& extra) {
  LassoTrace out;
  for (std::size_t j = 0; j < upto; ++j) {
    Valuation v = value_at(t, j);
    auto it = extra.find(j);
    if (it != extra.end()) v.insert(it->second.begin(), it->second.end());
    out.stem.push_back(std::move(v));
  }
  for (std::size_t j = 0; j < t.loop.size(); ++j) out.loop.push_back(value_at(t, upto + j));
  return canonical(out);
}

std::size_t pow_checked(std::size_t base, std::size_t exp, std::size_t cap) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > cap / base) return cap + 1;
    r *= base;
  }
  return r;
}

void for_each_tuple(std::size_t n, std::size_t m,
                    const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    visit(idx);
    std::size_t k = 0;
    while (k < n && ++idx[k] == m) idx[k++] = 0;
    if (k == n) return;
  }
}

}  // namespace

// ---------- quantifier expansion ----------

Sentence expand_quantifiers(const Sentence& s, int k, std::size_t node_cap) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "expansion needs k >= 1");
  std::size_t leaves = pow_checked(static_cast<std::size_t>(k), s.prefix.size(), node_cap);
  if (leaves > node_cap || leaves * formula_size(s.matrix) > node_cap)
    throw Error(ErrorKind::SizeBlowup, "expanding " + std::to_string(s.prefix.size()) +
                                           " quantifiers over " + std::to_string(k) +
                                           " traces exceeds the node cap");
  std::vector<std::string> names;
  for (int i = 1; i <= k; ++i) names.push_back("t" + std::to_string(i));
  std::map<std::string, std::string> to;
  std::function<Formula(std::size_t)> go = [&](std::size_t i) -> Formula {
    if (i == s.prefix.size()) return rename_vars(s.matrix, to);
    std::vector<Formula> parts;
    for (const auto& n : names) {
      to[s.prefix[i].var] = n;
      parts.push_back(go(i + 1));
    }
    to.erase(s.prefix[i].var);
    return s.prefix[i].quant == Quant::Exists ? disj(parts) : conj(parts);
  };
  Sentence out;
  for (const auto& n : names) out.prefix.push_back({Quant::Exists, n});
  out.matrix = go(0);
  return out;
}

// ---------- temporal depth two ----------

std::string depth2_marker(const Formula& sub) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "@t%012llx",
                static_cast<unsigned long long>(sub->hash & 0xffffffffffffull));
  return buf;
}

namespace {

std::vector<Formula> distinct_subformulas(const Formula& f) {
  std::vector<Formula> order;
  std::unordered_map<Formula, int, FormulaHash, FormulaEq> seen;
  std::function<void(const Formula&)> go = [&](const Formula& g) {
    if (seen.count(g)) return;
    if (g->lhs) go(g->lhs);
    if (g->rhs) go(g->rhs);
    seen.emplace(g, 0);
    order.push_back(g);
  };
  go(f);
  return order;
}

struct Depth2Plan {
  std::vector<Formula> subs;
  std::unordered_map<Formula, std::string, FormulaHash, FormulaEq> name;
};

Depth2Plan plan_depth2(const Sentence& s) {
  if (has_quantifier(s.matrix)) throw Error(ErrorKind::Shape, "expected a prenex sentence");
  Depth2Plan p;
  p.subs = distinct_subformulas(s.matrix);
  std::set<std::string> used = propositions(s.matrix);
  for (const auto& sub : p.subs) {
    std::string m = depth2_marker(sub);
    while (used.count(m)) m += "x";  // hash collision with another subformula
    used.insert(m);
    p.name.emplace(sub, m);
  }
  return p;
}

}  // namespace

Sentence reduce_depth2(const Sentence& s) {
  Depth2Plan p = plan_depth2(s);
  std::set<std::string> used = prefix_vars(s);
  for (const auto& v : free_vars(s.matrix)) used.insert(v);
  std::string tau = fresh_var("w", used);
  auto m = [&](const Formula& sub) { return atom(p.name.at(sub), tau); };
  std::vector<Formula> parts{m(s.matrix)};
  for (const auto& sub : p.subs) {
    Formula rhs;
    switch (sub->op) {
      case Op::Atom: rhs = sub; break;
      case Op::True:
      case Op::False: rhs = sub; break;
      default:
        rhs = make(sub->op, sub->lhs ? m(sub->lhs) : nullptr, sub->rhs ? m(sub->rhs) : nullptr);
    }
    parts.push_back(always(liff(m(sub), rhs)));
  }
  Sentence out;
  out.prefix = s.prefix;
  out.prefix.push_back({Quant::Exists, tau});
  out.matrix = conj(parts);
  return out;
}

FiniteTraceModel witness_model_depth2(const FiniteTraceModel& t, const Sentence& s) {
  if (!eval_sentence(s, t)) throw Error(ErrorKind::NotAModel, "model does not satisfy the sentence");
  Depth2Plan p = plan_depth2(s);
  const std::size_t n = s.prefix.size();
  std::vector<LassoTrace> out;
  auto build = [&](const std::vector<std::size_t>& idx, const LassoTrace& base) {
    TraceAssignment pi;
    for (std::size_t i = 0; i < n; ++i) pi[s.prefix[i].var] = t.traces[idx[i]];
    std::vector<const LassoTrace*> all{&base};
    for (const auto& [v, tr] : pi) all.push_back(&tr);
    Alignment al = align(all);
    LassoTrace w;
    for (std::size_t j = 0; j < al.horizon(); ++j) {
      Valuation v = value_at(base, j);
      (j < al.stem ? w.stem : w.loop).push_back(v);
    }
    for (const auto& sub : p.subs) {
      QfEvaluator ev(sub);
      std::vector<const LassoTrace*> args;
      for (const auto& v : ev.variables()) args.push_back(&pi.at(v));
      std::vector<char> val = ev.positions(args, al);
      for (std::size_t j = 0; j < al.horizon(); ++j)
        if (val[j]) (j < al.stem ? w.stem[j] : w.loop[j - al.stem]).insert(p.name.at(sub));
    }
    out.push_back(canonical(w));
  };
  if (n == 0) {
    for (const auto& tr : t.traces) build({}, tr);
  } else {
    for_each_tuple(n, t.traces.size(),
                   [&](const std::vector<std::size_t>& idx) { build(idx, t.traces[idx[0]]); });
  }
  FiniteTraceModel result = make_model(out);
  if (!eval_sentence(reduce_depth2(s), result))
    throw std::logic_error("depth-two witness model fails the reduced sentence");
  return result;
}

// ---------- forall* exists* ----------

namespace {

// Index of the first existential if it is critical, else -1.
int first_critical(const Sentence& s) {
  for (std::size_t i = 0; i < s.prefix.size(); ++i) {
    if (s.prefix[i].quant != Quant::Exists) continue;
    for (std::size_t j = i + 1; j < s.prefix.size(); ++j)
      if (s.prefix[j].quant == Quant::Forall) return static_cast<int>(i);
    return -1;
  }
  return -1;
}

std::string skolem_marker(const std::string& base, int i) { return base + std::to_string(i); }

struct Round {
  Sentence out;
  std::vector<std::string> markers;  // m^1 .. m^{n+1}
};

Round skolem_round(const Sentence& s, int e, const std::string& base) {
  Round r;
  std::set<std::string> used = prefix_vars(s);
  std::vector<std::string> primed;
  std::vector<Formula> mark_primed, mark_orig;
  for (int i = 0; i <= e; ++i) r.markers.push_back(skolem_marker(base, i + 1));
  for (int i = 0; i <= e; ++i) {
    std::string v = fresh_var(s.prefix[i].var + "'", used);
    used.insert(v);
    primed.push_back(v);
    mark_primed.push_back(atom(r.markers[i], v));
    mark_orig.push_back(atom(r.markers[i], s.prefix[i].var));
  }
  for (int i = 0; i < e; ++i) r.out.prefix.push_back({Quant::Forall, primed[i]});
  for (int i = 0; i <= e; ++i) r.out.prefix.push_back({Quant::Forall, s.prefix[i].var});
  for (std::size_t i = e + 1; i < s.prefix.size(); ++i) r.out.prefix.push_back(s.prefix[i]);
  r.out.prefix.push_back({Quant::Exists, primed[e]});
  r.out.matrix = land(eventually(conj(mark_primed)),
                      limplies(eventually(conj(mark_orig)), s.matrix));
  return r;
}

std::set<std::string> all_props(const Sentence& s) { return propositions(s.matrix); }

}  // namespace

int critical_existentials(const Sentence& s) {
  int count = 0;
  bool universal_after = false;
  for (auto it = s.prefix.rbegin(); it != s.prefix.rend(); ++it) {
    if (it->quant == Quant::Forall) universal_after = true;
    else if (universal_after) ++count;
  }
  return count;
}

Sentence to_forall_exists(const Sentence& s) {
  if (has_quantifier(s.matrix)) throw Error(ErrorKind::Shape, "expected a prenex sentence");
  Sentence cur = s;
  for (int e = first_critical(cur); e >= 0; e = first_critical(cur)) {
    std::string base = unused_marker_base(all_props(cur), "@s");
    cur = skolem_round(cur, e, base).out;
  }
  return cur;
}

FiniteTraceModel witness_model_forall_exists(const FiniteTraceModel& t, const Sentence& s) {
  if (!eval_sentence(s, t)) throw Error(ErrorKind::NotAModel, "model does not satisfy the sentence");
  Sentence cur = s;
  FiniteTraceModel model = t;
  for (int e = first_critical(cur); e >= 0; e = first_critical(cur)) {
    std::string base = unused_marker_base(all_props(cur), "@s");
    Round r = skolem_round(cur, e, base);
    const std::size_t n = static_cast<std::size_t>(e);
    const std::size_t m = model.traces.size();
    std::size_t stem = 0;
    for (const auto& tr : model.traces) stem = std::max(stem, tr.stem.size());
    std::size_t tuples = pow_checked(m, n, 1u << 20);
    if (tuples > (1u << 20)) throw Error(ErrorKind::SizeBlowup, "too many Skolem tuples");
    // Skolem tuple number j is marked at position stem + j on each component.
    std::vector<std::map<std::size_t, Valuation>> extra(m);
    std::size_t j = 0;
    for_each_tuple(n, m, [&](const std::vector<std::size_t>& idx) {
      TraceAssignment pi;
      for (std::size_t i = 0; i < n; ++i) pi[cur.prefix[i].var] = model.traces[idx[i]];
      std::size_t choice = m;
      for (std::size_t c = 0; c < m && choice == m; ++c) {
        pi[cur.prefix[n].var] = model.traces[c];
        if (holds_under(cur.prefix, n + 1, cur.matrix, model, pi)) choice = c;
      }
      if (choice == m) throw std::logic_error("no Skolem witness in a satisfying model");
      for (std::size_t i = 0; i < n; ++i) extra[idx[i]][stem + j].insert(r.markers[i]);
      extra[choice][stem + j].insert(r.markers[n]);
      ++j;
    });
    std::vector<LassoTrace> next;
    for (std::size_t c = 0; c < m; ++c) next.push_back(annotate(model.traces[c], stem + j, extra[c]));
    model = make_model(next);
    cur = r.out;
  }
  if (!eval_sentence(cur, model))
    throw std::logic_error("Skolem witness model fails the transformed sentence");
  return model;
}

// ---------- two universals ----------

std::string merged_prop(const std::string& prop, int component) {
  std::string body = !prop.empty() && prop[0] == '@' ? "m." + prop.substr(1) : prop;
  return "@" + std::to_string(component) + "." + body;
}

namespace {

// Inverse of merged_prop for component 1; empty when prop is not of that form.
std::string first_component(const std::string& merged) {
  const std::string head = "@1.";
  if (merged.rfind(head, 0) != 0) return "";
  std::string body = merged.substr(head.size());
  if (body.rfind("m.", 0) == 0) return "@" + body.substr(2);
  return body;
}

}  // namespace

Sentence merge_universals(const Sentence& s) {
  if (!is_forall_exists(s)) throw Error(ErrorKind::Shape, "expected a forall* exists* prefix");
  std::size_t n = 0;
  while (n < s.prefix.size() && s.prefix[n].quant == Quant::Forall) ++n;
  if (n <= 2) return s;
  std::set<std::string> used = prefix_vars(s);
  std::string pi = fresh_var("u", used);
  used.insert(pi);
  std::string pi2 = fresh_var("v", used);
  used.insert(pi2);
  std::map<std::string, int> component;
  for (std::size_t i = 0; i < n; ++i) component[s.prefix[i].var] = static_cast<int>(i) + 1;

  std::set<std::string> ap = propositions(s.matrix);
  Sentence out;
  out.prefix.push_back({Quant::Forall, pi});
  out.prefix.push_back({Quant::Forall, pi2});
  for (std::size_t i = n; i < s.prefix.size(); ++i) out.prefix.push_back(s.prefix[i]);
  std::vector<Formula> shuffle;
  for (std::size_t i1 = 1; i1 <= n; ++i1)
    for (std::size_t i2 = 1; i2 <= n; ++i2) {
      std::string tau = fresh_var("s" + std::to_string(i1) + "_" + std::to_string(i2), used);
      used.insert(tau);
      out.prefix.push_back({Quant::Exists, tau});
      std::vector<Formula> body;
      for (const auto& a : ap) {
        int c1 = static_cast<int>(i1), c2 = static_cast<int>(i2);
        body.push_back(liff(atom(merged_prop(a, c1), tau), atom(merged_prop(a, c2), pi2)));
        for (std::size_t j = 1; j <= n; ++j) {
          if (j == i1) continue;
          int cj = static_cast<int>(j);
          body.push_back(liff(atom(merged_prop(a, cj), tau), atom(merged_prop(a, cj), pi)));
        }
      }
      if (!body.empty()) shuffle.push_back(always(conj(body)));
    }
  Formula relabeled = rename_props(s.matrix, [&](const Formula& a) {
    auto it = component.find(a->var);
    if (it != component.end()) return atom(merged_prop(a->prop, it->second), pi);
    return atom(merged_prop(a->prop, 1), a->var);
  });
  out.matrix = land(conj(shuffle), relabeled);
  return out;
}

LassoTrace merge_traces(const std::vector<LassoTrace>& tuple) {
  std::vector<const LassoTrace*> ptrs;
  for (const auto& t : tuple) ptrs.push_back(&t);
  Alignment al = align(ptrs);
  LassoTrace out;
  for (std::size_t j = 0; j < al.horizon(); ++j) {
    Valuation v;
    for (std::size_t i = 0; i < tuple.size(); ++i)
      for (const auto& a : value_at(tuple[i], j)) v.insert(merged_prop(a, static_cast<int>(i) + 1));
    (j < al.stem ? out.stem : out.loop).push_back(std::move(v));
  }
  return canonical(out);
}

FiniteTraceModel merged_model(const FiniteTraceModel& t, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "merging needs n >= 1");
  std::vector<LassoTrace> out;
  for_each_tuple(static_cast<std::size_t>(n), t.traces.size(), [&](const std::vector<std::size_t>& idx) {
    std::vector<LassoTrace> tuple;
    for (auto i : idx) tuple.push_back(t.traces[i]);
    out.push_back(merge_traces(tuple));
  });
  return make_model(out);
}

FiniteTraceModel unmerge_model(const FiniteTraceModel& t) {
  auto proj = [](const Valuation& v) {
    Valuation out;
    for (const auto& p : v) {
      std::string a = first_component(p);
      if (!a.empty()) out.insert(a);
    }
    return out;
  };
  std::vector<LassoTrace> out;
  for (const auto& tr : t.traces) {
    LassoTrace u;
    for (const auto& v : tr.stem) u.stem.push_back(proj(v));
    for (const auto& v : tr.loop) u.loop.push_back(proj(v));
    out.push_back(u);
  }
  return make_model(out);
}

Sentence normalize_forall2_exists(const Sentence& s, bool skip_if_shallow) {
  Sentence cur = skip_if_shallow && temporal_depth(s) <= 2 ? s : reduce_depth2(s);
  cur = to_forall_exists(cur);
  return merge_universals(cur);
}

// ---------- next elimination ----------

namespace {

struct XPlan {
  int depth = 0;
  std::vector<std::string> markers;  // m^0 .. m^d
};

XPlan plan_xelim(const Sentence& s) {
  if (!in_fragment(s, Fragment::FGX1))
    throw Error(ErrorKind::Shape, "next elimination needs a depth-one F/G/X* matrix");
  if (!is_exists_forall1_exists(s))
    throw Error(ErrorKind::Shape, "next elimination needs an exists* forall exists* prefix");
  XPlan p;
  p.depth = next_depth(s.matrix);
  std::string base = unused_marker_base(propositions(s.matrix), "@x");
  for (int k = 0; k <= p.depth; ++k) p.markers.push_back(base + std::to_string(k));
  return p;
}

}  // namespace

int next_depth(const Formula& matrix) {
  if (matrix->op == Op::Next) {
    int k = 0;
    Formula cur = matrix;
    while (cur->op == Op::Next) {
      ++k;
      cur = cur->lhs;
    }
    return k;
  }
  int d = 0;
  if (matrix->lhs) d = std::max(d, next_depth(matrix->lhs));
  if (matrix->rhs) d = std::max(d, next_depth(matrix->rhs));
  return d;
}

Sentence eliminate_x(const Sentence& s, bool literal) {
  if (s.prefix.empty()) return s;
  XPlan p = plan_xelim(s);
  std::set<std::string> used = prefix_vars(s);
  std::string tau0 = fresh_var("z", used);
  used.insert(tau0);

  std::function<Formula(const Formula&)> rewrite = [&](const Formula& f) -> Formula {
    if (is_prop_only(f)) return always(limplies(atom(p.markers[0], tau0), f));
    switch (f->op) {
      case Op::Next: {
        int k = 0;
        Formula cur = f;
        while (cur->op == Op::Next) {
          ++k;
          cur = cur->lhs;
        }
        return always(limplies(atom(p.markers[k], tau0), cur));
      }
      case Op::Eventually:
      case Op::Always: return f;
      default:
        return make(f->op, f->lhs ? rewrite(f->lhs) : nullptr, f->rhs ? rewrite(f->rhs) : nullptr);
    }
  };

  std::set<std::string> ap = propositions(s.matrix);
  ap.insert(p.markers.begin(), p.markers.end());
  auto differs = [&](const std::string& x) {
    std::vector<Formula> bits;
    for (const auto& a : ap) bits.push_back(lxor(atom(a, x), atom(a, tau0)));
    return eventually(disj(bits));
  };

  Sentence out;
  out.prefix.push_back({Quant::Exists, tau0});
  std::string universal;
  std::vector<std::string> witnesses;
  for (const auto& b : s.prefix) {
    out.prefix.push_back(b);
    if (b.quant == Quant::Forall) universal = b.var;
    else witnesses.push_back(b.var);
  }
  std::vector<Formula> parts;
  for (const auto& m : p.markers) parts.push_back(eventually(atom(m, tau0)));
  if (!literal) {
    // Existential witnesses must come from the original traces, and some
    // original trace must exist at all.
    if (witnesses.empty()) {
      std::string sigma = fresh_var("y", used);
      used.insert(sigma);
      out.prefix.push_back({Quant::Exists, sigma});
      witnesses.push_back(sigma);
    }
    for (const auto& w : witnesses) parts.push_back(differs(w));
  }
  Formula body = rewrite(s.matrix);
  parts.push_back(universal.empty() ? body : limplies(differs(universal), body));
  out.matrix = conj(parts);
  return out;
}

LassoTrace xelim_marker_trace(const Sentence& s) {
  XPlan p = plan_xelim(s);
  LassoTrace t;
  for (const auto& m : p.markers) t.stem.push_back({m});
  t.loop.push_back({});
  return t;
}

FiniteTraceModel project_model(const FiniteTraceModel& t, const std::set<std::string>& props) {
  auto proj = [&](const Valuation& v) {
    Valuation out;
    for (const auto& a : v)
      if (props.count(a)) out.insert(a);
    return out;
  };
  std::vector<LassoTrace> out;
  for (const auto& tr : t.traces) {
    LassoTrace u;
    for (const auto& v : tr.stem) u.stem.push_back(proj(v));
    for (const auto& v : tr.loop) u.loop.push_back(proj(v));
    out.push_back(u);
  }
  return make_model(out);
}

}  // namespace hyperltl
