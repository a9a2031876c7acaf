#include "hyperltl/automata.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "hyperltl/syntax.hpp"

namespace hyperltl {

int NBA::add_state(bool acc) {
  edges.emplace_back();
  accepting.push_back(acc);
  return size() - 1;
}

std::vector<Letter> NBA::letters() const {
  if (alphabet) return *alphabet;
  if (props.size() > 20)
    throw Error(ErrorKind::Budget, "alphabet over " + std::to_string(props.size()) +
                                       " propositions is too large to enumerate");
  std::vector<Letter> out;
  for (Letter l = 0; l < (Letter{1} << props.size()); ++l) out.push_back(l);
  return out;
}

std::string channel(const std::string& prop, const std::string& var) {
  return var == kImplicitVar ? prop : prop + "@" + var;
}

std::pair<std::string, std::string> split_channel(const std::string& name) {
  auto at = name.rfind('@');
  if (at == std::string::npos || at == 0) return {name, kImplicitVar};
  return {name.substr(0, at), name.substr(at + 1)};
}

Formula zip_exists(const Sentence& s) {
  if (!is_exists_star(s))
    throw Error(ErrorKind::Shape, "zipping needs an existential prefix, got " + classify_prefix(s));
  std::function<Formula(const Formula&)> go = [&](const Formula& f) -> Formula {
    switch (f->op) {
      case Op::Atom: return atom(channel(f->prop, f->var), kImplicitVar);
      case Op::True:
      case Op::False: return f;
      default: return make(f->op, f->lhs ? go(f->lhs) : nullptr, f->rhs ? go(f->rhs) : nullptr);
    }
  };
  return go(s.matrix);
}

TraceAssignment unzip(const LassoTrace& t, const std::vector<std::string>& vars) {
  auto project = [](const Valuation& v, const std::string& var) {
    Valuation out;
    for (const auto& name : v) {
      auto [p, x] = split_channel(name);
      if (x == var) out.insert(p);
    }
    return out;
  };
  TraceAssignment out;
  for (const auto& var : vars) {
    LassoTrace u;
    for (const auto& v : t.stem) u.stem.push_back(project(v, var));
    for (const auto& v : t.loop) u.loop.push_back(project(v, var));
    out[var] = canonical(u);
  }
  return out;
}

LassoTrace word_to_trace(const LassoWord& w, const std::vector<std::string>& props) {
  auto val = [&](Letter l) {
    Valuation v;
    for (std::size_t i = 0; i < props.size(); ++i)
      if (l >> i & 1) v.insert(props[i]);
    return v;
  };
  LassoTrace t;
  for (Letter l : w.stem) t.stem.push_back(val(l));
  for (Letter l : w.loop) t.loop.push_back(val(l));
  return t;
}

LassoWord trace_to_word(const LassoTrace& t, const std::vector<std::string>& props) {
  auto letter = [&](const Valuation& v) {
    Letter l = 0;
    for (std::size_t i = 0; i < props.size(); ++i)
      if (v.count(props[i])) l |= Letter{1} << i;
    return l;
  };
  LassoWord w;
  for (const auto& v : t.stem) w.stem.push_back(letter(v));
  for (const auto& v : t.loop) w.loop.push_back(letter(v));
  return w;
}

namespace {

// ---------- graph helpers ----------

struct SccResult {
  std::vector<int> comp;         // component id per vertex, -1 if not visited
  std::vector<bool> nontrivial;  // per component
  int count = 0;
};

// Iterative Tarjan over vertices reachable from roots.
SccResult tarjan(int n, const std::vector<int>& roots,
                 const std::function<void(int, std::vector<int>&)>& successors) {
  SccResult r;
  r.comp.assign(n, -1);
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<bool> on_stack(n, false);
  std::vector<std::vector<int>> succ_cache(n);
  std::vector<bool> self_loop(n, false);
  int counter = 0;
  struct Frame {
    int v;
    std::size_t next;
  };
  for (int root : roots) {
    if (index[root] >= 0) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    successors(root, succ_cache[root]);
    while (!call.empty()) {
      Frame& fr = call.back();
      int v = fr.v;
      if (fr.next < succ_cache[v].size()) {
        int w = succ_cache[v][fr.next++];
        if (w == v) self_loop[v] = true;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          successors(w, succ_cache[w]);
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        int size = 0;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          r.comp[w] = r.count;
          ++size;
        } while (w != v);
        r.nontrivial.push_back(size > 1 || self_loop[v]);
        ++r.count;
      }
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
    }
  }
  return r;
}

// For each edge, a letter it can read, or nullopt if dead.
std::vector<std::vector<std::optional<Letter>>> edge_letters(const NBA& a) {
  std::vector<std::vector<std::optional<Letter>>> out(a.size());
  for (int q = 0; q < a.size(); ++q) {
    for (const auto& e : a.edges[q]) {
      std::optional<Letter> pick;
      if (e.guard.satisfiable()) {
        if (a.alphabet) {
          for (Letter l : *a.alphabet)
            if (e.guard.matches(l)) {
              pick = l;
              break;
            }
        } else {
          pick = e.guard.pos;
        }
      }
      out[q].push_back(pick);
    }
  }
  return out;
}

// ---------- negation normal form for the tableau ----------

enum class L { True, False, Lit, And, Or, Next, Until, Release };

struct LNode {
  L kind;
  int prop = -1;
  bool positive = true;
  int a = -1;
  int b = -1;
};

class LtlTable {
 public:
  std::vector<LNode> nodes;
  std::vector<std::string> props;

  int prop_index(const std::string& name) {
    auto it = prop_ids_.find(name);
    if (it != prop_ids_.end()) return it->second;
    props.push_back(name);
    return prop_ids_[name] = static_cast<int>(props.size()) - 1;
  }

  int make(L k, int a = -1, int b = -1, int prop = -1, bool positive = true) {
    if (k == L::And) {
      if (a == ff() || b == ff()) return ff();
      if (a == tt()) return b;
      if (b == tt()) return a;
      if (a == b) return a;
      if (a > b) std::swap(a, b);
    } else if (k == L::Or) {
      if (a == tt() || b == tt()) return tt();
      if (a == ff()) return b;
      if (b == ff()) return a;
      if (a == b) return a;
      if (a > b) std::swap(a, b);
    } else if (k == L::Until) {
      if (b == tt() || b == ff()) return b;
      if (a == ff()) return b;
    } else if (k == L::Release) {
      if (b == tt() || b == ff()) return b;
      if (a == tt()) return b;
    } else if (k == L::Next) {
      if (a == tt() || a == ff()) return a;
    }
    auto key = std::make_tuple(static_cast<int>(k), a, b, prop, positive);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    nodes.push_back({k, prop, positive, a, b});
    return ids_[key] = static_cast<int>(nodes.size()) - 1;
  }

  int tt() {
    if (tt_ < 0) tt_ = raw(L::True);
    return tt_;
  }
  int ff() {
    if (ff_ < 0) ff_ = raw(L::False);
    return ff_;
  }

  int negated_literal(int id) {
    const LNode& n = nodes[id];
    return make(L::Lit, -1, -1, n.prop, !n.positive);
  }

  int nnf(const Formula& f, bool neg) {
    auto key = std::make_pair(f.get(), neg);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    int r = build(f, neg);
    memo_[key] = r;
    return r;
  }

 private:
  int raw(L k) {
    nodes.push_back({k});
    return static_cast<int>(nodes.size()) - 1;
  }

  int build(const Formula& f, bool neg) {
    switch (f->op) {
      case Op::Atom:
        return make(L::Lit, -1, -1, prop_index(channel(f->prop, f->var)), !neg);
      case Op::True: return neg ? ff() : tt();
      case Op::False: return neg ? tt() : ff();
      case Op::Not: return nnf(f->lhs, !neg);
      case Op::And:
        return make(neg ? L::Or : L::And, nnf(f->lhs, neg), nnf(f->rhs, neg));
      case Op::Or:
        return make(neg ? L::And : L::Or, nnf(f->lhs, neg), nnf(f->rhs, neg));
      case Op::Implies:
        return neg ? make(L::And, nnf(f->lhs, false), nnf(f->rhs, true))
                   : make(L::Or, nnf(f->lhs, true), nnf(f->rhs, false));
      case Op::Iff:
      case Op::Xor: {
        bool same = (f->op == Op::Iff) != neg;
        int a = nnf(f->lhs, false), na = nnf(f->lhs, true);
        int b = nnf(f->rhs, false), nb = nnf(f->rhs, true);
        return same ? make(L::Or, make(L::And, a, b), make(L::And, na, nb))
                    : make(L::Or, make(L::And, a, nb), make(L::And, na, b));
      }
      case Op::Next: return make(L::Next, nnf(f->lhs, neg));
      case Op::Eventually:
        return neg ? make(L::Release, ff(), nnf(f->lhs, true))
                   : make(L::Until, tt(), nnf(f->lhs, false));
      case Op::Always:
        return neg ? make(L::Until, tt(), nnf(f->lhs, true))
                   : make(L::Release, ff(), nnf(f->lhs, false));
      case Op::Until:
        return neg ? make(L::Release, nnf(f->lhs, true), nnf(f->rhs, true))
                   : make(L::Until, nnf(f->lhs, false), nnf(f->rhs, false));
      default:
        throw Error(ErrorKind::Shape, "LTL translation needs a quantifier-free formula");
    }
  }

  std::map<std::tuple<int, int, int, int, bool>, int> ids_;
  std::map<std::pair<const Node*, bool>, int> memo_;
  std::unordered_map<std::string, int> prop_ids_;
  int tt_ = -1;
  int ff_ = -1;
};

// ---------- on-the-fly tableau ----------

struct TableauNode {
  std::set<int> incoming;  // -1 marks the initial pseudo-state
  std::set<int> old;
  std::set<int> next;
};

std::vector<TableauNode> tableau(LtlTable& tab, int root) {
  struct Work {
    std::set<int> incoming, fresh, old, next;
  };
  std::vector<TableauNode> graph;
  std::map<std::pair<std::set<int>, std::set<int>>, int> index;
  std::vector<Work> todo;
  todo.push_back({{-1}, {root}, {}, {}});
  while (!todo.empty()) {
    Work w = std::move(todo.back());
    todo.pop_back();
    if (w.fresh.empty()) {
      auto key = std::make_pair(w.old, w.next);
      auto it = index.find(key);
      if (it != index.end()) {
        graph[it->second].incoming.insert(w.incoming.begin(), w.incoming.end());
        continue;
      }
      int id = static_cast<int>(graph.size());
      graph.push_back({w.incoming, w.old, w.next});
      index.emplace(std::move(key), id);
      todo.push_back({{id}, graph[id].next, {}, {}});
      continue;
    }
    int eta = *w.fresh.begin();
    w.fresh.erase(w.fresh.begin());
    if (w.old.count(eta)) {
      todo.push_back(std::move(w));
      continue;
    }
    const LNode n = tab.nodes[eta];
    auto add = [&](Work& x, int f) {
      if (!x.old.count(f)) x.fresh.insert(f);
    };
    switch (n.kind) {
      case L::True:
        w.old.insert(eta);
        todo.push_back(std::move(w));
        break;
      case L::False:
        break;
      case L::Lit:
        if (w.old.count(tab.negated_literal(eta))) break;
        w.old.insert(eta);
        todo.push_back(std::move(w));
        break;
      case L::And:
        w.old.insert(eta);
        add(w, n.a);
        add(w, n.b);
        todo.push_back(std::move(w));
        break;
      case L::Next:
        w.old.insert(eta);
        w.next.insert(n.a);
        todo.push_back(std::move(w));
        break;
      case L::Or:
      case L::Until:
      case L::Release: {
        w.old.insert(eta);
        Work w1 = w, w2 = std::move(w);
        if (n.kind == L::Or) {
          add(w1, n.a);
          add(w2, n.b);
        } else if (n.kind == L::Until) {
          add(w1, n.a);
          w1.next.insert(eta);
          add(w2, n.b);
        } else {
          add(w1, n.b);
          w1.next.insert(eta);
          add(w2, n.a);
          add(w2, n.b);
        }
        todo.push_back(std::move(w1));
        todo.push_back(std::move(w2));
        break;
      }
    }
  }
  return graph;
}

Letter full_mask(std::size_t nprops) {
  return nprops >= 64 ? ~Letter{0} : (Letter{1} << nprops) - 1;
}

}  // namespace

NBA ltl_to_nba(const Formula& f, const std::vector<std::string>& extra_props) {
  LtlTable tab;
  for (const auto& p : extra_props) tab.prop_index(p);
  int root = tab.nnf(f, false);
  std::vector<TableauNode> graph = tableau(tab, root);
  if (tab.props.size() > 64)
    throw Error(ErrorKind::Budget, "more than 64 propositions in one automaton");

  const int n = static_cast<int>(graph.size());
  std::vector<Guard> guard(n);
  std::set<int> untils;
  for (int i = 0; i < n; ++i) {
    for (int id : graph[i].old) {
      const LNode& x = tab.nodes[id];
      if (x.kind == L::Lit) (x.positive ? guard[i].pos : guard[i].neg) |= Letter{1} << x.prop;
      if (x.kind == L::Until) untils.insert(id);
    }
  }
  std::vector<std::vector<bool>> acc_sets;
  for (int u : untils) {
    std::vector<bool> set(n);
    for (int i = 0; i < n; ++i)
      set[i] = !graph[i].old.count(u) || graph[i].old.count(tab.nodes[u].b);
    acc_sets.push_back(std::move(set));
  }

  // Tableau vertex v+1 is node v; vertex 0 is the initial pseudo-state.
  std::vector<std::vector<int>> succ(n + 1);
  for (int i = 0; i < n; ++i)
    for (int p : graph[i].incoming) succ[p + 1].push_back(i + 1);
  auto in_set = [&](std::size_t k, int vertex) { return vertex > 0 && acc_sets[k][vertex - 1]; };

  // With one acceptance set per SCC outcome, intersecting the sets is exact
  // and keeps the automaton weak.
  SccResult scc = tarjan(n + 1, {0}, [&](int v, std::vector<int>& out) { out = succ[v]; });
  bool uniform = true;
  for (std::size_t k = 0; k < acc_sets.size() && uniform; ++k) {
    std::vector<int> seen(scc.count, -1);
    for (int v = 1; v <= n && uniform; ++v) {
      int c = scc.comp[v];
      if (c < 0 || !scc.nontrivial[c]) continue;
      int val = in_set(k, v) ? 1 : 0;
      if (seen[c] < 0) seen[c] = val;
      else if (seen[c] != val) uniform = false;
    }
  }

  NBA a;
  a.props = tab.props;
  const int m = uniform ? 1 : std::max<int>(1, static_cast<int>(acc_sets.size()));
  auto accepting_at = [&](int v, int level) {
    if (v == 0) return false;
    if (acc_sets.empty()) return true;
    if (uniform) {
      for (std::size_t k = 0; k < acc_sets.size(); ++k)
        if (!in_set(k, v)) return false;
      return true;
    }
    return level == 0 && in_set(0, v);
  };
  std::map<std::pair<int, int>, int> ids;
  std::deque<std::pair<int, int>> queue;
  auto get = [&](int v, int level) {
    auto key = std::make_pair(v, level);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    int id = a.add_state(accepting_at(v, level));
    ids[key] = id;
    queue.push_back(key);
    return id;
  };
  a.initial.push_back(get(0, 0));
  while (!queue.empty()) {
    auto [v, level] = queue.front();
    queue.pop_front();
    int from = ids.at({v, level});
    int next_level = level;
    if (!uniform && !acc_sets.empty() && in_set(level, v)) next_level = (level + 1) % m;
    for (int w : succ[v]) {
      int to = get(w, next_level);
      a.edges[from].push_back({guard[w - 1], to});
    }
  }
  return prune(a);
}

NBA prune(const NBA& a) {
  auto letters = edge_letters(a);
  const int n = a.size();
  auto live_succ = [&](int v, std::vector<int>& out) {
    out.clear();
    for (std::size_t i = 0; i < a.edges[v].size(); ++i)
      if (letters[v][i]) out.push_back(a.edges[v][i].to);
  };
  SccResult scc = tarjan(n, a.initial, live_succ);
  // Backward closure from accepting states in nontrivial SCCs.
  std::vector<std::vector<int>> pred(n);
  for (int v = 0; v < n; ++v) {
    if (scc.comp[v] < 0) continue;
    std::vector<int> out;
    live_succ(v, out);
    for (int w : out) pred[w].push_back(v);
  }
  std::vector<bool> useful(n, false);
  std::vector<int> stack;
  for (int v = 0; v < n; ++v)
    if (scc.comp[v] >= 0 && a.accepting[v] && scc.nontrivial[scc.comp[v]]) {
      useful[v] = true;
      stack.push_back(v);
    }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int p : pred[v])
      if (!useful[p]) {
        useful[p] = true;
        stack.push_back(p);
      }
  }
  NBA out;
  out.props = a.props;
  out.alphabet = a.alphabet;
  std::vector<int> remap(n, -1);
  for (int v = 0; v < n; ++v)
    if (useful[v]) remap[v] = out.add_state(a.accepting[v]);
  for (int v = 0; v < n; ++v) {
    if (remap[v] < 0) continue;
    for (std::size_t i = 0; i < a.edges[v].size(); ++i) {
      const auto& e = a.edges[v][i];
      if (letters[v][i] && remap[e.to] >= 0) out.edges[remap[v]].push_back({e.guard, remap[e.to]});
    }
  }
  for (int q : a.initial)
    if (remap[q] >= 0) out.initial.push_back(remap[q]);
  return out;
}

std::optional<LassoWord> nba_nonempty(const NBA& a) {
  auto letters = edge_letters(a);
  const int n = a.size();
  auto live_succ = [&](int v, std::vector<int>& out) {
    out.clear();
    for (std::size_t i = 0; i < a.edges[v].size(); ++i)
      if (letters[v][i]) out.push_back(a.edges[v][i].to);
  };
  SccResult scc = tarjan(n, a.initial, live_succ);
  int target = -1;
  for (int v = 0; v < n && target < 0; ++v)
    if (scc.comp[v] >= 0 && a.accepting[v] && scc.nontrivial[scc.comp[v]]) target = v;
  if (target < 0) return std::nullopt;

  // Breadth-first search; the predicate restricts which vertices may be used.
  auto path = [&](const std::vector<int>& sources, int goal, bool same_scc,
                  bool skip_zero_length) -> std::vector<Letter> {
    std::vector<int> parent(n, -2), via(n, -1);
    std::deque<int> q;
    std::vector<Letter> letter_of(n, 0);
    for (int s : sources) {
      if (skip_zero_length) {
        for (std::size_t i = 0; i < a.edges[s].size(); ++i) {
          int w = a.edges[s][i].to;
          if (!letters[s][i] || parent[w] != -2) continue;
          if (same_scc && scc.comp[w] != scc.comp[goal]) continue;
          parent[w] = s;
          letter_of[w] = *letters[s][i];
          q.push_back(w);
        }
      } else if (parent[s] == -2) {
        parent[s] = -1;
        q.push_back(s);
      }
    }
    while (!q.empty() && parent[goal] == -2) {
      int v = q.front();
      q.pop_front();
      for (std::size_t i = 0; i < a.edges[v].size(); ++i) {
        int w = a.edges[v][i].to;
        if (!letters[v][i] || parent[w] != -2) continue;
        if (same_scc && scc.comp[w] != scc.comp[goal]) continue;
        parent[w] = v;
        letter_of[w] = *letters[v][i];
        q.push_back(w);
      }
    }
    std::vector<Letter> word;
    if (skip_zero_length) {
      // Walk back from goal to the source; the first hop was recorded on the
      // vertex reached from the source.
      int v = goal;
      do {
        word.push_back(letter_of[v]);
        v = parent[v];
      } while (v != sources[0] && v >= 0);
    } else {
      for (int v = goal; parent[v] >= 0; v = parent[v]) word.push_back(letter_of[v]);
    }
    std::reverse(word.begin(), word.end());
    return word;
  };

  LassoWord w;
  w.stem = path(a.initial, target, false, false);
  w.loop = path({target}, target, true, true);
  if (!nba_accepts(a, w))
    throw std::logic_error("emptiness check produced a lasso the automaton rejects");
  return w;
}

bool nba_accepts(const NBA& a, const LassoWord& w) {
  if (w.loop.empty()) throw Error(ErrorKind::EmptyLoop, "lasso word needs a nonempty loop");
  const int len = static_cast<int>(w.stem.size() + w.loop.size());
  const int stem = static_cast<int>(w.stem.size());
  const int n = a.size();
  auto letter_at = [&](int pos) { return pos < stem ? w.stem[pos] : w.loop[pos - stem]; };
  auto succ = [&](int v, std::vector<int>& out) {
    out.clear();
    int q = v / len, pos = v % len;
    Letter l = letter_at(pos);
    int np = pos + 1 < len ? pos + 1 : stem;
    for (const auto& e : a.edges[q])
      if (e.guard.matches(l)) out.push_back(e.to * len + np);
  };
  std::vector<int> roots;
  for (int q : a.initial) roots.push_back(q * len);
  SccResult scc = tarjan(n * len, roots, succ);
  for (int v = 0; v < n * len; ++v)
    if (scc.comp[v] >= 0 && scc.nontrivial[scc.comp[v]] && a.accepting[v / len]) return true;
  return false;
}

std::optional<LassoTrace> ltl_sat(const Formula& f) {
  auto vars = free_vars(f);
  if (vars.size() > 1)
    throw Error(ErrorKind::InvalidArgument, "single-trace backend got several trace variables");
  Formula g = vars.empty() ? f : substitute(f, *vars.begin(), kImplicitVar);
  NBA a = ltl_to_nba(g);
  auto w = nba_nonempty(a);
  if (!w) return std::nullopt;
  LassoTrace t = canonical(word_to_trace(*w, a.props));
  if (!eval_qf(g, {{kImplicitVar, t}}))
    throw std::logic_error("automaton model fails direct evaluation: " + print_formula(g));
  return t;
}

bool is_weak(const NBA& a) {
  auto letters = edge_letters(a);
  std::vector<int> all;
  for (int v = 0; v < a.size(); ++v) all.push_back(v);
  SccResult scc = tarjan(a.size(), all, [&](int v, std::vector<int>& out) {
    out.clear();
    for (std::size_t i = 0; i < a.edges[v].size(); ++i)
      if (letters[v][i]) out.push_back(a.edges[v][i].to);
  });
  std::vector<int> seen(scc.count, -1);
  for (int v = 0; v < a.size(); ++v) {
    int c = scc.comp[v];
    if (!scc.nontrivial[c]) continue;
    int val = a.accepting[v] ? 1 : 0;
    if (seen[c] < 0) seen[c] = val;
    else if (seen[c] != val) return false;
  }
  return true;
}

namespace {

using Bits = std::vector<std::uint64_t>;

struct BitsHash {
  std::size_t operator()(const Bits& b) const {
    std::size_t h = 1469598103934665603ull;
    for (auto w : b) h = (h ^ w) * 1099511628211ull;
    return h;
  }
};

bool bit(const Bits& b, int i) { return b[i >> 6] >> (i & 63) & 1; }
void set_bit(Bits& b, int i) { b[i >> 6] |= std::uint64_t{1} << (i & 63); }
bool none(const Bits& b) {
  return std::all_of(b.begin(), b.end(), [](std::uint64_t w) { return w == 0; });
}

Guard exact(Letter l, std::size_t nprops) { return {l, full_mask(nprops) & ~l}; }

// Breakpoint construction: exact for automata whose accepting runs end inside
// an all-accepting SCC. Output is deterministic.
NBA complement_weak(const NBA& a, const std::vector<Letter>& sigma, std::size_t budget) {
  const int n = a.size();
  const std::size_t words = (n + 63) / 64 + 1;
  NBA out;
  out.props = a.props;
  out.alphabet = sigma;
  std::unordered_map<Bits, int, BitsHash> ids;
  std::vector<Bits> states;
  auto key = [&](const Bits& s, const Bits& o) {
    Bits k(2 * words);
    std::copy(s.begin(), s.end(), k.begin());
    std::copy(o.begin(), o.end(), k.begin() + words);
    return k;
  };
  auto get = [&](const Bits& s, const Bits& o) {
    Bits k = key(s, o);
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    if (states.size() >= budget)
      throw ComplementBlowup("breakpoint complement exceeds " + std::to_string(budget) + " states");
    int id = out.add_state(none(o));
    ids.emplace(k, id);
    states.push_back(std::move(k));
    return id;
  };
  Bits init(words, 0), empty(words, 0);
  for (int q : a.initial) set_bit(init, q);
  out.initial.push_back(get(init, empty));
  for (std::size_t cur = 0; cur < states.size(); ++cur) {
    Bits s(states[cur].begin(), states[cur].begin() + words);
    Bits o(states[cur].begin() + words, states[cur].end());
    bool o_empty = none(o);
    for (Letter l : sigma) {
      Bits s2(words, 0), o2(words, 0);
      for (int q = 0; q < n; ++q) {
        if (!bit(s, q)) continue;
        bool from_o = o_empty || bit(o, q);
        for (const auto& e : a.edges[q]) {
          if (!e.guard.matches(l)) continue;
          set_bit(s2, e.to);
          if (from_o && a.accepting[e.to]) set_bit(o2, e.to);
        }
      }
      int to = get(s2, o2);
      out.edges[cur].push_back({exact(l, a.props.size()), to});
    }
  }
  return out;
}

// Rank-based construction restricted to tight level rankings: a subset phase,
// then a guessed jump into rankings whose maximal odd rank stays fixed.
NBA complement_ranked(const NBA& a, const std::vector<Letter>& sigma, std::size_t budget) {
  const int n = a.size();
  using Mask = std::uint32_t;
  Mask acc = 0;
  for (int q = 0; q < n; ++q)
    if (a.accepting[q]) acc |= Mask{1} << q;
  // post[q][letter index]
  std::vector<std::vector<Mask>> post(n, std::vector<Mask>(sigma.size(), 0));
  for (int q = 0; q < n; ++q)
    for (std::size_t li = 0; li < sigma.size(); ++li)
      for (const auto& e : a.edges[q])
        if (e.guard.matches(sigma[li])) post[q][li] |= Mask{1} << e.to;

  // State encoding: phase byte, then ranks (or subset), then O.
  struct St {
    bool ranked;
    Mask set;
    std::vector<std::int8_t> rank;  // -1 outside the set
    Mask owe;
  };
  auto encode = [&](const St& s) {
    std::string k(1, s.ranked ? 'R' : 'S');
    k.append(reinterpret_cast<const char*>(&s.set), sizeof(Mask));
    if (s.ranked) {
      k.append(reinterpret_cast<const char*>(s.rank.data()), s.rank.size());
      k.append(reinterpret_cast<const char*>(&s.owe), sizeof(Mask));
    }
    return k;
  };
  NBA out;
  out.props = a.props;
  out.alphabet = sigma;
  std::unordered_map<std::string, int> ids;
  std::vector<St> states;
  auto get = [&](St s) {
    std::string k = encode(s);
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    if (states.size() >= budget)
      throw ComplementBlowup("rank-based complement exceeds " + std::to_string(budget) +
                             " states");
    int id = out.add_state(s.ranked && s.owe == 0);
    ids.emplace(std::move(k), id);
    states.push_back(std::move(s));
    return id;
  };

  // Enumerates tight rankings over `set` with maximal rank exactly r and
  // rank(q) <= bound[q]; accepting states get even ranks.
  auto tight = [&](Mask set, int r, const std::vector<int>& bound,
                   const std::function<void(const std::vector<std::int8_t>&)>& emit) {
    std::vector<int> qs;
    for (int q = 0; q < n; ++q)
      if (set >> q & 1) qs.push_back(q);
    std::vector<std::int8_t> rank(n, -1);
    std::vector<int> cover((r + 1) / 2 + 1, 0);  // cover[k] counts rank 2k-1
    int uncovered = (r + 1) / 2;
    std::function<void(std::size_t)> go = [&](std::size_t i) {
      if (uncovered > static_cast<int>(qs.size() - i)) return;
      if (i == qs.size()) {
        emit(rank);
        return;
      }
      int q = qs[i];
      int hi = std::min(bound[q], r);
      for (int v = hi; v >= 0; --v) {
        if ((acc >> q & 1) && v % 2 == 1) continue;
        rank[q] = static_cast<std::int8_t>(v);
        bool odd = v % 2 == 1;
        if (odd && cover[(v + 1) / 2]++ == 0) --uncovered;
        go(i + 1);
        if (odd && --cover[(v + 1) / 2] == 0) ++uncovered;
      }
      rank[q] = -1;
    };
    go(0);
  };

  Mask init = 0;
  for (int q : a.initial) init |= Mask{1} << q;
  out.initial.push_back(get({false, init, {}, 0}));
  for (std::size_t cur = 0; cur < states.size(); ++cur) {
    for (std::size_t li = 0; li < sigma.size(); ++li) {
      const St s = states[cur];
      Mask next = 0;
      for (int q = 0; q < n; ++q)
        if (s.set >> q & 1) next |= post[q][li];
      std::vector<int> targets;
      if (!s.ranked) {
        targets.push_back(get({false, next, {}, 0}));
        int size = __builtin_popcount(next);
        if (size == 0) targets.push_back(get({true, 0, std::vector<std::int8_t>(n, -1), 0}));
        std::vector<int> bound(n, 2 * n);
        for (int r = 1; r <= 2 * size - 1; r += 2)
          tight(next, r, bound, [&](const std::vector<std::int8_t>& rk) {
            targets.push_back(get({true, next, rk, 0}));
          });
      } else {
        int r = -1;
        for (auto v : s.rank) r = std::max<int>(r, v);
        std::vector<int> bound(n, 2 * n);
        for (int q = 0; q < n; ++q)
          if (s.set >> q & 1)
            for (int p = 0; p < n; ++p)
              if (post[q][li] >> p & 1) bound[p] = std::min<int>(bound[p], s.rank[q]);
        Mask owe_src = s.owe;
        Mask owe_post = 0;
        for (int q = 0; q < n; ++q)
          if (owe_src >> q & 1) owe_post |= post[q][li];
        if (next == 0) {
          targets.push_back(get({true, 0, std::vector<std::int8_t>(n, -1), 0}));
        } else if (r >= 1) {
          tight(next, r, bound, [&](const std::vector<std::int8_t>& rk) {
            Mask even = 0;
            for (int q = 0; q < n; ++q)
              if (rk[q] >= 0 && rk[q] % 2 == 0) even |= Mask{1} << q;
            Mask owe = (owe_src != 0 ? owe_post : next) & even;
            targets.push_back(get({true, next, rk, owe}));
          });
        }
      }
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      for (int t : targets) out.edges[cur].push_back({exact(sigma[li], a.props.size()), t});
    }
  }
  return out;
}

}  // namespace

NBA complement_nba(const NBA& a, const ComplementOptions& opt) {
  std::vector<Letter> sigma = a.letters();
  if (a.size() == 0) {
    NBA all;
    all.props = a.props;
    all.alphabet = sigma;
    int q = all.add_state(true);
    all.initial.push_back(q);
    for (Letter l : sigma) all.edges[q].push_back({exact(l, a.props.size()), q});
    return all;
  }
  if (is_weak(a)) return prune(complement_weak(a, sigma, opt.state_budget));
  if (a.size() > opt.input_cap || a.size() > 31)
    throw ComplementBlowup("rank-based complementation of " + std::to_string(a.size()) +
                           " states exceeds the cap of " + std::to_string(opt.input_cap));
  return prune(complement_ranked(a, sigma, opt.state_budget));
}

NBA reindex(const NBA& a, const std::vector<std::string>& props) {
  if (props.size() > 64) throw Error(ErrorKind::Budget, "more than 64 propositions");
  std::vector<int> where(a.props.size(), -1);
  for (std::size_t i = 0; i < a.props.size(); ++i) {
    auto it = std::find(props.begin(), props.end(), a.props[i]);
    if (it != props.end()) where[i] = static_cast<int>(it - props.begin());
  }
  auto map_letter = [&](Letter l) {
    Letter r = 0;
    for (std::size_t i = 0; i < where.size(); ++i)
      if ((l >> i & 1) && where[i] >= 0) r |= Letter{1} << where[i];
    return r;
  };
  NBA out;
  out.props = props;
  out.initial = a.initial;
  out.accepting = a.accepting;
  out.edges.resize(a.size());
  for (int q = 0; q < a.size(); ++q)
    for (const auto& e : a.edges[q])
      if (e.guard.satisfiable())
        out.edges[q].push_back({{map_letter(e.guard.pos), map_letter(e.guard.neg)}, e.to});
  if (a.alphabet) {
    bool dropped = std::any_of(where.begin(), where.end(), [](int w) { return w < 0; });
    bool added = props.size() > a.props.size() - std::count(where.begin(), where.end(), -1);
    if (!added) {
      std::set<Letter> ls;
      for (Letter l : *a.alphabet) ls.insert(map_letter(l));
      out.alphabet = std::vector<Letter>(ls.begin(), ls.end());
    } else if (!dropped) {
      // New propositions are unconstrained: extend every letter.
      std::vector<int> fresh;
      for (std::size_t j = 0; j < props.size(); ++j)
        if (std::find(where.begin(), where.end(), static_cast<int>(j)) == where.end())
          fresh.push_back(static_cast<int>(j));
      if (fresh.size() > 16) throw Error(ErrorKind::Budget, "alphabet extension too large");
      std::vector<Letter> ls;
      for (Letter l : *a.alphabet)
        for (Letter ext = 0; ext < (Letter{1} << fresh.size()); ++ext) {
          Letter m = map_letter(l);
          for (std::size_t k = 0; k < fresh.size(); ++k)
            if (ext >> k & 1) m |= Letter{1} << fresh[k];
          ls.push_back(m);
        }
      std::sort(ls.begin(), ls.end());
      out.alphabet = ls;
    } else {
      throw Error(ErrorKind::InvalidArgument,
                  "cannot add and drop propositions of an explicit alphabet at once");
    }
  }
  return out;
}

NBA intersect(const NBA& a0, const NBA& b0) {
  std::vector<std::string> props = a0.props;
  for (const auto& p : b0.props)
    if (std::find(props.begin(), props.end(), p) == props.end()) props.push_back(p);
  NBA a = reindex(a0, props), b = reindex(b0, props);
  NBA out;
  out.props = props;
  if (a.alphabet || b.alphabet) {
    std::vector<Letter> ls;
    if (a.alphabet && b.alphabet) {
      std::set_intersection(a.alphabet->begin(), a.alphabet->end(), b.alphabet->begin(),
                            b.alphabet->end(), std::back_inserter(ls));
    } else {
      ls = a.alphabet ? *a.alphabet : *b.alphabet;
    }
    out.alphabet = ls;
  }
  std::map<std::tuple<int, int, int>, int> ids;
  std::vector<std::tuple<int, int, int>> states;
  auto get = [&](int p, int q, int flag) {
    auto k = std::make_tuple(p, q, flag);
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    int id = out.add_state(flag == 0 && a.accepting[p]);
    ids[k] = id;
    states.push_back(k);
    return id;
  };
  for (int p : a.initial)
    for (int q : b.initial) out.initial.push_back(get(p, q, 0));
  for (std::size_t cur = 0; cur < states.size(); ++cur) {
    auto [p, q, flag] = states[cur];
    int nflag = flag;
    if (flag == 0 && a.accepting[p]) nflag = 1;
    else if (flag == 1 && b.accepting[q]) nflag = 0;
    for (const auto& ea : a.edges[p])
      for (const auto& eb : b.edges[q]) {
        Guard g{ea.guard.pos | eb.guard.pos, ea.guard.neg | eb.guard.neg};
        if (!g.satisfiable()) continue;
        int to = get(ea.to, eb.to, nflag);
        out.edges[cur].push_back({g, to});
      }
  }
  return prune(out);
}

std::string dump_nba(const NBA& a) {
  std::ostringstream out;
  auto lit = [&](const Guard& g) {
    std::string s;
    for (std::size_t i = 0; i < a.props.size(); ++i) {
      if (g.pos >> i & 1) s += (s.empty() ? "" : "&") + a.props[i];
      if (g.neg >> i & 1) s += (s.empty() ? "!" : "&!") + a.props[i];
    }
    return s.empty() ? std::string("true") : s;
  };
  out << "states " << a.size() << "\ninitial";
  for (int q : a.initial) out << ' ' << q;
  out << "\naccepting";
  for (int q = 0; q < a.size(); ++q)
    if (a.accepting[q]) out << ' ' << q;
  out << '\n';
  for (int q = 0; q < a.size(); ++q)
    for (const auto& e : a.edges[q]) out << q << " -> " << e.to << " [" << lit(e.guard) << "]\n";
  return out.str();
}

namespace {

// Boolean skeleton over leaves X^k b, F b, G b and b U c with propositional b, c.
struct WeakLeaf {
  Op kind;  // Next stands for X^k, including k = 0
  int delay = 0;
  Formula a, b;
};

enum : std::uint8_t { kPending = 0, kTrue = 1, kFalse = 2 };

struct WeakShape {
  std::vector<WeakLeaf> leaves;
  std::map<const Node*, int> leaf_of;
  std::vector<std::string> props;
  std::map<std::string, int> prop_index;

  bool boolean(Op op) const {
    return op == Op::Not || op == Op::And || op == Op::Or || op == Op::Implies || op == Op::Iff ||
           op == Op::Xor || op == Op::True || op == Op::False;
  }

  bool plain(const Formula& f) {
    if (f->op == Op::Atom) {
      if (!prop_index.count(f->prop)) {
        prop_index[f->prop] = static_cast<int>(props.size());
        props.push_back(f->prop);
      }
      return true;
    }
    if (!boolean(f->op)) return false;
    return (!f->lhs || plain(f->lhs)) && (!f->rhs || plain(f->rhs));
  }

  int add(WeakLeaf l, const Node* at) {
    leaves.push_back(std::move(l));
    return leaf_of[at] = static_cast<int>(leaves.size()) - 1;
  }

  bool collect(const Formula& f) {
    if (f->op == Op::True || f->op == Op::False) return true;
    if (plain(f)) {
      add({Op::Next, 0, f, nullptr}, f.get());
      return true;
    }
    if (boolean(f->op)) return collect(f->lhs) && (!f->rhs || collect(f->rhs));
    switch (f->op) {
      case Op::Eventually:
      case Op::Always:
        if (!plain(f->lhs)) return false;
        add({f->op, 0, f->lhs, nullptr}, f.get());
        return true;
      case Op::Until:
        if (!plain(f->lhs) || !plain(f->rhs)) return false;
        add({Op::Until, 0, f->lhs, f->rhs}, f.get());
        return true;
      case Op::Next: {
        Formula cur = f;
        int k = 0;
        while (cur->op == Op::Next) cur = cur->lhs, ++k;
        if (!plain(cur)) return false;
        add({Op::Next, k, cur, nullptr}, f.get());
        return true;
      }
      default:
        return false;
    }
  }

  bool holds(const Formula& f, Letter l) const {
    switch (f->op) {
      case Op::Atom: return (l >> prop_index.at(f->prop)) & 1;
      case Op::True: return true;
      case Op::False: return false;
      case Op::Not: return !holds(f->lhs, l);
      case Op::And: return holds(f->lhs, l) && holds(f->rhs, l);
      case Op::Or: return holds(f->lhs, l) || holds(f->rhs, l);
      case Op::Implies: return !holds(f->lhs, l) || holds(f->rhs, l);
      case Op::Iff: return holds(f->lhs, l) == holds(f->rhs, l);
      case Op::Xor: return holds(f->lhs, l) != holds(f->rhs, l);
      default: throw std::logic_error("temporal operator inside a propositional body");
    }
  }

  // Value in the limit: obligations still pending never resolve.
  bool limit(const Formula& f, const std::vector<std::uint8_t>& st) const {
    auto it = leaf_of.find(f.get());
    if (it != leaf_of.end()) {
      std::uint8_t v = st[it->second];
      return v == kTrue || (v == kPending && leaves[it->second].kind == Op::Always);
    }
    switch (f->op) {
      case Op::True: return true;
      case Op::False: return false;
      case Op::Not: return !limit(f->lhs, st);
      case Op::And: return limit(f->lhs, st) && limit(f->rhs, st);
      case Op::Or: return limit(f->lhs, st) || limit(f->rhs, st);
      case Op::Implies: return !limit(f->lhs, st) || limit(f->rhs, st);
      case Op::Iff: return limit(f->lhs, st) == limit(f->rhs, st);
      case Op::Xor: return limit(f->lhs, st) != limit(f->rhs, st);
      default: throw std::logic_error("unregistered leaf in weak skeleton");
    }
  }
};

}  // namespace

std::optional<NBA> weak_nba(const Formula& f, int state_cap) {
  WeakShape w;
  if (!w.collect(f) || w.props.size() > 16) return std::nullopt;
  int horizon = 0;
  for (const auto& l : w.leaves) horizon = std::max(horizon, l.delay + 1);

  NBA out;
  out.props = w.props;
  const Letter mask = (Letter{1} << w.props.size()) - 1;
  using Key = std::pair<int, std::vector<std::uint8_t>>;
  std::map<Key, int> index;
  std::deque<Key> work;
  auto get = [&](Key key) {
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    if (out.size() >= state_cap) return -1;
    int id = out.add_state(key.first == horizon && w.limit(f, key.second));
    index.emplace(key, id);
    work.push_back(std::move(key));
    return id;
  };
  if (get({0, std::vector<std::uint8_t>(w.leaves.size(), kPending)}) < 0) return std::nullopt;
  out.initial = {0};
  while (!work.empty()) {
    Key cur = std::move(work.front());
    work.pop_front();
    int from = index.at(cur);
    for (Letter l = 0; l <= mask; ++l) {
      std::vector<std::uint8_t> st = cur.second;
      for (std::size_t i = 0; i < st.size(); ++i) {
        if (st[i] != kPending) continue;
        const WeakLeaf& leaf = w.leaves[i];
        switch (leaf.kind) {
          case Op::Next:
            if (leaf.delay == cur.first) st[i] = w.holds(leaf.a, l) ? kTrue : kFalse;
            break;
          case Op::Eventually:
            if (w.holds(leaf.a, l)) st[i] = kTrue;
            break;
          case Op::Always:
            if (!w.holds(leaf.a, l)) st[i] = kFalse;
            break;
          default:
            if (w.holds(leaf.b, l)) st[i] = kTrue;
            else if (!w.holds(leaf.a, l)) st[i] = kFalse;
        }
      }
      int to = get({std::min(cur.first + 1, horizon), std::move(st)});
      if (to < 0) return std::nullopt;
      out.edges[from].push_back({Guard{l, ~l & mask}, to});
    }
  }
  return out;
}

}  // namespace hyperltl
