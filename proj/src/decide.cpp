#include "hyperltl/decide.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include "hyperltl/modelcheck.hpp"
#include "hyperltl/syntax.hpp"

namespace hyperltl {

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Sat: return "SAT";
    case Outcome::Unsat: return "UNSAT";
    case Outcome::UnsatWithinBound: return "UNSAT_WITHIN_BOUND";
    case Outcome::Unknown: return "UNKNOWN";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs job(i) for every i in [begin, end) on up to `jobs` threads.
void run_parallel(std::size_t begin, std::size_t end, int jobs,
                  const std::function<void(std::size_t)>& job) {
  std::size_t count = end - begin;
  std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), count);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{begin};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < end; i = next++) job(i);
    });
  for (auto& t : pool) t.join();
}

std::vector<std::string> sorted_props(const Sentence& s) {
  auto ps = propositions(s.matrix);
  return {ps.begin(), ps.end()};
}

Valuation decode_valuation(std::uint32_t bits, const std::vector<std::string>& props) {
  Valuation v;
  for (std::size_t i = 0; i < props.size(); ++i)
    if (bits >> i & 1u) v.insert(props[i]);
  return v;
}

void check_not_quantified(const Sentence& s) {
  if (!is_closed(s)) throw Error(ErrorKind::InvalidArgument, "sentence has free variables");
}

}  // namespace

// ---------- bounded number of traces ----------

Verdict sat_bounded_traces(const Sentence& s, int k, const DecideOptions& opt) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "bound must be at least 1");
  check_not_quantified(s);
  auto t0 = Clock::now();
  Sentence e = expand_quantifiers(s, k, opt.expansion_cap);
  Verdict v;
  v.stats.candidates = 1;
  auto t = ltl_sat(zip_exists(e));
  if (!t) {
    v.outcome = Outcome::UnsatWithinBound;
  } else {
    std::vector<std::string> names;
    for (const auto& b : e.prefix) names.push_back(b.var);
    std::vector<LassoTrace> traces;
    for (auto& [var, trace] : unzip(*t, names)) traces.push_back(trace);
    FiniteTraceModel m = make_model(std::move(traces));
    if (!eval_sentence(s, m, opt.period_cap))
      throw std::logic_error("bounded-trace model fails evaluation: " + print_sentence(s));
    v.outcome = Outcome::Sat;
    v.model = std::move(m);
  }
  v.stats.seconds = seconds_since(t0);
  return v;
}

Verdict decide_complete(const Sentence& s, const DecideOptions& opt) {
  if (!is_exists_star(s) && !is_forall_star(s) && !is_exists_forall(s))
    throw Error(ErrorKind::Shape, "complete decision needs an exists* forall* prefix, got " +
                                      classify_prefix(s));
  int exists_count = 0;
  for (const auto& b : s.prefix) exists_count += b.quant == Quant::Exists;
  Verdict v = sat_bounded_traces(s, std::max(1, exists_count), opt);
  if (v.outcome == Outcome::UnsatWithinBound) v.outcome = Outcome::Unsat;
  return v;
}

// ---------- bounded lassos ----------

std::vector<LassoTrace> bounded_lassos(const std::vector<std::string>& props, int k) {
  std::set<LassoTrace> out;
  std::uint32_t letters = 1u << props.size();
  for (int len = 1; len <= k; ++len) {
    std::vector<std::uint32_t> word(len, 0);
    for (;;) {
      for (int split = 0; split < len; ++split) {
        LassoTrace t;
        for (int j = 0; j < len; ++j)
          (j < split ? t.stem : t.loop).push_back(decode_valuation(word[j], props));
        out.insert(canonical(t));
      }
      int j = 0;
      while (j < len && ++word[j] == letters) word[j++] = 0;
      if (j == len) break;
    }
  }
  return {out.begin(), out.end()};
}

Verdict sat_bounded_periodic(const Sentence& s, int k, const DecideOptions& opt) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "bound must be at least 1");
  check_not_quantified(s);
  auto t0 = Clock::now();
  auto pool = bounded_lassos(sorted_props(s), k);
  const std::size_t n = pool.size();
  Verdict v;
  v.outcome = Outcome::UnsatWithinBound;

  const std::size_t chunk = 512;
  std::vector<std::vector<int>> batch;
  std::size_t explored = 0;
  bool exhausted_budget = false;
  auto flush = [&]() -> bool {
    std::vector<char> ok(batch.size(), 0);
    run_parallel(0, batch.size(), opt.jobs, [&](std::size_t i) {
      std::vector<LassoTrace> ts;
      for (int idx : batch[i]) ts.push_back(pool[idx]);
      ok[i] = eval_sentence(s, make_model(std::move(ts)), opt.period_cap);
    });
    for (std::size_t i = 0; i < batch.size(); ++i)
      if (ok[i]) {
        std::vector<LassoTrace> ts;
        for (int idx : batch[i]) ts.push_back(pool[idx]);
        v.outcome = Outcome::Sat;
        v.model = make_model(std::move(ts));
        return true;
      }
    batch.clear();
    return false;
  };

  bool found = false;
  for (std::size_t size = 1; size <= n && !found && !exhausted_budget; ++size) {
    std::vector<int> comb(size);
    std::iota(comb.begin(), comb.end(), 0);
    for (;;) {
      if (explored == opt.enumeration_budget) {
        exhausted_budget = true;
        break;
      }
      batch.push_back(comb);
      ++explored;
      if (batch.size() == chunk && (found = flush())) break;
      // next combination in lexicographic order
      std::size_t i = size;
      while (i > 0 && comb[i - 1] == static_cast<int>(n - size + i - 1)) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < size; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  if (!found && !batch.empty()) found = flush();
  if (!found && exhausted_budget) {
    v.outcome = Outcome::Unknown;
    v.note = "enumeration budget of " + std::to_string(opt.enumeration_budget) +
             " candidate models exhausted";
  }
  v.stats.candidates = explored;
  v.stats.seconds = seconds_since(t0);
  return v;
}

// ---------- bounded Kripke structures ----------

Verdict sat_bounded_kripke(const Sentence& s, int k, const DecideOptions& opt) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "bound must be at least 1");
  check_not_quantified(s);
  if (k > 16) throw Error(ErrorKind::Budget, "at most 16 states are enumerated");
  auto t0 = Clock::now();
  auto props = sorted_props(s);
  if (props.size() > 16) throw Error(ErrorKind::Budget, "too many propositions");
  const std::uint32_t letters = 1u << props.size();

  Verdict v;
  v.outcome = Outcome::UnsatWithinBound;
  std::size_t explored = 0;
  bool blowup = false, exhausted_budget = false;
  std::string blowup_note;

  for (int states = 1; states <= k && v.outcome != Outcome::Sat; ++states) {
    // labels as nondecreasing sequences
    std::vector<std::vector<std::uint32_t>> labelings;
    std::vector<std::uint32_t> lab(states, 0);
    for (;;) {
      labelings.push_back(lab);
      int j = states - 1;
      while (j >= 0 && lab[j] == letters - 1) --j;
      if (j < 0) break;
      ++lab[j];
      for (int q = j + 1; q < states; ++q) lab[q] = lab[j];
    }
    const std::uint64_t masks = (1ull << states) - 1;
    std::uint64_t per_label = masks;  // initial sets
    for (int q = 0; q < states; ++q) {
      if (per_label > (std::uint64_t{1} << 62) / masks)
        throw Error(ErrorKind::Budget, "Kripke enumeration space overflows");
      per_label *= masks;
    }
    const std::uint64_t total = per_label * labelings.size();

    auto build = [&](std::uint64_t idx) -> std::optional<KripkeStructure> {
      const auto& labels = labelings[idx / per_label];
      std::uint64_t rest = idx % per_label;
      std::uint64_t init = rest % masks + 1;
      rest /= masks;
      std::vector<std::uint64_t> succ(states);
      for (int q = 0; q < states; ++q) {
        succ[q] = rest % masks + 1;
        rest /= masks;
      }
      std::uint64_t seen = init, frontier = init;
      while (frontier) {
        std::uint64_t next = 0;
        for (int q = 0; q < states; ++q)
          if (frontier >> q & 1) next |= succ[q];
        frontier = next & ~seen;
        seen |= next;
      }
      if (seen != masks) return std::nullopt;  // a smaller structure covers it
      KripkeStructure ks;
      for (int q = 0; q < states; ++q)
        ks.add_state("s" + std::to_string(q), decode_valuation(labels[q], props), init >> q & 1);
      for (int q = 0; q < states; ++q)
        for (int r = 0; r < states; ++r)
          if (succ[q] >> r & 1) ks.add_edge(q, r);
      return ks;
    };

    const std::uint64_t chunk = 256;
    for (std::uint64_t begin = 0; begin < total; begin += chunk) {
      std::uint64_t end = std::min(total, begin + chunk);
      if (explored + (end - begin) > opt.enumeration_budget) {
        end = begin + (opt.enumeration_budget - explored);
        exhausted_budget = true;
      }
      std::vector<signed char> res(end - begin, 0);  // 1 sat, -1 blowup
      std::vector<std::string> notes(end - begin);
      run_parallel(begin, end, opt.jobs, [&](std::size_t idx) {
        auto ks = build(idx);
        if (!ks) return;
        try {
          res[idx - begin] = modelcheck(*ks, s, opt.complement) ? 1 : 0;
        } catch (const ComplementBlowup& e) {
          res[idx - begin] = -1;
          notes[idx - begin] = e.what();
        }
      });
      explored += end - begin;
      for (std::size_t i = 0; i < res.size(); ++i) {
        if (res[i] == 1) {
          v.outcome = Outcome::Sat;
          v.kripke = build(begin + i);
          break;
        }
        if (res[i] == -1 && !blowup) {
          blowup = true;
          blowup_note = notes[i];
        }
      }
      if (v.outcome == Outcome::Sat || exhausted_budget) break;
    }
    if (exhausted_budget) break;
  }
  if (v.outcome != Outcome::Sat && (blowup || exhausted_budget)) {
    v.outcome = Outcome::Unknown;
    v.note = blowup ? blowup_note
                    : "enumeration budget of " + std::to_string(opt.enumeration_budget) +
                          " structures exhausted";
  }
  v.stats.candidates = explored;
  v.stats.seconds = seconds_since(t0);
  return v;
}

// ---------- the exists* forall exists* F/G/X fragment ----------
//
// Tuples of valuations are packed into integers: component c occupies bits
// [c*nap, (c+1)*nap). Components are ordered leading existentials, the
// universal, trailing existentials. A "type" is what the procedure knows about
// one trace next to the leading existentials: its first head_len tuples and
// the set W of tuples recurring forever. A member V of S projects onto one
// type; the fixpoint runs over types reachable from the leading traces.

namespace {

struct Leaf {
  enum Kind { At, Ev, Al } kind;
  int at = 0;
  std::vector<char> table;  // truth of the propositional body per packed tuple
};

struct Skel {
  Op op;
  int leaf = -1;
  int a = -1, b = -1;
};

struct FragmentProblem {
  Sentence sentence;
  std::vector<std::string> props;
  int n = 0, m = 0, r = 0, nap = 0, head = 0;
  std::vector<Leaf> leaves;
  std::vector<Skel> skel;
  int root = -1;

  std::uint32_t comp(std::uint32_t t, int c) const {
    return (t >> (c * nap)) & ((1u << nap) - 1);
  }
  std::uint32_t low(std::uint32_t t, int comps) const {
    return comps * nap >= 32 ? t : t & ((1u << (comps * nap)) - 1);
  }

  bool eval_skel(int i, std::uint64_t ev, std::uint64_t viol,
                 const std::vector<std::uint32_t>& head_full) const {
    const Skel& s = skel[i];
    switch (s.op) {
      case Op::True: return true;
      case Op::False: return false;
      case Op::Not: return !eval_skel(s.a, ev, viol, head_full);
      case Op::And: return eval_skel(s.a, ev, viol, head_full) && eval_skel(s.b, ev, viol, head_full);
      case Op::Or: return eval_skel(s.a, ev, viol, head_full) || eval_skel(s.b, ev, viol, head_full);
      case Op::Implies:
        return !eval_skel(s.a, ev, viol, head_full) || eval_skel(s.b, ev, viol, head_full);
      case Op::Iff: return eval_skel(s.a, ev, viol, head_full) == eval_skel(s.b, ev, viol, head_full);
      case Op::Xor: return eval_skel(s.a, ev, viol, head_full) != eval_skel(s.b, ev, viol, head_full);
      default: break;
    }
    const Leaf& l = leaves[s.leaf];
    switch (l.kind) {
      case Leaf::At: return l.table[head_full[l.at]];
      case Leaf::Ev: return ev >> s.leaf & 1;
      case Leaf::Al: return !(viol >> s.leaf & 1);
    }
    return false;
  }
};

bool is_prop(const Formula& f) {
  switch (f->op) {
    case Op::Atom: case Op::True: case Op::False: return true;
    case Op::Not: return is_prop(f->lhs);
    case Op::And: case Op::Or: case Op::Implies: case Op::Iff: case Op::Xor:
      return is_prop(f->lhs) && is_prop(f->rhs);
    default: return false;
  }
}

bool eval_prop(const Formula& f, const std::function<bool(const std::string&, const std::string&)>& at) {
  switch (f->op) {
    case Op::Atom: return at(f->prop, f->var);
    case Op::True: return true;
    case Op::False: return false;
    case Op::Not: return !eval_prop(f->lhs, at);
    case Op::And: return eval_prop(f->lhs, at) && eval_prop(f->rhs, at);
    case Op::Or: return eval_prop(f->lhs, at) || eval_prop(f->rhs, at);
    case Op::Implies: return !eval_prop(f->lhs, at) || eval_prop(f->rhs, at);
    case Op::Iff: return eval_prop(f->lhs, at) == eval_prop(f->rhs, at);
    case Op::Xor: return eval_prop(f->lhs, at) != eval_prop(f->rhs, at);
    default: throw std::logic_error("temporal operator inside a state formula");
  }
}

// Leading existentials, then one universal, then trailing existentials. A
// purely existential prefix gets a fresh universal that the matrix ignores.
Sentence with_explicit_universal(const Sentence& s) {
  if (!is_exists_forall1_exists(s))
    throw Error(ErrorKind::Shape, "fragment decision needs an exists* forall? exists* prefix, got " +
                                      classify_prefix(s));
  for (const auto& b : s.prefix)
    if (b.quant == Quant::Forall) return s;
  std::set<std::string> used;
  for (const auto& b : s.prefix) used.insert(b.var);
  Sentence out = s;
  out.prefix.push_back({Quant::Forall, fresh_var("u", used)});
  return out;
}

FragmentProblem compile_fragment(const Sentence& s0, std::size_t budget) {
  if (!in_fragment(s0, Fragment::FGX1))
    throw Error(ErrorKind::Shape, "matrix is not a Boolean combination of F, G and X^k over state formulas");
  check_not_quantified(s0);
  FragmentProblem p;
  p.sentence = with_explicit_universal(s0);
  const auto& pre = p.sentence.prefix;
  p.r = static_cast<int>(pre.size());
  for (int i = 0; i < p.r; ++i)
    if (pre[i].quant == Quant::Forall) p.n = i;
  p.m = p.r - p.n - 1;
  p.props = sorted_props(p.sentence);
  p.nap = static_cast<int>(p.props.size());
  if (p.nap * p.r > 20 || (p.nap * p.m > 4))
    throw Error(ErrorKind::Budget, "tuple space 2^" + std::to_string(p.nap * p.r) +
                                       " with " + std::to_string(p.m) +
                                       " trailing existentials is beyond the fragment cap");
  std::map<std::string, int> comp_of;
  for (int i = 0; i < p.r; ++i) comp_of[pre[i].var] = i;
  std::map<std::string, int> prop_of;
  for (int i = 0; i < p.nap; ++i) prop_of[p.props[i]] = i;

  const std::uint32_t space = 1u << (p.nap * p.r);
  if (space > budget) throw Error(ErrorKind::Budget, "tuple space exceeds the fragment budget");
  auto make_leaf = [&](Leaf::Kind kind, int at, const Formula& body) {
    Leaf l{kind, at, std::vector<char>(space)};
    for (std::uint32_t t = 0; t < space; ++t)
      l.table[t] = eval_prop(body, [&](const std::string& a, const std::string& x) {
        return (p.comp(t, comp_of.at(x)) >> prop_of.at(a)) & 1u;
      });
    p.leaves.push_back(std::move(l));
    return static_cast<int>(p.leaves.size()) - 1;
  };
  std::function<int(const Formula&)> go = [&](const Formula& f) -> int {
    Skel sk{f->op};
    if (f->op == Op::True || f->op == Op::False) {
    } else if (is_prop(f)) {
      sk.op = Op::Atom;
      sk.leaf = make_leaf(Leaf::At, 0, f);
      p.head = std::max(p.head, 1);
    } else if (f->op == Op::Next) {
      int k = 0;
      Formula cur = f;
      while (cur->op == Op::Next) cur = cur->lhs, ++k;
      sk.op = Op::Atom;
      sk.leaf = make_leaf(Leaf::At, k, cur);
      p.head = std::max(p.head, k + 1);
    } else if (f->op == Op::Eventually || f->op == Op::Always) {
      sk.leaf = make_leaf(f->op == Op::Eventually ? Leaf::Ev : Leaf::Al, 0, f->lhs);
      sk.op = Op::Atom;
    } else {
      sk.a = go(f->lhs);
      if (f->rhs) sk.b = go(f->rhs);
    }
    p.skel.push_back(sk);
    return static_cast<int>(p.skel.size()) - 1;
  };
  p.root = go(p.sentence.matrix);
  if (p.leaves.size() > 64) throw Error(ErrorKind::Budget, "more than 64 temporal leaves");
  return p;
}

struct TypeKey {
  std::vector<std::uint32_t> head;  // (n+1)-tuples
  std::vector<std::uint32_t> w;     // sorted (n+1)-tuples
  bool operator<(const TypeKey& o) const {
    if (head != o.head) return head < o.head;
    return w < o.w;
  }
};

struct Extension {
  std::vector<int> req;  // sorted type ids, one per trailing component (deduplicated)
  std::vector<std::uint32_t> head_full;
  std::vector<std::uint32_t> tuples;  // sorted full tuples
};

struct BudgetExceeded {};

struct FrameSolver {
  const FragmentProblem& p;
  std::size_t budget;
  std::size_t work = 0;
  std::map<TypeKey, int> ids;
  std::vector<TypeKey> keys;
  std::vector<std::vector<Extension>> exts;

  int intern(const TypeKey& k, std::vector<int>& queue) {
    auto [it, fresh] = ids.emplace(k, static_cast<int>(keys.size()));
    if (fresh) {
      keys.push_back(k);
      exts.emplace_back();
      queue.push_back(it->second);
    }
    return it->second;
  }

  void expand(int id, std::vector<int>& queue) {
    const TypeKey key = keys[id];
    const int n = p.n, m = p.m, nap = p.nap, h = p.head;
    const std::uint32_t E = 1u << (nap * m);
    const std::uint32_t subsets = (E >= 32) ? 0 : (1u << E);
    const int shift = (n + 1) * nap;
    const std::size_t nw = key.w.size();
    const int L = static_cast<int>(p.leaves.size());

    // masks per (recurring tuple, completion set)
    std::vector<std::vector<std::pair<std::uint64_t, std::uint64_t>>> masks(nw);
    for (std::size_t i = 0; i < nw; ++i) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> single(E);
      for (std::uint32_t e = 0; e < E; ++e) {
        std::uint32_t t = key.w[i] | (e << shift);
        std::uint64_t ev = 0, viol = 0;
        for (int l = 0; l < L; ++l) {
          if (p.leaves[l].table[t]) ev |= 1ull << l;
          else viol |= 1ull << l;
        }
        single[e] = {ev, viol};
      }
      masks[i].resize(subsets);
      for (std::uint32_t c = 1; c < subsets; ++c) {
        std::uint32_t low = c & (~c + 1);
        int e = __builtin_ctz(low);
        auto prev = masks[i][c ^ low];
        masks[i][c] = {prev.first | single[e].first, prev.second | single[e].second};
      }
    }

    auto component_type = [&](int c, const std::vector<std::uint32_t>& head_full,
                              const std::vector<std::uint32_t>& choice) {
      TypeKey k;
      for (auto t : head_full) k.head.push_back(p.low(t, n) | (p.comp(t, c) << (n * nap)));
      std::set<std::uint32_t> w;
      for (std::size_t i = 0; i < nw; ++i)
        for (std::uint32_t e = 0; e < E; ++e)
          if (choice[i] >> e & 1) {
            std::uint32_t t = key.w[i] | (e << shift);
            w.insert(p.low(t, n) | (p.comp(t, c) << (n * nap)));
          }
      k.w.assign(w.begin(), w.end());
      return k;
    };

    std::set<std::vector<int>> seen_req;
    std::vector<std::uint32_t> head_e(h, 0), head_full(h), choice(nw, 0);
    for (;;) {
      std::uint64_t hev = 0, hviol = 0;
      for (int j = 0; j < h; ++j) {
        head_full[j] = key.head[j] | (head_e[j] << shift);
        for (int l = 0; l < L; ++l) {
          if (p.leaves[l].table[head_full[j]]) hev |= 1ull << l;
          else hviol |= 1ull << l;
        }
      }
      std::function<void(std::size_t, std::uint64_t, std::uint64_t)> dfs =
          [&](std::size_t i, std::uint64_t ev, std::uint64_t viol) {
            if (i == nw) {
              if (++work > budget) throw BudgetExceeded{};
              if (!p.eval_skel(p.root, ev, viol, head_full)) return;
              std::vector<int> req;
              for (int c = n + 1; c < p.r; ++c)
                req.push_back(intern(component_type(c, head_full, choice), queue));
              std::sort(req.begin(), req.end());
              req.erase(std::unique(req.begin(), req.end()), req.end());
              if (!seen_req.insert(req).second) return;
              Extension x{req, head_full, {}};
              for (std::size_t q = 0; q < nw; ++q)
                for (std::uint32_t e = 0; e < E; ++e)
                  if (choice[q] >> e & 1) x.tuples.push_back(key.w[q] | (e << shift));
              std::sort(x.tuples.begin(), x.tuples.end());
              exts[id].push_back(std::move(x));
              return;
            }
            for (std::uint32_t c = 1; c < subsets; ++c) {
              choice[i] = c;
              dfs(i + 1, ev | masks[i][c].first, viol | masks[i][c].second);
            }
          };
      dfs(0, hev, hviol);
      int j = 0;
      while (j < h && ++head_e[j] == E) head_e[j++] = 0;
      if (j == h) break;
    }
  }

  // Explores types reachable from roots and returns the alive flags of the
  // greatest fixpoint.
  std::vector<char> solve(const std::vector<TypeKey>& roots, std::vector<int>& root_ids) {
    std::vector<int> queue;
    for (const auto& k : roots) root_ids.push_back(intern(k, queue));
    for (std::size_t i = 0; i < queue.size(); ++i) expand(queue[i], queue);
    std::vector<char> alive(keys.size(), 1);
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t t = 0; t < keys.size(); ++t) {
        if (!alive[t]) continue;
        bool ok = std::any_of(exts[t].begin(), exts[t].end(), [&](const Extension& x) {
          return std::all_of(x.req.begin(), x.req.end(), [&](int q) { return alive[q]; });
        });
        if (!ok) alive[t] = 0, changed = true;
      }
    }
    return alive;
  }
};

ValuationTuple decode_tuple(std::uint32_t t, const FragmentProblem& p, int comps) {
  ValuationTuple out;
  for (int c = 0; c < comps; ++c) out.push_back(decode_valuation(p.comp(t, c), p.props));
  return out;
}

struct FrameResult {
  Outcome outcome = Outcome::UnsatWithinBound;  // UnsatWithinBound marks "no model for this frame"
  std::optional<FragmentCertificate> cert;
  std::size_t work = 0;
};

FrameResult solve_frame(const FragmentProblem& p, const std::vector<std::uint32_t>& prefix_head,
                        const std::vector<std::uint32_t>& prefix_set, std::size_t budget) {
  FrameResult res;
  FrameSolver fs{p, budget, 0, {}, {}, {}};
  std::vector<TypeKey> roots;
  const int n = p.n, nap = p.nap;
  if (n == 0) {
    std::uint32_t letters = 1u << nap;
    std::vector<std::uint32_t> head(p.head, 0);
    for (;;) {
      for (std::uint32_t w = 1; w < (1u << letters); ++w) {
        TypeKey k{head, {}};
        for (std::uint32_t a = 0; a < letters; ++a)
          if (w >> a & 1) k.w.push_back(a);
        roots.push_back(k);
      }
      int j = 0;
      while (j < p.head && ++head[j] == letters) head[j++] = 0;
      if (j == p.head) break;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      TypeKey k;
      for (auto t : prefix_head) k.head.push_back(t | (p.comp(t, i) << (n * nap)));
      for (auto t : prefix_set) k.w.push_back(t | (p.comp(t, i) << (n * nap)));
      std::sort(k.w.begin(), k.w.end());
      roots.push_back(k);
    }
  }
  std::vector<int> root_ids;
  std::vector<char> alive;
  try {
    alive = fs.solve(roots, root_ids);
  } catch (const BudgetExceeded&) {
    res.outcome = Outcome::Unknown;
    res.work = fs.work;
    return res;
  }
  res.work = fs.work;
  std::vector<int> start;
  if (n == 0) {
    for (int id : root_ids)
      if (alive[id]) {
        start.push_back(id);
        break;
      }
  } else if (std::all_of(root_ids.begin(), root_ids.end(), [&](int id) { return alive[id]; })) {
    start = root_ids;
  }
  if (start.empty()) return res;

  // one extension per reachable alive type
  std::map<int, int> chosen;
  std::vector<int> stack = start;
  while (!stack.empty()) {
    int t = stack.back();
    stack.pop_back();
    if (chosen.count(t)) continue;
    const auto& xs = fs.exts[t];
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (std::all_of(xs[i].req.begin(), xs[i].req.end(), [&](int q) { return alive[q]; })) {
        chosen[t] = static_cast<int>(i);
        for (int q : xs[i].req) stack.push_back(q);
        break;
      }
  }
  FragmentCertificate c;
  c.sentence = p.sentence;
  c.props = p.props;
  c.prefix_len = n;
  c.witness_len = p.m;
  c.head_len = p.head;
  for (auto t : prefix_head) c.prefix_head.push_back(decode_tuple(t, p, n));
  for (auto t : prefix_set) c.prefix_set.push_back(decode_tuple(t, p, n));
  std::sort(c.prefix_set.begin(), c.prefix_set.end());
  for (auto [t, i] : chosen) {
    const Extension& x = fs.exts[t][i];
    VSet v;
    for (auto u : x.head_full) v.head.push_back(decode_tuple(u, p, p.r));
    for (auto u : x.tuples) v.tuples.push_back(decode_tuple(u, p, p.r));
    std::sort(v.tuples.begin(), v.tuples.end());
    c.members.push_back(std::move(v));
  }
  res.outcome = Outcome::Sat;
  res.cert = std::move(c);
  return res;
}

}  // namespace

Verdict sat_fragment(const Sentence& s, const DecideOptions& opt) {
  auto t0 = Clock::now();
  FragmentProblem p = compile_fragment(s, opt.fragment_budget);
  const int n = p.n, nap = p.nap;

  // frames: the leading existentials' head tuples and recurring set P0
  std::vector<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>> frames;
  if (n == 0) {
    frames.push_back({std::vector<std::uint32_t>(p.head, 0), {0}});
  } else {
    const std::uint32_t prefix_space = 1u << (n * nap);
    if (prefix_space > 16)
      throw Error(ErrorKind::Budget, "leading tuple space 2^" + std::to_string(n * nap) +
                                         " is beyond the fragment cap");
    std::vector<std::uint32_t> head(p.head, 0);
    for (;;) {
      for (std::uint32_t set = 1; set < (1u << prefix_space); ++set) {
        std::vector<std::uint32_t> p0;
        for (std::uint32_t t = 0; t < prefix_space; ++t)
          if (set >> t & 1) p0.push_back(t);
        frames.push_back({head, p0});
      }
      int j = 0;
      while (j < p.head && ++head[j] == prefix_space) head[j++] = 0;
      if (j == p.head) break;
    }
  }

  Verdict v;
  v.outcome = Outcome::Unsat;
  bool unknown = false;
  const std::size_t chunk = std::max(1, opt.jobs) * 4;
  for (std::size_t begin = 0; begin < frames.size(); begin += chunk) {
    std::size_t end = std::min(frames.size(), begin + chunk);
    std::vector<FrameResult> res(end - begin);
    run_parallel(begin, end, opt.jobs, [&](std::size_t i) {
      res[i - begin] = solve_frame(p, frames[i].first, frames[i].second, opt.fragment_budget);
    });
    for (auto& r : res) {
      v.stats.candidates += r.work;
      if (r.outcome == Outcome::Unknown) unknown = true;
      if (r.outcome == Outcome::Sat && v.outcome != Outcome::Sat) {
        v.outcome = Outcome::Sat;
        v.fragment = std::move(r.cert);
      }
    }
    if (v.outcome == Outcome::Sat) break;
  }
  if (v.outcome == Outcome::Sat) {
    std::string why = check_certificate(*v.fragment);
    if (!why.empty()) throw std::logic_error("fragment certificate fails its re-check: " + why);
  } else if (unknown) {
    v.outcome = Outcome::Unknown;
    v.note = "fragment budget of " + std::to_string(opt.fragment_budget) +
             " extensions per frame exhausted";
  }
  v.stats.seconds = seconds_since(t0);
  return v;
}

// ---------- certificate re-check ----------

namespace {

using Key = std::pair<std::vector<ValuationTuple>, std::set<ValuationTuple>>;

ValuationTuple project(const ValuationTuple& t, int n, int c) {
  ValuationTuple out(t.begin(), t.begin() + n);
  out.push_back(t[c]);
  return out;
}

Key member_key(const VSet& v, int n, int c) {
  Key k;
  for (const auto& t : v.head) k.first.push_back(project(t, n, c));
  for (const auto& t : v.tuples) k.second.insert(project(t, n, c));
  return k;
}

bool abstract_holds(const Formula& f, const VSet& v, const std::map<std::string, int>& comp_of) {
  auto on = [&](const Formula& beta, const ValuationTuple& t) {
    return eval_prop(beta, [&](const std::string& a, const std::string& x) {
      return t[comp_of.at(x)].count(a) > 0;
    });
  };
  auto any = [&](const Formula& beta, bool want) {
    for (const auto& t : v.head)
      if (on(beta, t) == want) return true;
    for (const auto& t : v.tuples)
      if (on(beta, t) == want) return true;
    return false;
  };
  if (f->op == Op::True || f->op == Op::False) return f->op == Op::True;
  if (is_prop(f)) return on(f, v.head.at(0));
  switch (f->op) {
    case Op::Not: return !abstract_holds(f->lhs, v, comp_of);
    case Op::And: return abstract_holds(f->lhs, v, comp_of) && abstract_holds(f->rhs, v, comp_of);
    case Op::Or: return abstract_holds(f->lhs, v, comp_of) || abstract_holds(f->rhs, v, comp_of);
    case Op::Implies: return !abstract_holds(f->lhs, v, comp_of) || abstract_holds(f->rhs, v, comp_of);
    case Op::Iff: return abstract_holds(f->lhs, v, comp_of) == abstract_holds(f->rhs, v, comp_of);
    case Op::Xor: return abstract_holds(f->lhs, v, comp_of) != abstract_holds(f->rhs, v, comp_of);
    case Op::Eventually: return any(f->lhs, true);
    case Op::Always: return !any(f->lhs, false);
    case Op::Next: {
      std::size_t k = 0;
      Formula cur = f;
      while (cur->op == Op::Next) cur = cur->lhs, ++k;
      return on(cur, v.head.at(k));
    }
    default: throw std::logic_error("formula outside the fragment");
  }
}

}  // namespace

std::string check_certificate(const FragmentCertificate& c) {
  const int n = c.prefix_len, r = c.prefix_len + 1 + c.witness_len;
  if (static_cast<int>(c.sentence.prefix.size()) != r) return "prefix arity mismatch";
  if (c.members.empty()) return "no members";
  std::map<std::string, int> comp_of;
  for (int i = 0; i < r; ++i) comp_of[c.sentence.prefix[i].var] = i;
  std::set<ValuationTuple> p0(c.prefix_set.begin(), c.prefix_set.end());
  std::set<Key> types;
  for (const auto& v : c.members) types.insert(member_key(v, n, n));
  for (std::size_t i = 0; i < c.members.size(); ++i) {
    const VSet& v = c.members[i];
    std::string at = "member " + std::to_string(i) + ": ";
    if (v.tuples.empty()) return at + "empty";
    if (static_cast<int>(v.head.size()) != c.head_len) return at + "head length";
    std::set<ValuationTuple> proj;
    for (const auto& t : v.tuples) {
      if (static_cast<int>(t.size()) != r) return at + "tuple arity";
      proj.insert(ValuationTuple(t.begin(), t.begin() + n));
    }
    if (proj != p0) return at + "prefix projection differs from P0";
    for (int j = 0; j < c.head_len; ++j)
      if (ValuationTuple(v.head[j].begin(), v.head[j].begin() + n) != c.prefix_head[j])
        return at + "prefix head differs";
    for (int comp = 0; comp < r; ++comp)
      if (!types.count(member_key(v, n, comp)))
        return at + "component " + std::to_string(comp) + " has no supporting member";
    if (!abstract_holds(c.sentence.matrix, v, comp_of)) return at + "matrix fails";
  }
  // the leading traces themselves must be covered
  for (int comp = 0; comp < n; ++comp) {
    Key k;
    for (const auto& t : c.prefix_head) {
      auto u = t;
      u.push_back(t[comp]);
      k.first.push_back(u);
    }
    for (const auto& t : c.prefix_set) {
      auto u = t;
      u.push_back(t[comp]);
      k.second.insert(u);
    }
    if (!types.count(k)) return "leading trace " + std::to_string(comp) + " has no member";
  }
  return "";
}

// ---------- witness chains ----------

WitnessChain fragment_witness_chain(const FragmentCertificate& c, int depth) {
  const int n = c.prefix_len, m = c.witness_len, h = c.head_len;
  const auto& pre = c.sentence.prefix;
  WitnessChain out;
  for (int i = 0; i < n; ++i) {
    LassoTrace t;
    for (const auto& u : c.prefix_head) t.stem.push_back(u[i]);
    for (const auto& u : c.prefix_set) t.loop.push_back(u[i]);
    out.base.push_back(t);
  }
  std::map<Key, const VSet*> by_key;
  for (const auto& v : c.members) by_key.emplace(member_key(v, n, n), &v);

  std::vector<LassoTrace> frontier;
  if (n == 0) {
    const VSet& v = c.members.front();
    LassoTrace t;
    for (const auto& u : v.head) t.stem.push_back(u[0]);
    std::set<Valuation> w;
    for (const auto& u : v.tuples) w.insert(u[0]);
    t.loop.assign(w.begin(), w.end());
    frontier.push_back(t);
  } else {
    frontier = out.base;
  }
  std::set<LassoTrace> seen(frontier.begin(), frontier.end());

  auto tuple_at = [&](const std::vector<const LassoTrace*>& ts, std::size_t j) {
    ValuationTuple u;
    for (const auto* t : ts) u.push_back(value_at(*t, j));
    return u;
  };

  for (int level = 0; level < depth; ++level) {
    std::vector<ChainStep> steps;
    std::vector<LassoTrace> next;
    for (const auto& t : frontier) {
      std::vector<const LassoTrace*> ts;
      for (const auto& b : out.base) ts.push_back(&b);
      ts.push_back(&t);
      Alignment al = align(ts);
      if (al.stem > static_cast<std::size_t>(h))
        throw std::logic_error("chain trace stem exceeds the head length");
      const std::size_t P = al.period;
      Key key;
      for (int j = 0; j < h; ++j) key.first.push_back(tuple_at(ts, j));
      for (std::size_t q = 0; q < P; ++q) key.second.insert(tuple_at(ts, h + q));
      auto it = by_key.find(key);
      if (it == by_key.end()) throw std::logic_error("chain trace has no member in the certificate");
      const VSet& v = *it->second;

      std::map<ValuationTuple, std::vector<ValuationTuple>> completions;
      for (const auto& u : v.tuples)
        completions[ValuationTuple(u.begin(), u.begin() + n + 1)].push_back(u);
      std::size_t K = 1;
      for (const auto& [w, cs] : completions) K = std::max(K, cs.size());

      ChainStep step{t, std::vector<LassoTrace>(m)};
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < h; ++j) step.witnesses[i].stem.push_back(v.head[j][n + 1 + i]);
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t q = 0; q < P; ++q) {
          const auto& cs = completions.at(tuple_at(ts, h + q));
          const auto& full = cs[k % cs.size()];
          for (int i = 0; i < m; ++i) step.witnesses[i].loop.push_back(full[n + 1 + i]);
        }

      TraceAssignment asg;
      for (int i = 0; i < n; ++i) asg[pre[i].var] = out.base[i];
      asg[pre[n].var] = t;
      for (int i = 0; i < m; ++i) asg[pre[n + 1 + i].var] = step.witnesses[i];
      if (!eval_qf(c.sentence.matrix, asg))
        throw std::logic_error("chain step fails the matrix at level " + std::to_string(level));
      std::vector<const LassoTrace*> all = ts;
      for (const auto& w : step.witnesses) all.push_back(&w);
      Alignment full_al = align(all);
      std::set<ValuationTuple> recurring;
      for (std::size_t q = 0; q < full_al.period; ++q) recurring.insert(tuple_at(all, h + q));
      std::set<ValuationTuple> want(v.tuples.begin(), v.tuples.end());
      if (recurring != want) throw std::logic_error("chain step loop misses a recurring tuple");

      for (const auto& w : step.witnesses)
        if (seen.insert(w).second) next.push_back(w);
      steps.push_back(std::move(step));
    }
    out.levels.push_back(std::move(steps));
    frontier = std::move(next);
  }
  return out;
}

}  // namespace hyperltl
