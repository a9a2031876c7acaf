#include "hyperltl/modelcheck.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "hyperltl/syntax.hpp"

namespace hyperltl {

namespace {

// Product of a with k on the channels of var, then those channels projected away.
NBA compose_and_project(const NBA& a, const KripkeStructure& k, const std::string& var) {
  std::vector<std::string> rest;
  std::vector<std::pair<int, std::string>> own_bits;
  for (std::size_t i = 0; i < a.props.size(); ++i) {
    auto [p, v] = split_channel(a.props[i]);
    if (v == var) own_bits.emplace_back(static_cast<int>(i), p);
    else rest.push_back(a.props[i]);
  }
  std::vector<Letter> label_bits(k.size(), 0);
  for (int s = 0; s < k.size(); ++s)
    for (const auto& [bitpos, p] : own_bits)
      if (k.labels[s].count(p)) label_bits[s] |= Letter{1} << bitpos;
  Letter own_mask = 0;
  for (const auto& ob : own_bits) own_mask |= Letter{1} << ob.first;

  NBA prod;
  prod.props = a.props;
  if (a.alphabet) {
    // Keep only letters whose own part is some state label.
    std::set<Letter> labels(label_bits.begin(), label_bits.end());
    std::vector<Letter> ls;
    for (Letter l : *a.alphabet)
      if (labels.count(l & own_mask)) ls.push_back(l);
    prod.alphabet = ls;
  }
  std::map<std::pair<int, int>, int> ids;
  std::vector<std::pair<int, int>> states;
  auto get = [&](int q, int s) {
    auto key = std::make_pair(q, s);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    int id = prod.add_state(a.accepting[q]);
    ids[key] = id;
    states.push_back(key);
    return id;
  };
  for (int q : a.initial)
    for (int s = 0; s < k.size(); ++s)
      if (k.initial[s]) prod.initial.push_back(get(q, s));
  for (std::size_t cur = 0; cur < states.size(); ++cur) {
    auto [q, s] = states[cur];
    for (const auto& e : a.edges[q]) {
      Guard g = e.guard;
      if ((label_bits[s] & g.pos & own_mask) != (g.pos & own_mask)) continue;
      if (label_bits[s] & g.neg & own_mask) continue;
      g.pos = (g.pos & ~own_mask) | label_bits[s];
      g.neg = (g.neg & ~own_mask) | (own_mask & ~label_bits[s]);
      for (int t : k.succ[s]) {
        int to = get(e.to, t);
        prod.edges[cur].push_back({g, to});
      }
    }
  }
  return prune(reindex(prune(prod), rest));
}

// Letters over a.props that some assignment of structure states can produce.
std::vector<Letter> structure_alphabet(const NBA& a, const KripkeStructure& k) {
  std::map<std::string, std::vector<std::pair<int, std::string>>> by_var;
  for (std::size_t i = 0; i < a.props.size(); ++i) {
    auto [p, v] = split_channel(a.props[i]);
    by_var[v].emplace_back(static_cast<int>(i), p);
  }
  std::set<Letter> letters{0};
  for (const auto& [v, bits] : by_var) {
    std::set<Letter> parts;
    for (int s = 0; s < k.size(); ++s) {
      Letter l = 0;
      for (const auto& [b, p] : bits)
        if (k.labels[s].count(p)) l |= Letter{1} << b;
      parts.insert(l);
    }
    std::set<Letter> next;
    for (Letter l : letters)
      for (Letter p : parts) next.insert(l | p);
    if (next.size() > 1u << 20)
      throw Error(ErrorKind::Budget, "self-composition alphabet is too large");
    letters = std::move(next);
  }
  return {letters.begin(), letters.end()};
}

Formula relabel(const Formula& f) {
  switch (f->op) {
    case Op::Atom: return atom(channel(f->prop, f->var), kImplicitVar);
    case Op::True:
    case Op::False: return f;
    default:
      return make(f->op, f->lhs ? relabel(f->lhs) : nullptr, f->rhs ? relabel(f->rhs) : nullptr);
  }
}

}  // namespace

bool modelcheck(const KripkeStructure& k, const Sentence& s, const ComplementOptions& opt,
                McStats* stats) {
  k.validate();
  if (has_quantifier(s.matrix)) throw Error(ErrorKind::Shape, "model checking needs a prenex sentence");
  std::set<std::string> bound;
  for (const auto& b : s.prefix) bound.insert(b.var);
  for (const auto& v : free_vars(s.matrix))
    if (!bound.count(v)) throw Error(ErrorKind::Shape, "free trace variable " + v);

  McStats local;
  McStats& st = stats ? *stats : local;
  auto note = [&](const NBA& a) {
    st.largest_automaton = std::max(st.largest_automaton, static_cast<std::size_t>(a.size()));
  };

  Formula zipped = relabel(s.matrix);
  bool negated = !s.prefix.empty() && s.prefix.back().quant == Quant::Forall;
  Formula start = negated ? lnot(zipped) : zipped;
  bool alternates = false;
  for (const auto& b : s.prefix) alternates |= (b.quant == Quant::Forall) != negated;
  // Complementation is cheap on weak automata, so prefer the weak form when one is due.
  std::optional<NBA> weak = alternates ? weak_nba(start) : std::nullopt;
  NBA a = weak ? std::move(*weak) : ltl_to_nba(start);
  note(a);
  for (int i = static_cast<int>(s.prefix.size()) - 1; i >= 0; --i) {
    bool want_negated = s.prefix[i].quant == Quant::Forall;
    if (want_negated != negated) {
      NBA in = a;
      in.alphabet = structure_alphabet(a, k);
      try {
        a = complement_nba(in, opt);
      } catch (const ComplementBlowup& e) {
        throw ComplementBlowup(e.what(), i);
      }
      ++st.complementations;
      negated = want_negated;
      note(a);
    }
    a = compose_and_project(a, k, s.prefix[i].var);
    note(a);
  }
  bool nonempty = nba_nonempty(a).has_value();
  return nonempty != negated;
}

}  // namespace hyperltl
