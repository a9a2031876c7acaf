#include "hyperltl/encode.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>

#include "hyperltl/error.hpp"
#include "hyperltl/semantics.hpp"
#include "hyperltl/transform.hpp"

namespace hyperltl {

// ---------- bounded PCP ----------

std::string pcp_letter(char c) { return std::string(1, c); }
std::string pcp_bar_letter(char c) { return std::string("bar_") + c; }

namespace {

const char* kHash = "hash";
const char* kDollar = "dollar";
const char* kPairProps[] = {"p00", "p01", "p10", "p11"};

std::vector<std::string> padded(const std::string& u, std::size_t len) {
  std::vector<std::string> out;
  for (char c : u) out.push_back(pcp_letter(c));
  while (out.size() < len) out.push_back(kHash);
  return out;
}

std::vector<std::string> window(const std::string& u, std::size_t len, std::size_t j) {
  auto out = padded(u, len);
  out[j] = pcp_bar_letter(u[j]);
  return out;
}

// Least significant bit first; zero is the single bit 0.
std::string binary(std::size_t r) {
  if (r == 0) return "0";
  std::string out;
  for (; r; r >>= 1) out += (r & 1) ? '1' : '0';
  return out;
}

Formula at(const std::string& prop, const std::string& v) { return atom(prop, v); }

Formula match(const std::vector<std::string>& word, int offset, const std::string& v) {
  std::vector<Formula> parts;
  for (std::size_t k = 0; k < word.size(); ++k)
    parts.push_back(next(at(word[k], v), offset + static_cast<int>(k)));
  return land(parts);
}

struct PcpBuilder {
  const PcpInstance& p;
  int L = 0;
  std::vector<char> sigma;
  std::vector<std::string> ap;

  explicit PcpBuilder(const PcpInstance& inst) : p(inst) {
    std::set<char> letters;
    for (const auto& [u, w] : p.pairs) {
      L = std::max<int>({L, static_cast<int>(u.size()), static_cast<int>(w.size())});
      letters.insert(u.begin(), u.end());
      letters.insert(w.begin(), w.end());
    }
    sigma.assign(letters.begin(), letters.end());
    for (char c : sigma) ap.push_back(pcp_letter(c));
    for (char c : sigma) ap.push_back(pcp_bar_letter(c));
    for (const char* x : {kHash, kDollar, "b0", "b1"}) ap.push_back(x);
    for (const char* x : kPairProps) ap.push_back(x);
  }

  Formula dollar_closed(const std::string& v) const {
    return always(limplies(at(kDollar, v), next(at(kDollar, v))));
  }
  Formula any_bar(const std::string& v) const {
    std::vector<Formula> parts;
    for (char c : sigma) parts.push_back(at(pcp_bar_letter(c), v));
    return lor(parts);
  }
  Formula any_pair(const std::string& v) const {
    std::vector<Formula> parts;
    for (const char* x : kPairProps) parts.push_back(at(x, v));
    return lor(parts);
  }
  Formula first_bit(const std::string& v) const { return lor(at("p10", v), at("p11", v)); }
  Formula second_bit(const std::string& v) const { return lor(at("p01", v), at("p11", v)); }

  Formula type_one(const std::string& v) const {
    std::vector<Formula> words;
    for (const auto& [u, w] : p.pairs) {
      auto both = padded(u, L);
      auto second = padded(w, L);
      both.insert(both.end(), second.begin(), second.end());
      words.push_back(match(both, 0, v));
    }
    Formula bit = lor(at("b0", v), at("b1", v));
    Formula bits = lor(land(at("b0", v), next(at(kDollar, v))),
                       until(bit, land(at("b1", v), next(at(kDollar, v)))));
    return land({lor(words), next(bits, 2 * L), dollar_closed(v)});
  }

  Formula block(const std::string& v, bool second, bool only_first) const {
    std::vector<Formula> parts;
    for (const auto& pr : p.pairs) {
      const std::string& u = second ? pr.second : pr.first;
      for (std::size_t j = 0; j < (only_first ? 1 : u.size()); ++j)
        parts.push_back(match(window(u, L, j), second ? L : 0, v));
    }
    return lor(parts);
  }

  Formula type_two(const std::string& v) const {
    Formula pairs = lor(land(at("p00", v), next(at(kDollar, v))),
                        until(any_pair(v), land({lnot(at("p00", v)), any_pair(v), next(at(kDollar, v))})));
    return land({block(v, false, false), block(v, true, false), next(pairs, 2 * L), dollar_closed(v)});
  }

  Formula same_trace(const std::string& x, const std::string& y) const {
    std::vector<Formula> parts;
    for (const auto& a : ap) parts.push_back(liff(at(a, x), at(a, y)));
    return always(land(parts));
  }

  // The marked letter of the block at offset sits on the last letter of its word.
  Formula last_bar(const std::string& v, int offset) const {
    std::vector<Formula> parts;
    for (int j = 0; j < L; ++j) {
      Formula here = next(any_bar(v), offset + j);
      parts.push_back(j + 1 < L ? land(here, next(at(kHash, v), offset + j + 1)) : here);
    }
    return lor(parts);
  }

  Formula same_word(const std::string& x, const std::string& y, int offset) const {
    std::vector<Formula> parts;
    for (int k = 0; k < L; ++k) {
      std::vector<Formula> letters;
      for (char c : sigma)
        letters.push_back(liff(lor(at(pcp_letter(c), x), at(pcp_bar_letter(c), x)),
                               lor(at(pcp_letter(c), y), at(pcp_bar_letter(c), y))));
      letters.push_back(liff(at(kHash, x), at(kHash, y)));
      parts.push_back(next(land(letters), offset + k));
    }
    return land(parts);
  }

  Formula shifted(const std::string& x, const std::string& y, int offset) const {
    std::vector<Formula> parts;
    for (int j = 0; j + 1 < L; ++j)
      parts.push_back(land(next(any_bar(x), offset + j), next(any_bar(y), offset + j + 1)));
    return lor(parts);
  }

  Formula equal_from(const Formula& fx, const Formula& fy) const {
    return next(always(liff(fx, fy)), 2 * L);
  }

  // Number read from fy is one more than the number read from fx.
  Formula incremented(const Formula& fx, const Formula& fy) const {
    return next(until(land(fx, lnot(fy)), land({lnot(fx), fy, next(always(liff(fx, fy)))})), 2 * L);
  }

  Formula component_step(const std::string& x, const std::string& y, bool second) const {
    int offset = second ? L : 0;
    Formula fx = second ? second_bit(x) : first_bit(x);
    Formula fy = second ? second_bit(y) : first_bit(y);
    Formula last = last_bar(x, offset);
    return land(limplies(lnot(last), land({same_word(x, y, offset), shifted(x, y, offset), equal_from(fx, fy)})),
                limplies(last, land(block(y, second, true), incremented(fx, fy))));
  }

  Formula compatible(const std::string& x, const std::string& t1, bool second) const {
    int offset = second ? L : 0;
    std::vector<Formula> parts;
    for (int k = 0; k < L; ++k) {
      std::vector<Formula> letters;
      for (char c : sigma)
        letters.push_back(liff(at(pcp_letter(c), t1), lor(at(pcp_letter(c), x), at(pcp_bar_letter(c), x))));
      letters.push_back(liff(at(kHash, t1), at(kHash, x)));
      parts.push_back(next(land(letters), offset + k));
    }
    parts.push_back(equal_from(at("b1", t1), second ? second_bit(x) : first_bit(x)));
    return land(parts);
  }

  Formula build() const {
    std::vector<Formula> reqs;
    // exactly one proposition everywhere
    {
      std::vector<Formula> one;
      for (const auto& a : ap) {
        std::vector<Formula> others{at(a, "x1")};
        for (const auto& b : ap)
          if (b != a) others.push_back(lnot(at(b, "x1")));
        one.push_back(land(others));
      }
      reqs.push_back(forall("x1", always(lor(one))));
    }
    reqs.push_back(forall("x2", lor(type_one("x2"), type_two("x2"))));
    {
      std::vector<Formula> same;
      for (const char* b : {"b0", "b1", kDollar}) same.push_back(liff(at(b, "x3"), at(b, "y3")));
      Formula same_rank = next(always(land(same)), 2 * L);
      reqs.push_back(forall("x3", forall("y3", limplies(land({type_one("x3"), type_one("y3"), same_rank}),
                                                         same_trace("x3", "y3")))));
    }
    {
      Formula zero = next(land(at("b0", "x4"), next(at(kDollar, "x4"))), 2 * L);
      std::vector<Formula> same;
      for (const char* b : {"b0", "b1", kDollar}) same.push_back(liff(at(b, "y4"), at(b, "x4")));
      Formula pred = next(until(land(at("b1", "y4"), at("b0", "x4")),
                                land({lor(at("b0", "y4"), at(kDollar, "y4")), at("b1", "x4"),
                                      next(always(land(same)))})),
                          2 * L);
      reqs.push_back(forall("x4", exists("y4", limplies(land(type_one("x4"), lnot(zero)),
                                                        land(type_one("y4"), pred)))));
    }
    {
      std::vector<Formula> starts;
      for (const auto& [u, w] : p.pairs)
        starts.push_back(land(match(window(u, L, 0), 0, "x5"), match(window(w, L, 0), L, "x5")));
      reqs.push_back(exists("x5", land({type_two("x5"), lor(starts),
                                        next(land(at("p00", "x5"), next(at(kDollar, "x5"))), 2 * L)})));
    }
    {
      Formula final_ = land({last_bar("x6", 0), last_bar("x6", L),
                             next(until(lor(at("p00", "x6"), at("p11", "x6")), at(kDollar, "x6")), 2 * L)});
      Formula step = land({type_two("y6"), component_step("x6", "y6", false), component_step("x6", "y6", true)});
      reqs.push_back(forall("x6", exists("y6", limplies(type_two("x6"), lor(final_, step)))));
    }
    reqs.push_back(forall(
        "x7", exists("y7", exists("z7", limplies(type_two("x7"),
                                                 land({type_one("y7"), compatible("x7", "y7", false),
                                                       type_one("z7"), compatible("x7", "z7", true)}))))));
    {
      std::vector<Formula> letters;
      for (char c : sigma) {
        std::vector<Formula> first, second;
        for (int k = 0; k < L; ++k) {
          first.push_back(next(at(pcp_bar_letter(c), "x8"), k));
          second.push_back(next(at(pcp_bar_letter(c), "x8"), L + k));
        }
        letters.push_back(land(lor(first), lor(second)));
      }
      reqs.push_back(forall("x8", limplies(type_two("x8"), lor(letters))));
    }
    return land(reqs);
  }
};

}  // namespace

PcpEncoding encode_pcp(const PcpInstance& p) {
  if (p.pairs.empty()) throw Error(ErrorKind::InvalidArgument, "PCP instance has no pairs");
  for (const auto& [u, w] : p.pairs)
    if (u.empty() || w.empty()) throw Error(ErrorKind::EmptyWordPair, "PCP pair has an empty word");
  if (p.pairs.size() > 20) throw Error(ErrorKind::SizeBlowup, "more than 20 pairs");
  PcpBuilder b(p);
  PcpEncoding out;
  out.sentence = prenex(b.build());
  out.k = (1 << p.pairs.size()) + 2 * b.L + 1;
  return out;
}

FiniteTraceModel pcp_solution_model(const PcpInstance& p, const std::vector<int>& s) {
  if (s.empty()) throw Error(ErrorKind::NotASolution, "empty index word");
  std::string h, h2;
  for (int m : s) {
    if (m < 1 || m > static_cast<int>(p.pairs.size()))
      throw Error(ErrorKind::InvalidArgument, "pair index " + std::to_string(m) + " out of range");
    h += p.pairs[m - 1].first;
    h2 += p.pairs[m - 1].second;
  }
  if (h != h2) throw Error(ErrorKind::NotASolution, "'" + h + "' differs from '" + h2 + "'");
  std::size_t L = 0;
  for (const auto& [u, w] : p.pairs) L = std::max({L, u.size(), w.size()});

  auto lasso = [](const std::vector<std::string>& stem) {
    LassoTrace t;
    for (const auto& a : stem) t.stem.push_back({a});
    t.loop.push_back({kDollar});
    return t;
  };
  std::vector<LassoTrace> traces;
  for (std::size_t r = 0; r < s.size(); ++r) {
    const auto& [u, w] = p.pairs[s[r] - 1];
    auto stem = padded(u, L);
    auto second = padded(w, L);
    stem.insert(stem.end(), second.begin(), second.end());
    for (char bit : binary(r)) stem.push_back(bit == '1' ? "b1" : "b0");
    traces.push_back(lasso(stem));
  }
  // (r, j) with sum of earlier word lengths plus j equal to i
  auto locate = [&](std::size_t i, bool second) {
    std::size_t r = 0;
    for (;; ++r) {
      const std::string& u = second ? p.pairs[s[r] - 1].second : p.pairs[s[r] - 1].first;
      if (i < u.size()) return std::make_pair(r, i);
      i -= u.size();
    }
  };
  for (std::size_t i = 0; i < h.size(); ++i) {
    auto [r, j] = locate(i, false);
    auto [r2, j2] = locate(i, true);
    auto stem = window(p.pairs[s[r] - 1].first, L, j);
    auto second = window(p.pairs[s[r2] - 1].second, L, j2);
    stem.insert(stem.end(), second.begin(), second.end());
    std::string x = binary(r), y = binary(r2);
    std::size_t len = std::max(x.size(), y.size());
    x.resize(len, '0');
    y.resize(len, '0');
    for (std::size_t q = 0; q < len; ++q) stem.push_back(std::string("p") + x[q] + y[q]);
    traces.push_back(lasso(stem));
  }
  return make_model(std::move(traces));
}

// ---------- two-counter machines ----------

namespace {

std::string counter(int i) { return std::to_string(i); }

Formula le(const std::string& x, const std::string& y, int i) {
  return always(limplies(atom(counter(i), x), atom(counter(i), y)));
}

Formula lt(const std::string& x, const std::string& y, int i) {
  return land(le(x, y, i), eventually(land(lnot(atom(counter(i), x)), atom(counter(i), y))));
}

}  // namespace

Sentence encode_minsky(const MinskyMachine& m, bool normalize) {
  std::vector<Formula> parts;
  for (int i : {1, 2})
    parts.push_back(forall("x", forall("y", lor(le("x", "y", i), le("y", "x", i)))));
  std::vector<std::string> states = m.states;
  if (std::find(states.begin(), states.end(), m.init) == states.end()) states.push_back(m.init);
  for (const auto& r : m.rules)
    for (const auto& q : {r.from, r.to})
      if (std::find(states.begin(), states.end(), q) == states.end()) states.push_back(q);
  {
    std::vector<Formula> excl;
    for (std::size_t a = 0; a < states.size(); ++a)
      for (std::size_t b = 0; b < states.size(); ++b)
        if (a != b) excl.push_back(limplies(atom(states[a], "x"), lnot(atom(states[b], "x"))));
    parts.push_back(forall("x", land(excl)));
  }
  parts.push_back(exists("x", land(atom(m.init, "x"),
                                   always(land(lnot(atom("1", "x")), lnot(atom("2", "x")))))));
  std::vector<Formula> steps;
  for (std::size_t k = 0; k < m.rules.size(); ++k) {
    const auto& r = m.rules[k];
    const int i = r.counter, other = 3 - r.counter;
    const std::string z = "z" + std::to_string(k + 1);
    Formula op;
    switch (r.op) {
      case CounterOp::Inc:
        op = forall(z, land(lt("x", "y", i), lor(le(z, "x", i), le("y", z, i))));
        break;
      case CounterOp::Dec:
        op = forall(z, land(lt("y", "x", i), lor(le("x", z, i), le(z, "y", i))));
        break;
      case CounterOp::Zero:
        op = always(land(lnot(atom(counter(i), "x")), lnot(atom(counter(i), "y"))));
        break;
    }
    steps.push_back(land({atom(r.from, "x"), atom(r.to, "y"), op,
                          always(liff(atom(counter(other), "x"), atom(counter(other), "y")))}));
  }
  parts.push_back(forall("x", exists("y", lor(steps))));
  Sentence s = prenex(land(parts));
  return normalize ? normalize_forall2_exists(s, true) : s;
}

MinskyRun minsky_run(const MinskyMachine& m, int max_steps) {
  MinskyRun run;
  run.configs.push_back({m.init, 0, 0});
  for (int step = 0; step < max_steps; ++step) {
    MinskyConfig cur = run.configs.back();
    std::optional<MinskyConfig> nxt;
    for (const auto& r : m.rules) {
      if (r.from != cur.state) continue;
      int& c = r.counter == 1 ? cur.c1 : cur.c2;
      int before = c;
      if (r.op == CounterOp::Dec && before == 0) continue;
      if (r.op == CounterOp::Zero && before != 0) continue;
      MinskyConfig out = cur;
      int& oc = r.counter == 1 ? out.c1 : out.c2;
      oc = before + (r.op == CounterOp::Inc ? 1 : r.op == CounterOp::Dec ? -1 : 0);
      out.state = r.to;
      nxt = out;
      break;
    }
    if (!nxt) break;
    if (std::find(run.configs.begin(), run.configs.end(), *nxt) != run.configs.end()) {
      run.cyclic = true;
      break;
    }
    run.configs.push_back(*nxt);
  }
  return run;
}

LassoTrace minsky_trace(const MinskyConfig& c) {
  LassoTrace t;
  int len = std::max({1, c.c1, c.c2});
  for (int j = 0; j < len; ++j) {
    Valuation v;
    if (j == 0) v.insert(c.state);
    if (j < c.c1) v.insert("1");
    if (j < c.c2) v.insert("2");
    t.stem.push_back(v);
  }
  t.loop.push_back({});
  return t;
}

FiniteTraceModel minsky_run_model(const MinskyRun& run) {
  std::vector<LassoTrace> traces;
  for (const auto& c : run.configs) traces.push_back(minsky_trace(c));
  return make_model(std::move(traces));
}

std::size_t minsky_rank(const FiniteTraceModel& model, const LassoTrace& t, int i) {
  if (i != 1 && i != 2) throw Error(ErrorKind::InvalidArgument, "counter must be 1 or 2");
  const std::string c = counter(i);
  auto iset = [&](const LassoTrace& x) {
    for (const auto& v : x.loop)
      if (v.count(c)) throw Error(ErrorKind::InvalidArgument, "infinite " + c + "-set");
    std::set<std::size_t> out;
    for (std::size_t j = 0; j < x.stem.size(); ++j)
      if (x.stem[j].count(c)) out.insert(j);
    return out;
  };
  std::vector<std::set<std::size_t>> sets;
  for (const auto& x : model.traces) sets.push_back(iset(x));
  auto mine = iset(t);
  auto within = [](const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  };
  sets.push_back(mine);
  for (const auto& a : sets)
    for (const auto& b : sets)
      if (!within(a, b) && !within(b, a))
        throw Error(ErrorKind::NotTotallyOrdered, c + "-sets are not ordered by inclusion");
  sets.pop_back();
  std::set<std::set<std::size_t>> below;
  for (const auto& a : sets)
    if (a != mine && within(a, mine)) below.insert(a);
  return below.size();
}

// ---------- star-free expressions ----------

namespace {

StarFreeExpr node(StarFreeNode::Kind k, StarFreeExpr l = nullptr, StarFreeExpr r = nullptr) {
  return std::make_shared<const StarFreeNode>(StarFreeNode{k, std::move(l), std::move(r)});
}

class StarFreeParser {
 public:
  explicit StarFreeParser(const std::string& text) : s_(text) {}

  StarFreeExpr parse() {
    StarFreeExpr e = sum();
    skip();
    if (i_ != s_.size()) fail("end of expression");
    return e;
  }

 private:
  const std::string& s_;
  std::size_t i_ = 0;

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  [[noreturn]] void fail(const std::string& expected) {
    throw ParseError(ErrorKind::Parse, "expected " + expected, {i_, std::min(i_ + 1, s_.size())},
                     {expected});
  }
  bool starts_unary() {
    skip();
    return i_ < s_.size() && (s_[i_] == '!' || s_[i_] == '(' || std::isalpha(static_cast<unsigned char>(s_[i_])));
  }
  StarFreeExpr sum() {
    StarFreeExpr e = concat();
    for (skip(); i_ < s_.size() && s_[i_] == '+'; skip()) {
      ++i_;
      e = sf_sum(e, concat());
    }
    return e;
  }
  StarFreeExpr concat() {
    StarFreeExpr e = unary();
    for (;;) {
      skip();
      if (i_ < s_.size() && s_[i_] == '.') {
        ++i_;
        e = sf_concat(e, unary());
      } else if (starts_unary()) {
        e = sf_concat(e, unary());
      } else {
        return e;
      }
    }
  }
  StarFreeExpr unary() {
    skip();
    if (i_ < s_.size() && s_[i_] == '!') {
      ++i_;
      return sf_complement(unary());
    }
    if (i_ < s_.size() && s_[i_] == '(') {
      ++i_;
      StarFreeExpr e = sum();
      skip();
      if (i_ >= s_.size() || s_[i_] != ')') fail("')'");
      ++i_;
      return e;
    }
    std::size_t start = i_;
    while (i_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[i_]))) ++i_;
    std::string w = s_.substr(start, i_ - start);
    if (w == "a") return sf_a();
    if (w == "b") return sf_b();
    if (w == "eps") return sf_eps();
    if (w == "empty") return sf_empty();
    i_ = start;
    fail("a, b, eps, empty, '!' or '('");
  }
};

int sf_prec(const StarFreeExpr& e) {
  switch (e->kind) {
    case StarFreeNode::Sum: return 0;
    case StarFreeNode::Concat: return 1;
    default: return 2;
  }
}

struct StarFreeFormula {
  std::set<std::string> used;
  int counter = 0;

  std::string fresh(const std::string& base) {
    std::string v;
    do v = base + std::to_string(++counter);
    while (used.count(v));
    used.insert(v);
    return v;
  }

  Formula letter(const std::string& x, const std::string& v) {
    std::string tau = fresh("h");
    return exists(tau, land({eventually(atom(kHash, tau)), eventually(atom(x, v)),
                             always(land(liff(atom("l", tau), atom("l", v)),
                                         liff(atom("r", tau), atom("r", v))))}));
  }

  Formula go(const StarFreeExpr& e, const std::string& v) {
    switch (e->kind) {
      case StarFreeNode::Empty: return land(atom("a", v), lnot(atom("a", v)));
      case StarFreeNode::Eps: return always(lor(atom("l", v), atom("r", v)));
      case StarFreeNode::A: return letter("a", v);
      case StarFreeNode::B: return letter("b", v);
      case StarFreeNode::Sum: return lor(go(e->lhs, v), go(e->rhs, v));
      case StarFreeNode::Complement: return lnot(go(e->lhs, v));
      case StarFreeNode::Concat: {
        std::string v1 = fresh("c"), v2 = fresh("c");
        Formula shape = land({eventually(atom("r", v1)), eventually(atom("r", v2)),
                              always(land(lnot(atom(kHash, v1)), lnot(atom(kHash, v2)))),
                              go(e->lhs, v1), go(e->rhs, v2)});
        Formula glue = land(
            always(liff(atom("l", v2), lnot(atom("r", v1)))),
            always(land(liff(atom("a", v), lor(atom("a", v1), atom("a", v2))),
                        liff(atom("b", v), lor(atom("b", v1), atom("b", v2))))));
        return exists(v1, exists(v2, land(shape, glue)));
      }
    }
    throw std::logic_error("unknown star-free node");
  }
};

}  // namespace

StarFreeExpr sf_a() { return node(StarFreeNode::A); }
StarFreeExpr sf_b() { return node(StarFreeNode::B); }
StarFreeExpr sf_eps() { return node(StarFreeNode::Eps); }
StarFreeExpr sf_empty() { return node(StarFreeNode::Empty); }
StarFreeExpr sf_sum(StarFreeExpr x, StarFreeExpr y) { return node(StarFreeNode::Sum, x, y); }
StarFreeExpr sf_concat(StarFreeExpr x, StarFreeExpr y) { return node(StarFreeNode::Concat, x, y); }
StarFreeExpr sf_complement(StarFreeExpr x) { return node(StarFreeNode::Complement, x); }

StarFreeExpr parse_starfree(const std::string& text) { return StarFreeParser(text).parse(); }

std::string print_starfree(const StarFreeExpr& e) {
  auto wrap = [](const StarFreeExpr& x, bool paren) {
    std::string s = print_starfree(x);
    return paren ? "(" + s + ")" : s;
  };
  switch (e->kind) {
    case StarFreeNode::A: return "a";
    case StarFreeNode::B: return "b";
    case StarFreeNode::Eps: return "eps";
    case StarFreeNode::Empty: return "empty";
    case StarFreeNode::Sum: return wrap(e->lhs, false) + " + " + wrap(e->rhs, sf_prec(e->rhs) == 0);
    case StarFreeNode::Concat:
      return wrap(e->lhs, sf_prec(e->lhs) < 1) + "." + wrap(e->rhs, sf_prec(e->rhs) <= 1);
    case StarFreeNode::Complement: return "!" + wrap(e->lhs, sf_prec(e->lhs) < 2);
  }
  return "?";
}

int starfree_size(const StarFreeExpr& e) {
  if (!e) return 0;
  return 1 + starfree_size(e->lhs) + starfree_size(e->rhs);
}

Formula starfree_formula(const StarFreeExpr& e, const std::string& var) {
  StarFreeFormula b;
  b.used.insert(var);
  return b.go(e, var);
}

Sentence encode_starfree(const StarFreeExpr& e) {
  const std::string v = "x";
  Formula body = lor({always(lnot(atom("r", v))), eventually(atom(kHash, v)), starfree_formula(e, v)});
  return prenex(forall(v, body));
}

KripkeStructure fig1_structure() {
  KripkeStructure k;
  int l = k.add_state("l", {"l"}, true);
  int a = k.add_state("a", {"a"}, true);
  int b = k.add_state("b", {"b"}, true);
  int r = k.add_state("r", {"r"}, true);
  int h = k.add_state("hash", {kHash}, true);
  for (int to : {l, a, b, r, h}) k.add_edge(l, to);
  for (int to : {a, b, r}) k.add_edge(a, to);
  for (int to : {b, a, r}) k.add_edge(b, to);
  k.add_edge(r, r);
  k.add_edge(h, r);
  return k;
}

}  // namespace hyperltl
