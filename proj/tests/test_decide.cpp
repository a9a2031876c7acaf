#include <map>
#include <set>

#include "doctest.h"
#include "hyperltl/decide.hpp"
#include "hyperltl/modelcheck.hpp"
#include "hyperltl/syntax.hpp"
#include "oracle.hpp"

using namespace hyperltl;

namespace {

const char* kStrictChain = "forall p. exists q. G (a[p] -> a[q]) & F (!a[p] & a[q])";

Valuation A() { return {"a"}; }
Valuation E() { return {}; }

// Positions where prop holds, over a window long enough for both traces.
std::set<std::size_t> positions_of(const LassoTrace& t, std::size_t window) {
  std::set<std::size_t> out;
  for (std::size_t j = 0; j < window; ++j)
    if (oracle::letter(t, j).count("a")) out.insert(j);
  return out;
}

}  // namespace

TEST_CASE("bounded traces: examples") {
  auto v = sat_bounded_traces(parse_sentence("exists p. G a[p]"), 1);
  REQUIRE(v.outcome == Outcome::Sat);
  CHECK(v.model->traces == std::vector<LassoTrace>{LassoTrace{{}, {A()}}});

  auto x = parse_sentence("forall p. exists q. F (a[p] xor a[q])");
  auto w = sat_bounded_traces(x, 2);
  REQUIRE(w.outcome == Outcome::Sat);
  CHECK(oracle::models(w.model->traces, x));
  CHECK(sat_bounded_traces(x, 1).outcome == Outcome::UnsatWithinBound);
}

TEST_CASE("bounded traces: strict chain has no small model") {
  auto s = parse_sentence(kStrictChain);
  for (int k = 1; k <= 4; ++k) CHECK(sat_bounded_traces(s, k).outcome == Outcome::UnsatWithinBound);
  // brute force over models of at most three short lassos
  auto pool = oracle::all_lassos({"a"}, 3);
  bool found = oracle::for_each_subset<LassoTrace>(
      pool, 3, [&](const std::vector<LassoTrace>& m) { return oracle::models(m, s); });
  CHECK_FALSE(found);
}

TEST_CASE("bounded traces agree with brute force on small models") {
  oracle::Gen g(7);
  auto pool = oracle::all_lassos({"a"}, 3);
  for (int i = 0; i < 60; ++i) {
    Sentence s;
    bool ae = g.coin();
    s.prefix = {{ae ? Quant::Forall : Quant::Exists, "p"}, {ae ? Quant::Exists : Quant::Forall, "q"}};
    s.matrix = g.qf(1 + g.pick(7), {"a"}, {"p", "q"});
    auto v = sat_bounded_traces(s, 2);
    bool brute = oracle::for_each_subset<LassoTrace>(
        pool, 2, [&](const std::vector<LassoTrace>& m) { return oracle::models(m, s); });
    // a brute-force model within the bound forces SAT
    if (brute) CHECK_MESSAGE(v.outcome == Outcome::Sat, print_sentence(s));
    if (v.outcome == Outcome::Sat) CHECK(oracle::models(v.model->traces, s));
  }
}

TEST_CASE("complete decider") {
  auto ni = parse_sentence(
      "forall p. forall q. G (l[p] <-> l[q]) -> G (o[p] <-> o[q])");
  CHECK(decide_complete(ni).outcome == Outcome::Sat);
  CHECK(decide_complete(parse_sentence("exists p. a[p] & !a[p]")).outcome == Outcome::Unsat);
  auto v = decide_complete(parse_sentence("exists p. forall q. G (a[p] <-> a[q])"));
  REQUIRE(v.outcome == Outcome::Sat);
  CHECK(v.model->traces.size() == 1);
  CHECK_THROWS_AS(decide_complete(parse_sentence(kStrictChain)), Error);
}

TEST_CASE("periodic enumeration") {
  auto v = sat_bounded_periodic(parse_sentence("exists p. F a[p] & G (a[p] -> X !a[p])"), 2);
  REQUIRE(v.outcome == Outcome::Sat);
  CHECK(oracle::models(v.model->traces, parse_sentence("exists p. F a[p] & G (a[p] -> X !a[p])")));
  CHECK(sat_bounded_periodic(parse_sentence(kStrictChain), 2).outcome == Outcome::UnsatWithinBound);
  DecideOptions tight;
  tight.enumeration_budget = 5;
  auto u = sat_bounded_periodic(parse_sentence(kStrictChain), 3, tight);
  CHECK(u.outcome == Outcome::Unknown);
  CHECK(u.stats.candidates == 5);
  CHECK(bounded_lassos({"a"}, 2).size() == 6);
}

TEST_CASE("Kripke enumeration") {
  auto v = sat_bounded_kripke(parse_sentence("forall p. G a[p]"), 1);
  REQUIRE(v.outcome == Outcome::Sat);
  CHECK(v.kripke->size() == 1);
  CHECK(v.kripke->labels[0] == A());
  auto s = parse_sentence(kStrictChain);
  CHECK(sat_bounded_kripke(s, 1).outcome == Outcome::UnsatWithinBound);
  CHECK(sat_bounded_kripke(s, 2).outcome == Outcome::UnsatWithinBound);
  auto two = parse_sentence("exists p. F a[p] & F !a[p]");
  CHECK(sat_bounded_kripke(two, 1).outcome == Outcome::UnsatWithinBound);
  auto w = sat_bounded_kripke(two, 2);
  REQUIRE(w.outcome == Outcome::Sat);
  CHECK(modelcheck(*w.kripke, two));
}

TEST_CASE("bounded deciders are monotone in the bound") {
  oracle::Gen g(11);
  for (int i = 0; i < 25; ++i) {
    Sentence s;
    s.prefix = {{Quant::Forall, "p"}, {Quant::Exists, "q"}};
    s.matrix = g.fg(1 + g.pick(6), {"a"}, {"p", "q"}, true);
    for (int k = 1; k < 3; ++k) {
      if (sat_bounded_periodic(s, k).outcome == Outcome::Sat)
        CHECK(sat_bounded_periodic(s, k + 1).outcome == Outcome::Sat);
      if (sat_bounded_traces(s, k).outcome == Outcome::Sat)
        CHECK(sat_bounded_traces(s, k + 1).outcome == Outcome::Sat);
    }
  }
}

TEST_CASE("fragment decider: examples") {
  auto v = sat_fragment(parse_sentence(kStrictChain));
  REQUIRE(v.outcome == Outcome::Sat);
  CHECK(check_certificate(*v.fragment).empty());
  // the member for the type {∅, {a}} is exactly the hand-derived V
  std::vector<ValuationTuple> expected{{E(), E()}, {E(), A()}, {A(), A()}};
  bool has_expected = false;
  for (const auto& m : v.fragment->members) has_expected |= m.tuples == expected;
  CHECK(has_expected);

  CHECK(sat_fragment(parse_sentence("forall p. F a[p] & F !a[p]")).outcome == Outcome::Sat);
  CHECK(sat_fragment(parse_sentence("forall p. exists q. G (a[p] xor a[q]) & G (a[p] <-> a[q])"))
            .outcome == Outcome::Unsat);
  CHECK_THROWS_AS(sat_fragment(parse_sentence("forall p. exists q. G (a[p] -> X a[q])")), Error);
  CHECK_THROWS_AS(sat_fragment(parse_sentence("forall p. forall q. F a[p]")), Error);
}

TEST_CASE("fragment decider: strict chain witnesses grow") {
  auto v = sat_fragment(parse_sentence(kStrictChain));
  REQUIRE(v.outcome == Outcome::Sat);
  auto chain = fragment_witness_chain(*v.fragment, 3);
  REQUIRE(chain.levels.size() == 3);
  CHECK(chain.base.empty());
  for (const auto& level : chain.levels) {
    REQUIRE_FALSE(level.empty());
    for (const auto& step : level) {
      REQUIRE(step.witnesses.size() == 1);
      const auto& t = step.trace;
      const auto& w = step.witnesses[0];
      std::size_t window = 4 * (t.stem.size() + t.loop.size() + w.stem.size() + w.loop.size());
      auto before = positions_of(t, window), after = positions_of(w, window);
      CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
      CHECK(after.size() > before.size());
      CHECK(oracle::holds(parse_formula("G (a[p] -> a[q]) & F (!a[p] & a[q])"),
                          std::map<std::string, LassoTrace>{{"p", t}, {"q", w}}));
    }
  }
  auto base_only = fragment_witness_chain(*v.fragment, 0);
  CHECK(base_only.levels.empty());
}

TEST_CASE("fragment decider: leading existentials and heads") {
  auto s = parse_sentence(
      "exists p. forall q. exists r. a[p] & X !a[q] & F (a[r] <-> !a[q])");
  auto v = sat_fragment(s);
  REQUIRE(v.outcome == Outcome::Sat);
  auto chain = fragment_witness_chain(*v.fragment, 2);
  REQUIRE(chain.base.size() == 1);
  CHECK(oracle::letter(chain.base[0], 0).count("a"));
  // every prefix tuple recurs in every loop of the base traces
  std::set<ValuationTuple> loop;
  for (const auto& x : chain.base[0].loop) loop.insert({x});
  CHECK(loop == std::set<ValuationTuple>(v.fragment->prefix_set.begin(),
                                          v.fragment->prefix_set.end()));
  // a leading trace with a at 0 cannot satisfy X !a[q] when q ranges over it
  auto u = sat_fragment(parse_sentence("exists p. forall q. a[p] & G a[q] & X !a[q]"));
  CHECK(u.outcome == Outcome::Unsat);
}

TEST_CASE("fragment decider on forall-only sentences matches single-trace search") {
  oracle::Gen g(23);
  auto pool = oracle::all_lassos({"a", "b"}, 5);
  for (int i = 0; i < 150; ++i) {
    Sentence s;
    s.prefix = {{Quant::Forall, "p"}};
    s.matrix = g.fg(1 + g.pick(9), {"a", "b"}, {"p"}, true);
    auto v = sat_fragment(s);
    bool brute = false;
    for (const auto& t : pool)
      if (oracle::models({t}, s)) {
        brute = true;
        break;
      }
    CHECK_MESSAGE((v.outcome == Outcome::Sat) == brute, print_sentence(s));
  }
}

TEST_CASE("fragment fixpoint equals the union of all valid sets") {
  // Requirements checked by brute force over every S of candidate VSets for
  // forall-exists sentences over one proposition: 15 candidates.
  std::vector<std::pair<Valuation, Valuation>> tuples{{E(), E()}, {E(), A()}, {A(), E()}, {A(), A()}};
  std::vector<unsigned> candidates;
  for (unsigned m = 1; m < 16; ++m) candidates.push_back(m);
  auto proj = [&](unsigned v, int c) {
    unsigned out = 0;
    for (int i = 0; i < 4; ++i)
      if (v >> i & 1) {
        bool bit = c == 0 ? (i & 2) : (i & 1);
        out |= 1u << (bit ? 1 : 0);
      }
    return out;
  };
  oracle::Gen g(31);
  for (int round = 0; round < 60; ++round) {
    Sentence s;
    s.prefix = {{Quant::Forall, "p"}, {Quant::Exists, "q"}};
    s.matrix = g.fg(1 + g.pick(8), {"a"}, {"p", "q"}, false, false);
    auto sat3 = [&](unsigned v) {
      std::function<bool(const Formula&)> go = [&](const Formula& f) -> bool {
        auto on = [&](const Formula& beta, int i) {
          LassoTrace tp{{}, {tuples[i].first}}, tq{{}, {tuples[i].second}};
          return oracle::holds(beta, std::map<std::string, LassoTrace>{{"p", tp}, {"q", tq}});
        };
        switch (f->op) {
          case Op::True: return true;
          case Op::False: return false;
          case Op::Not: return !go(f->lhs);
          case Op::And: return go(f->lhs) && go(f->rhs);
          case Op::Or: return go(f->lhs) || go(f->rhs);
          case Op::Implies: return !go(f->lhs) || go(f->rhs);
          case Op::Iff: return go(f->lhs) == go(f->rhs);
          case Op::Xor: return go(f->lhs) != go(f->rhs);
          case Op::Eventually:
            for (int i = 0; i < 4; ++i)
              if ((v >> i & 1) && on(f->lhs, i)) return true;
            return false;
          case Op::Always:
            for (int i = 0; i < 4; ++i)
              if ((v >> i & 1) && !on(f->lhs, i)) return false;
            return true;
          default: throw std::logic_error("unexpected operator");
        }
      };
      return go(s.matrix);
    };
    auto valid = [&](unsigned set) {  // bit j of set selects candidates[j]
      std::set<unsigned> types;
      for (int j = 0; j < 15; ++j)
        if (set >> j & 1) types.insert(proj(candidates[j], 0));
      for (int j = 0; j < 15; ++j)
        if (set >> j & 1) {
          if (!sat3(candidates[j])) return false;
          if (!types.count(proj(candidates[j], 1))) return false;
        }
      return true;
    };
    unsigned uni = 0;
    for (unsigned set = 1; set < (1u << 15); ++set)
      if (valid(set)) uni |= set;
    bool union_valid = uni == 0 || valid(uni);
    CHECK(union_valid);
    // independent greatest fixpoint over VSets
    unsigned gfp = 0;
    for (int j = 0; j < 15; ++j)
      if (sat3(candidates[j])) gfp |= 1u << j;
    for (bool changed = true; changed;) {
      changed = false;
      std::set<unsigned> types;
      for (int j = 0; j < 15; ++j)
        if (gfp >> j & 1) types.insert(proj(candidates[j], 0));
      for (int j = 0; j < 15; ++j)
        if ((gfp >> j & 1) && !types.count(proj(candidates[j], 1))) gfp &= ~(1u << j), changed = true;
    }
    CHECK(gfp == uni);
    auto v = sat_fragment(s);
    CHECK_MESSAGE((v.outcome == Outcome::Sat) == (uni != 0), print_sentence(s));
    if (v.outcome == Outcome::Sat) {
      for (const auto& m : v.fragment->members) {
        unsigned bits = 0;
        for (const auto& t : m.tuples)
          for (int i = 0; i < 4; ++i)
            if (t == ValuationTuple{tuples[i].first, tuples[i].second}) bits |= 1u << i;
        CHECK((uni >> (bits - 1) & 1));
      }
    }
  }
}

TEST_CASE("fragment decider is coherent with periodic enumeration") {
  oracle::Gen g(5);
  DecideOptions opt;
  opt.enumeration_budget = 20000;
  for (int i = 0; i < 80; ++i) {
    Sentence s;
    bool lead = g.coin();
    if (lead) s.prefix.push_back({Quant::Exists, "e"});
    s.prefix.push_back({Quant::Forall, "p"});
    s.prefix.push_back({Quant::Exists, "q"});
    std::vector<std::string> vars{"p", "q"};
    if (lead) vars.push_back("e");
    s.matrix = g.fg(1 + g.pick(10), {"a"}, vars, i % 2 == 0);
    auto f = sat_fragment(s);
    REQUIRE(f.outcome != Outcome::Unknown);
    auto p = sat_bounded_periodic(s, 3, opt);
    if (p.outcome == Outcome::Sat) CHECK_MESSAGE(f.outcome == Outcome::Sat, print_sentence(s));
    if (f.outcome == Outcome::Sat) {
      CHECK(check_certificate(*f.fragment).empty());
      CHECK_NOTHROW(fragment_witness_chain(*f.fragment, 2));
    }
  }
}

TEST_CASE("certificate re-check rejects tampering") {
  auto v = sat_fragment(parse_sentence(kStrictChain));
  REQUIRE(v.outcome == Outcome::Sat);
  auto c = *v.fragment;
  for (auto& m : c.members) m.tuples = {{E(), E()}};
  CHECK_FALSE(check_certificate(c).empty());
}

TEST_CASE("results do not depend on the number of jobs") {
  DecideOptions one, many;
  one.enumeration_budget = many.enumeration_budget = 20000;
  many.jobs = 4;
  for (const char* text : {kStrictChain, "exists p. F a[p] & F !a[p]",
                           "exists e. forall p. exists q. F (a[e] & !a[q]) & G (a[p] -> F a[q])",
                           "forall p. exists q. F (a[p] xor a[q])"}) {
    auto s = parse_sentence(text);
    auto a = sat_bounded_periodic(s, 3, one), b = sat_bounded_periodic(s, 3, many);
    CHECK(a.outcome == b.outcome);
    if (a.model && b.model) CHECK(a.model->traces == b.model->traces);
    auto c = sat_bounded_kripke(s, 2, one), d = sat_bounded_kripke(s, 2, many);
    CHECK(c.outcome == d.outcome);
    if (c.kripke && d.kripke) CHECK(print_kripke(*c.kripke) == print_kripke(*d.kripke));
    if (in_fragment(s, Fragment::FGX1) && is_exists_forall1_exists(s)) {
      auto e = sat_fragment(s, one), f = sat_fragment(s, many);
      CHECK(e.outcome == f.outcome);
      if (e.fragment && f.fragment) CHECK(e.fragment->members.size() == f.fragment->members.size());
    }
  }
}

TEST_CASE("complete decider agrees with periodic enumeration") {
  oracle::Gen g(13);
  DecideOptions opt;
  opt.enumeration_budget = 20000;
  for (int i = 0; i < 40; ++i) {
    Sentence s;
    s.prefix = {{Quant::Exists, "p"}, {Quant::Forall, "q"}};
    s.matrix = g.qf(1 + g.pick(7), {"a"}, {"p", "q"});
    auto p = sat_bounded_periodic(s, 3, opt);
    auto c = decide_complete(s);
    if (p.outcome == Outcome::Sat) CHECK_MESSAGE(c.outcome == Outcome::Sat, print_sentence(s));
    if (c.outcome == Outcome::Sat) CHECK(oracle::models(c.model->traces, s));
  }
}
