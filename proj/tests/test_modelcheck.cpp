#include "doctest.h"
#include "hyperltl/modelcheck.hpp"
#include "hyperltl/semantics.hpp"
#include "hyperltl/syntax.hpp"
#include "oracle.hpp"

using namespace hyperltl;

namespace {

KripkeStructure self_loop(Valuation label) {
  KripkeStructure k;
  k.add_state("s", std::move(label), true);
  k.add_edge(0, 0);
  return k;
}

// A path of states ending in a self-loop, optionally forking once into a
// second self-looping state. Trace sets of these are finite.
KripkeStructure finite_shape(oracle::Gen& g) {
  KripkeStructure k;
  int n = 1 + g.pick(4);
  auto label = [&]() {
    Valuation v;
    if (g.coin()) v.insert("a");
    return v;
  };
  bool fork = n >= 3 && g.coin();
  int path_len = fork ? n - 1 : n;
  for (int i = 0; i < path_len; ++i) k.add_state("s" + std::to_string(i), label(), i == 0);
  for (int i = 0; i + 1 < path_len; ++i) k.add_edge(i, i + 1);
  k.add_edge(path_len - 1, path_len - 1);
  if (fork) {
    int f = k.add_state("f", label(), false);
    k.add_edge(g.pick(path_len - 1), f);
    k.add_edge(f, f);
  }
  return k;
}

Sentence random_sentence(oracle::Gen& g) {
  Sentence s;
  int n = 1 + g.pick(2);
  Quant first = g.coin() ? Quant::Exists : Quant::Forall;
  std::vector<std::string> vars{"p", "q"};
  for (int i = 0; i < n; ++i)
    s.prefix.push_back({i == 0 ? first : (g.coin() ? Quant::Exists : Quant::Forall), vars[i]});
  // Depth at most one: Boolean combinations of F/G/X over propositional bodies.
  std::vector<std::string> used(vars.begin(), vars.begin() + n);
  std::function<Formula(int)> build = [&](int size) -> Formula {
    if (size <= 2) {
      Formula body = g.qf(1 + g.pick(3), {"a"}, used, false);
      int r = g.pick(4);
      if (r == 0) return eventually(body);
      if (r == 1) return always(body);
      if (r == 2) return next(body);
      return body;
    }
    int l = 1 + g.pick(size - 1);
    Formula x = build(l), y = build(size - l);
    switch (g.pick(4)) {
      case 0: return land(x, y);
      case 1: return lor(x, y);
      case 2: return limplies(x, y);
      default: return lnot(x);
    }
  };
  s.matrix = build(1 + g.pick(6));
  return s;
}

}  // namespace

TEST_CASE("model checking small structures") {
  auto k = self_loop({"a"});
  CHECK(modelcheck(k, parse_sentence("forall p. G a[p]")));
  CHECK_FALSE(modelcheck(k, parse_sentence(
                                "forall p. exists q. G (a[p] -> a[q]) & F (!a[p] & a[q])")));
  auto two = parse_kripke("state x : {} initial\nstate y : {a}\nedge x -> x\nedge x -> y\nedge y -> y\n");
  CHECK(modelcheck(two, parse_sentence("exists p. F a[p]")));
  CHECK(modelcheck(two, parse_sentence("exists p. G !a[p]")));
  CHECK_FALSE(modelcheck(two, parse_sentence("forall p. F a[p]")));
  CHECK(modelcheck(two, parse_sentence("forall p. exists q. G (a[p] -> a[q]) & F (!a[p] & a[q])")) ==
        false);
  CHECK(modelcheck(two, parse_sentence("forall p. exists q. G (a[p] -> a[q])")));
  // a appears strictly later on another trace than on p, unless p never has a.
  CHECK(modelcheck(two, parse_sentence(
                            "forall p. (G !a[p]) | exists q. (!a[q] U (a[q] & !a[p])) | F (a[q] & X !a[p])")) ==
        modelcheck(two, parse_sentence(
                            "forall p. exists q. (G !a[p]) | (!a[q] U (a[q] & !a[p])) | F (a[q] & X !a[p])")));
  CHECK_THROWS_AS(modelcheck(two, Sentence{{}, atom("a", "p")}), Error);
}

TEST_CASE("model checking agrees with evaluation on finite trace sets") {
  oracle::Gen g(301);
  for (int i = 0; i < 40; ++i) {
    KripkeStructure k = finite_shape(g);
    FiniteTraceModel traces = kripke_lassos(k, 4, 1);
    for (int j = 0; j < 25; ++j) {
      Sentence s = random_sentence(g);
      REQUIRE_MESSAGE(modelcheck(k, s) == eval_sentence(s, traces),
                      print_sentence(s) << "\n" << print_kripke(k));
    }
  }
}

TEST_CASE("quantifier duality") {
  oracle::Gen g(302);
  for (int i = 0; i < 100; ++i) {
    KripkeStructure k = finite_shape(g);
    if (g.coin()) k.add_edge(k.size() - 1, 0);
    Formula psi = g.qf(1 + g.pick(6), {"a"}, {"p"});
    bool all = modelcheck(k, Sentence{{{Quant::Forall, "p"}}, psi});
    bool some_not = modelcheck(k, Sentence{{{Quant::Exists, "p"}}, lnot(psi)});
    CHECK(all != some_not);
  }
}

TEST_CASE("universal verdicts survive sampling") {
  oracle::Gen g(303);
  for (int i = 0; i < 60; ++i) {
    KripkeStructure k;
    int n = 1 + g.pick(3);
    for (int s = 0; s < n; ++s) {
      Valuation v;
      if (g.coin()) v.insert("a");
      k.add_state("s" + std::to_string(s), v, s == 0);
    }
    for (int s = 0; s < n; ++s) {
      k.add_edge(s, g.pick(n));
      if (g.coin()) k.add_edge(s, g.pick(n));
    }
    Sentence s{{{Quant::Forall, "p"}, {Quant::Forall, "q"}}, g.qf(1 + g.pick(6), {"a"}, {"p", "q"})};
    if (modelcheck(k, s)) CHECK(eval_sentence(s, kripke_lassos(k, 2, 3)));
  }
}
