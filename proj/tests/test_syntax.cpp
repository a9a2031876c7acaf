#include "doctest.h"
#include "hyperltl/semantics.hpp"
#include "hyperltl/syntax.hpp"
#include "oracle.hpp"

using namespace hyperltl;

TEST_CASE("formula parsing") {
  auto f = parse_formula("forall p. exists q. G (a[p] <-> a[q])");
  CHECK(equal(f, forall("p", exists("q", always(liff(atom("a", "p"), atom("a", "q")))))));
  auto u = parse_formula("a[p] U b[p] U c[p]");
  CHECK(equal(u, until(atom("a", "p"), until(atom("b", "p"), atom("c", "p")))));
  auto open = parse_formula("G a[p]");
  CHECK(free_vars(open) == std::set<std::string>{"p"});
  CHECK(equal(parse_formula("a & b | c"),
              lor(land(atom("a", "_"), atom("b", "_")), atom("c", "_"))));
  CHECK(equal(parse_formula("a -> b -> c"),
              limplies(atom("a", "_"), limplies(atom("b", "_"), atom("c", "_")))));
  CHECK(equal(parse_formula("a | b xor c -> d"),
              limplies(lxor(lor(atom("a", "_"), atom("b", "_")), atom("c", "_")), atom("d", "_"))));
  CHECK(equal(parse_formula("!a U X b"), until(lnot(atom("a", "_")), next(atom("b", "_")))));
  CHECK(equal(parse_formula("@t1f.x[p] & @1.a[q]"), land(atom("@t1f.x", "p"), atom("@1.a", "q"))));
  CHECK(equal(parse_formula("a & exists q. b[q]"), land(atom("a", "_"), exists("q", atom("b", "q")))));
}

TEST_CASE("parse errors carry spans and expectations") {
  const std::string bad = "forall p. G (a[p] & )";
  try {
    parse_formula(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(e.span().start <= e.span().end);
    CHECK(e.span().end <= bad.size());
    CHECK_FALSE(e.expected().empty());
  }
  for (std::string s : {"", "(", "a[", "a[p", "forall . a", "a <-> ", "F", "a ~ b", "G U"}) {
    try {
      parse_formula(s);
      FAIL("expected a parse error for '" << s << "'");
    } catch (const ParseError& e) {
      CHECK(e.span().start <= e.span().end);
      CHECK(e.span().end <= s.size());
    }
  }
}

TEST_CASE("print then parse is the identity on random formulas") {
  oracle::Gen g(42);
  std::vector<std::string> props{"a", "b", "@m0", "@1.a"};
  std::vector<std::string> vars{"p", "q", "_"};
  for (int i = 0; i < 10000; ++i) {
    Formula f = g.qf(1 + g.pick(14), props, vars);
    int quantifiers = g.pick(3);
    for (int k = 0; k < quantifiers; ++k) {
      std::string v = k == 0 ? "p" : "q";
      Formula body = f;
      if (g.coin()) {
        f = g.coin() ? exists(v, body) : forall(v, body);
      } else {
        Formula other = g.qf(1 + g.pick(4), props, vars);
        f = g.coin() ? land(other, exists(v, body)) : lnot(forall(v, body));
      }
    }
    std::string text = print_formula(f);
    Formula back = parse_formula(text);
    REQUIRE_MESSAGE(equal(back, f), text);
    CHECK(print_formula(back) == text);
  }
}

TEST_CASE("printer uses minimal parentheses") {
  CHECK(print_formula(parse_formula("F (a[p] & b[p])")) == "F (a[p] & b[p])");
  CHECK(print_formula(parse_formula("((a & b) & c)")) == "a & b & c");
  CHECK(print_formula(parse_formula("a U (b U c)")) == "a U b U c");
  CHECK(print_formula(parse_formula("(a U b) U c")) == "(a U b) U c");
  CHECK(print_sentence(Sentence{{}, atom("a", "p")}) == "a[p]");
  CHECK(print_formula(parse_formula("@7.x[p]")) == "@7.x[p]");
}

TEST_CASE("trace models") {
  auto m = parse_trace_model("trace t : {a} | {} ;\n");
  REQUIRE(m.traces.size() == 1);
  CHECK(m.traces[0].stem == std::vector<Valuation>{{"a"}});
  CHECK(m.traces[0].loop == std::vector<Valuation>{{}});
  auto w = parse_trace_model("trace t : | {a} ;");
  CHECK(w.traces[0].stem.empty());
  CHECK(w.traces[0].loop == std::vector<Valuation>{{"a"}});
  try {
    parse_trace_model("trace t : {a} | ;");
    FAIL("empty loop accepted");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ErrorKind::EmptyLoop);
  }
  CHECK_THROWS_AS(parse_trace_model("trace t : {a,a} | {} ;"), ParseError);
  // Duplicates under canonical form merge; comments are ignored.
  auto d = parse_trace_model(
      "# two spellings of a^omega\ntrace x : {a} | {a} ;\ntrace y : | {a} ; {a} ;\n");
  CHECK(d.traces.size() == 1);
  CHECK(parse_trace_model(print_trace_model(d)).traces == d.traces);
}

TEST_CASE("Kripke files") {
  const std::string fig1 =
      "state l : {l} initial\nstate a : {a} initial\nstate b : {b} initial\n"
      "state r : {r} initial\nstate hash : {hash} initial\n"
      "edge l -> l\nedge l -> a\nedge l -> b\nedge l -> r\nedge l -> hash\n"
      "edge a -> a\nedge a -> b\nedge a -> r\nedge b -> b\nedge b -> a\nedge b -> r\n"
      "edge r -> r\nedge hash -> r\n";
  auto k = parse_kripke(fig1);
  CHECK(k.size() == 5);
  auto again = parse_kripke(print_kripke(k));
  CHECK(again.names == k.names);
  CHECK(again.succ == k.succ);
  CHECK(again.labels == k.labels);
  try {
    parse_kripke("state s : {} initial\nedge s -> t\n");
    FAIL("dangling edge accepted");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ErrorKind::DanglingEdge);
  }
  try {
    parse_kripke("state s : {}\nedge s -> s\n");
    FAIL("structure without initial state accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoInitialState);
  }
  try {
    parse_kripke("state s : {} initial\nstate t : {}\nedge s -> t\n");
    FAIL("dead end accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoSuccessor);
  }
}

TEST_CASE("PCP and Minsky files") {
  auto p = parse_pcp("pair b / aba\npair aa / a\n");
  REQUIRE(p.pairs.size() == 2);
  CHECK(p.pairs[0] == std::make_pair(std::string("b"), std::string("aba")));
  CHECK(parse_pcp(print_pcp(p)).pairs == p.pairs);
  try {
    parse_pcp("pair / a\n");
    FAIL("empty word accepted");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ErrorKind::EmptyWordPair);
  }
  auto m = parse_minsky("init q0\ntrans q0 1 zero q0\n");
  REQUIRE(m.rules.size() == 1);
  CHECK(m.rules[0].op == CounterOp::Zero);
  CHECK(m.rules[0].counter == 1);
  CHECK(parse_minsky(print_minsky(m)).rules.size() == 1);
  try {
    parse_minsky("init q0\ntrans q0 1 jump q0\n");
    FAIL("unknown opcode accepted");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ErrorKind::UnknownOpcode);
  }
  CHECK_THROWS_AS(parse_minsky("init q0\ntrans q0 3 inc q0\n"), ParseError);
}
