#include <algorithm>
#include <cctype>

#include "doctest.h"
#include "encode_oracle.hpp"
#include "hyperltl/encode.hpp"
#include "hyperltl/error.hpp"
#include "hyperltl/semantics.hpp"
#include "hyperltl/syntax.hpp"

using namespace hyperltl;

namespace {

// Pairs (b, aba) and (aa, a), solved by 2 1 2.
PcpInstance sample_pcp() { return PcpInstance{{{"b", "aba"}, {"aa", "a"}}}; }

// Compact trace notation: a b letters, A B barred, # padding, 0 1 rank bits,
// (x,y) paired bits; every trace ends in dollar forever.
LassoTrace pcp_trace(const std::string& s) {
  LassoTrace t;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(') {
      t.stem.push_back({std::string("p") + s[i + 1] + s[i + 3]});
      i += 4;
    } else if (c == '#') {
      t.stem.push_back({"hash"});
    } else if (c == '0' || c == '1') {
      t.stem.push_back({std::string("b") + c});
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      t.stem.push_back({pcp_bar_letter(static_cast<char>(std::tolower(c)))});
    } else {
      t.stem.push_back({pcp_letter(c)});
    }
  }
  t.loop.push_back({"dollar"});
  return t;
}

FiniteTraceModel without(FiniteTraceModel m, const LassoTrace& t) {
  m.traces.erase(std::find(m.traces.begin(), m.traces.end(), t));
  return m;
}

FiniteTraceModel with(FiniteTraceModel m, const LassoTrace& t) {
  m.traces.push_back(t);
  return make_model(std::move(m.traces));
}

MinskyMachine machine(const std::string& init, std::vector<MinskyRule> rules) {
  MinskyMachine m{init, {}, std::move(rules)};
  m.states.push_back(init);
  for (const auto& r : m.rules)
    for (const auto& q : {r.from, r.to})
      if (std::find(m.states.begin(), m.states.end(), q) == m.states.end()) m.states.push_back(q);
  return m;
}

Formula pin_word(const std::string& w, const std::string& v) {
  std::vector<Formula> parts;
  for (std::size_t k = 0; k < w.size(); ++k) parts.push_back(next(atom(std::string(1, w[k]), v), static_cast<int>(k)));
  parts.push_back(next(always(atom("r", v)), static_cast<int>(w.size())));
  return land(parts);
}

}  // namespace

TEST_CASE("pcp: solution model matches the worked example") {
  auto p = sample_pcp();
  auto m = pcp_solution_model(p, {2, 1, 2});
  // The last type-two trace is drawn without its second padding symbol in the
  // source figure; the padded block must have length 3.
  std::vector<LassoTrace> expected;
  for (const char* s : {"aa#a##0", "b##aba1", "aa#a##01", "Aa#A##(0,0)", "aA#Aba(0,1)", "B##aBa(1,1)",
                        "Aa#abA(0,1)(1,0)", "aA#A##(0,0)(1,1)"})
    expected.push_back(pcp_trace(s));
  CHECK(m.traces == make_model(expected).traces);
  CHECK(m.traces.size() == 8);
}

TEST_CASE("pcp: encoding holds on the solution model and fails on near misses") {
  auto p = sample_pcp();
  auto enc = encode_pcp(p);
  CHECK(enc.k == 4 + 6 + 1);
  CHECK(is_closed(enc.sentence));
  auto m = pcp_solution_model(p, {2, 1, 2});
  for (const auto& t : m.traces) CHECK(t.stem.size() + t.loop.size() <= static_cast<std::size_t>(enc.k));
  CHECK(eval_sentence(enc.sentence, m));

  // final type-two trace gone
  CHECK_FALSE(eval_sentence(enc.sentence, without(m, pcp_trace("aA#A##(0,0)(1,1)"))));
  // a second type-one trace of rank 0
  CHECK_FALSE(eval_sentence(enc.sentence, with(m, pcp_trace("b##aba0"))));
  // rank 1 missing, so rank 2 has no predecessor
  CHECK_FALSE(eval_sentence(enc.sentence, without(m, pcp_trace("b##aba1"))));
  // initial type-two trace gone
  CHECK_FALSE(eval_sentence(enc.sentence, without(m, pcp_trace("Aa#A##(0,0)"))));
  // a paired rank perturbed
  CHECK_FALSE(eval_sentence(enc.sentence, with(without(m, pcp_trace("aA#Aba(0,1)")), pcp_trace("aA#Aba(0,0)"))));
  // marked letters disagree
  CHECK_FALSE(eval_sentence(enc.sentence, with(m, pcp_trace("B##aBb(1,1)"))));
}

TEST_CASE("pcp: every trace of the solution model is needed") {
  auto p = sample_pcp();
  auto enc = encode_pcp(p);
  auto m = pcp_solution_model(p, {2, 1, 2});
  for (const auto& t : m.traces) CHECK_FALSE(eval_sentence(enc.sentence, without(m, t)));
}

TEST_CASE("pcp: solvable instances") {
  struct Case {
    PcpInstance p;
    std::vector<int> s;
  };
  std::vector<Case> cases = {
      {{{{"a", "a"}}}, {1}},
      {{{{"ab", "a"}, {"b", "bb"}}}, {1, 2}},
      {{{{"a", "ab"}, {"bb", "b"}}}, {1, 2}},
      {{{{"ba", "b"}, {"a", "aa"}}}, {1, 2}},
      {sample_pcp(), {2, 1, 2}},
      {{{{"a", "aa"}, {"aab", "b"}}}, {1, 1, 2}},
  };
  for (const auto& c : cases) {
    auto enc = encode_pcp(c.p);
    auto m = pcp_solution_model(c.p, c.s);
    std::size_t h = 0;
    for (int i : c.s) h += c.p.pairs[i - 1].first.size();
    CHECK(m.traces.size() == c.s.size() + h);
    CHECK(eval_sentence(enc.sentence, m));
  }
}

TEST_CASE("pcp: errors") {
  auto p = sample_pcp();
  CHECK_THROWS_AS(pcp_solution_model(p, {1}), Error);
  try {
    pcp_solution_model(p, {1, 2});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotASolution);
  }
  CHECK_THROWS_AS(pcp_solution_model(p, {3}), Error);
  CHECK_THROWS_AS(encode_pcp(PcpInstance{{{"", "a"}}}), Error);
}

TEST_CASE("minsky: zero loop and stuck machine") {
  auto zero = machine("q0", {{"q0", 1, CounterOp::Zero, "q0"}});
  auto run = minsky_run(zero, 10);
  CHECK(run.cyclic);
  REQUIRE(run.configs.size() == 1);
  auto model = minsky_run_model(run);
  CHECK(model.traces == std::vector<LassoTrace>{LassoTrace{{{"q0"}}, {{}}}});
  auto s = encode_minsky(zero);
  CHECK(in_fragment(s, Fragment::FG1));
  CHECK(eval_sentence(s, model));

  auto stuck = machine("q0", {{"q0", 1, CounterOp::Dec, "q1"}});
  auto r2 = minsky_run(stuck, 10);
  CHECK_FALSE(r2.cyclic);
  CHECK(r2.configs.size() == 1);
  CHECK_FALSE(eval_sentence(encode_minsky(stuck), minsky_run_model(r2)));
}

TEST_CASE("minsky: cyclic runs are models, cut-off runs are not") {
  auto updown = machine("q0", {{"q0", 1, CounterOp::Inc, "q1"}, {"q1", 1, CounterOp::Dec, "q0"}});
  auto run = minsky_run(updown, 10);
  CHECK(run.cyclic);
  CHECK(run.configs.size() == 2);
  CHECK(eval_sentence(encode_minsky(updown), minsky_run_model(run)));

  auto walk = machine("q0", {{"q0", 1, CounterOp::Inc, "q1"},
                             {"q1", 1, CounterOp::Inc, "q2"},
                             {"q2", 2, CounterOp::Inc, "q3"},
                             {"q3", 1, CounterOp::Dec, "q4"},
                             {"q4", 1, CounterOp::Dec, "q5"},
                             {"q5", 2, CounterOp::Dec, "q0"}});
  auto wr = minsky_run(walk, 20);
  CHECK(wr.cyclic);
  CHECK(wr.configs.size() == 6);
  auto ws = encode_minsky(walk);
  CHECK(in_fragment(ws, Fragment::FG1));
  CHECK(eval_sentence(ws, minsky_run_model(wr)));
  // Dropping any configuration leaves its predecessor without a successor.
  auto full = minsky_run_model(wr);
  for (const auto& t : full.traces) CHECK_FALSE(eval_sentence(ws, without(full, t)));

  auto up = machine("q0", {{"q0", 1, CounterOp::Inc, "q0"}});
  auto ur = minsky_run(up, 3);
  CHECK_FALSE(ur.cyclic);
  CHECK(ur.configs.size() == 4);
  CHECK_FALSE(eval_sentence(encode_minsky(up), minsky_run_model(ur)));
}

TEST_CASE("minsky: zero test only fires on an empty counter") {
  auto m = machine("q0", {{"q0", 2, CounterOp::Inc, "q1"},
                          {"q1", 2, CounterOp::Zero, "q0"},
                          {"q1", 2, CounterOp::Dec, "q0"}});
  auto run = minsky_run(m, 10);
  CHECK(run.cyclic);
  CHECK(run.configs == std::vector<MinskyConfig>{{"q0", 0, 0}, {"q1", 0, 1}});
  CHECK(eval_sentence(encode_minsky(m), minsky_run_model(run)));
}

TEST_CASE("minsky: normalized encoding has two universals") {
  auto m = machine("q0", {{"q0", 1, CounterOp::Inc, "q1"}, {"q1", 1, CounterOp::Dec, "q0"}});
  auto s = encode_minsky(m, true);
  CHECK(is_forall_exists(s));
  int universals = 0;
  for (const auto& b : s.prefix) universals += b.quant == Quant::Forall;
  CHECK(universals <= 2);
}

TEST_CASE("minsky: traces of configurations") {
  auto t = minsky_trace({"q", 2, 3});
  CHECK(t.stem == std::vector<Valuation>{{"q", "1", "2"}, {"1", "2"}, {"2"}});
  CHECK(t.loop == std::vector<Valuation>{{}});
}

TEST_CASE("minsky: rank") {
  std::vector<LassoTrace> traces = {minsky_trace({"q", 0, 0}), minsky_trace({"q", 2, 0}),
                                    minsky_trace({"p", 2, 1}), minsky_trace({"q", 3, 0})};
  auto model = make_model(traces);
  CHECK(minsky_rank(model, traces[0], 1) == 0);
  CHECK(minsky_rank(model, traces[1], 1) == 1);
  CHECK(minsky_rank(model, traces[2], 1) == 1);
  CHECK(minsky_rank(model, traces[3], 1) == 2);
  CHECK(minsky_rank(model, traces[2], 2) == 1);

  auto bad = make_model({LassoTrace{{{"1"}, {}}, {{}}}, LassoTrace{{{}, {"1"}}, {{}}}});
  CHECK_THROWS_AS(minsky_rank(bad, bad.traces[0], 1), Error);
  auto infinite = make_model({LassoTrace{{}, {{"1"}}}});
  CHECK_THROWS_AS(minsky_rank(infinite, infinite.traces[0], 1), Error);
}

TEST_CASE("minsky: rank agrees with the temporal definition") {
  oracle::Gen g(91);
  for (int round = 0; round < 50; ++round) {
    int i = 1 + g.pick(2);
    auto traces = oracle::random_rank_model(g, i, 1 + g.pick(6));
    auto model = make_model(traces);
    for (const auto& t : model.traces) CHECK(minsky_rank(model, t, i) == oracle::rank_by_definition(model.traces, t, i));
  }
}

TEST_CASE("starfree: parse and print") {
  auto e = parse_starfree("!(a b) + eps.empty");
  CHECK(e->kind == StarFreeNode::Sum);
  CHECK(print_starfree(e) == "!(a.b) + eps.empty");
  CHECK(starfree_size(e) == 8);
  oracle::Gen g(5);
  for (int i = 0; i < 100; ++i) {
    auto x = oracle::random_starfree(g, 1 + g.pick(8));
    CHECK(print_starfree(parse_starfree(print_starfree(x))) == print_starfree(x));
  }
  CHECK_THROWS_AS(parse_starfree("a + "), ParseError);
  CHECK_THROWS_AS(parse_starfree("(a"), ParseError);
  CHECK_THROWS_AS(parse_starfree("c"), ParseError);
}

TEST_CASE("starfree: base formulas") {
  CHECK(equal(starfree_formula(sf_empty(), "p"), land(atom("a", "p"), lnot(atom("a", "p")))));
  auto sample = make_model(oracle::starfree_sample(3));
  auto eps = prenex(exists("p", land(pin_word("", "p"), starfree_formula(sf_eps(), "p"))));
  CHECK(eval_sentence(eps, sample));
  auto lrr = oracle::padded_word(2, "");
  CHECK(oracle::holds(starfree_formula(sf_eps(), "p"), {{"p", lrr}}));
}

TEST_CASE("starfree: formulas agree with membership on a closed sample") {
  auto sample = make_model(oracle::starfree_sample(3));
  oracle::Gen g(2024);
  for (int round = 0; round < 20; ++round) {
    auto e = oracle::random_starfree(g, 1 + g.pick(5));
    CHECK(temporal_depth(encode_starfree(e)) == 1);
    for (const auto& w : oracle::words_up_to(3)) {
      auto s = prenex(exists("p", land(pin_word(w, "p"), starfree_formula(e, "p"))));
      INFO(print_starfree(e) << " on '" << w << "'");
      CHECK(eval_sentence(s, sample) == oracle::member(e, w));
    }
  }
}

TEST_CASE("starfree: fixed structure") {
  auto k = fig1_structure();
  CHECK(k.size() == 5);
  CHECK(std::all_of(k.initial.begin(), k.initial.end(), [](bool b) { return b; }));
  auto lassos = kripke_lassos(k, 2, 2);
  for (const auto& t : lassos.traces) CHECK(oracle::fig1_language(t));
  // every lasso over the five labels within the bounds that lies in the language is produced
  std::vector<Valuation> labels = {{"l"}, {"a"}, {"b"}, {"r"}, {"hash"}};
  std::size_t in_language = 0;
  for (int len = 1; len <= 4; ++len) {
    std::vector<int> idx(len, 0);
    for (;;) {
      for (int s = std::max(0, len - 2); s <= std::min(2, len - 1); ++s) {
        LassoTrace t;
        for (int i = 0; i < len; ++i) (i < s ? t.stem : t.loop).push_back(labels[idx[i]]);
        auto c = make_model({t}).traces[0];
        if (oracle::fig1_language(c)) {
          ++in_language;
          CHECK(std::find(lassos.traces.begin(), lassos.traces.end(), c) != lassos.traces.end());
        }
      }
      int d = 0;
      while (d < len && ++idx[d] == 5) idx[d++] = 0;
      if (d == len) break;
    }
  }
  CHECK(in_language > 0);

  auto long_sample = kripke_lassos(k, 4, 1);
  auto llab = make_model({LassoTrace{{{"l"}, {"l"}, {"a"}, {"b"}}, {{"r"}}}}).traces[0];
  CHECK(std::find(long_sample.traces.begin(), long_sample.traces.end(), llab) != long_sample.traces.end());
  for (const auto& t : long_sample.traces)
    CHECK_FALSE((oracle::letter(t, 0) == Valuation{"hash"} && oracle::letter(t, 1) == Valuation{"l"}));
}
