#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hyperltl/formula.hpp"
#include "hyperltl/semantics.hpp"

namespace hyperltl {

using Letter = std::uint64_t;  // bit i set iff props[i] holds

struct Guard {
  Letter pos = 0;
  Letter neg = 0;
  bool matches(Letter l) const { return (l & pos) == pos && (l & neg) == 0; }
  bool satisfiable() const { return (pos & neg) == 0; }
};

struct NbaEdge {
  Guard guard;
  int to;
};

// Transition-guarded, state-accepting Buchi automaton over subsets of props.
struct NBA {
  std::vector<std::string> props;
  std::vector<int> initial;
  std::vector<std::vector<NbaEdge>> edges;
  std::vector<bool> accepting;
  // When set, words range over these letters only.
  std::optional<std::vector<Letter>> alphabet;

  int size() const { return static_cast<int>(edges.size()); }
  int add_state(bool acc);
  std::vector<Letter> letters() const;  // explicit alphabet or all 2^|props|
};

struct LassoWord {
  std::vector<Letter> stem;
  std::vector<Letter> loop;
};

inline constexpr int kDefaultComplementCap = 12;
inline constexpr std::size_t kDefaultComplementBudget = 200000;

struct ComplementOptions {
  int input_cap = kDefaultComplementCap;       // applies to the rank-based construction
  std::size_t state_budget = kDefaultComplementBudget;
};

// Atom a over variable v is read as proposition "a@v"; over "_" it is just "a".
std::string channel(const std::string& prop, const std::string& var);
std::pair<std::string, std::string> split_channel(const std::string& name);

Formula zip_exists(const Sentence& s);
TraceAssignment unzip(const LassoTrace& t, const std::vector<std::string>& vars);

NBA ltl_to_nba(const Formula& f, const std::vector<std::string>& extra_props = {});
// Deterministic weak automaton for Boolean combinations of X^k b, F b, G b and
// b U c with propositional b and c. Empty outside that shape or past state_cap.
std::optional<NBA> weak_nba(const Formula& f, int state_cap = 4096);
std::optional<LassoWord> nba_nonempty(const NBA& a);
bool nba_accepts(const NBA& a, const LassoWord& w);
std::optional<LassoTrace> ltl_sat(const Formula& f);

// Every nontrivial SCC is entirely accepting or entirely rejecting.
bool is_weak(const NBA& a);
NBA complement_nba(const NBA& a, const ComplementOptions& opt = {});
NBA intersect(const NBA& a, const NBA& b);
// Keeps states reachable from an initial state that can reach an accepting cycle.
NBA prune(const NBA& a);
// Re-expresses guards over a new proposition list; dropped props are projected away.
NBA reindex(const NBA& a, const std::vector<std::string>& props);

LassoTrace word_to_trace(const LassoWord& w, const std::vector<std::string>& props);
LassoWord trace_to_word(const LassoTrace& t, const std::vector<std::string>& props);
std::string dump_nba(const NBA& a);

}  // namespace hyperltl
