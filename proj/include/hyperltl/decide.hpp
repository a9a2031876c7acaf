#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hyperltl/automata.hpp"
#include "hyperltl/formula.hpp"
#include "hyperltl/semantics.hpp"
#include "hyperltl/transform.hpp"
#include "hyperltl/types.hpp"

namespace hyperltl {

enum class Outcome { Sat, Unsat, UnsatWithinBound, Unknown };
std::string outcome_name(Outcome o);

using ValuationTuple = std::vector<Valuation>;

// One member of the guessed set S: the tuples at the first head_len
// positions and the set of tuples that recur forever afterwards.
struct VSet {
  std::vector<ValuationTuple> head;
  std::vector<ValuationTuple> tuples;  // sorted
};

struct FragmentCertificate {
  Sentence sentence;  // the decided sentence, universal made explicit
  std::vector<std::string> props;
  int prefix_len = 0;      // leading existentials
  int witness_len = 0;     // trailing existentials
  int head_len = 0;        // positions pinned by X^k and bare propositions
  std::vector<ValuationTuple> prefix_head;
  std::vector<ValuationTuple> prefix_set;  // P0, sorted
  std::vector<VSet> members;
};

struct DecideStats {
  std::size_t candidates = 0;
  double seconds = 0;
};

struct Verdict {
  Outcome outcome = Outcome::Unknown;
  std::optional<FiniteTraceModel> model;
  std::optional<KripkeStructure> kripke;
  std::optional<FragmentCertificate> fragment;
  DecideStats stats;
  std::string note;
};

inline constexpr std::size_t kDefaultEnumerationBudget = 200000;
inline constexpr std::size_t kDefaultFragmentBudget = 20000000;

struct DecideOptions {
  std::size_t period_cap = kDefaultPeriodCap;
  std::size_t expansion_cap = kDefaultExpansionCap;
  std::size_t enumeration_budget = kDefaultEnumerationBudget;
  std::size_t fragment_budget = kDefaultFragmentBudget;
  ComplementOptions complement;
  int jobs = 1;
};

// Models with at most k traces, through quantifier expansion and the LTL backend.
Verdict sat_bounded_traces(const Sentence& s, int k, const DecideOptions& opt = {});
// Definitive for exists*, forall* and exists* forall* prefixes.
Verdict decide_complete(const Sentence& s, const DecideOptions& opt = {});
// Sets of lassos x y^omega with |x| + |y| <= k.
Verdict sat_bounded_periodic(const Sentence& s, int k, const DecideOptions& opt = {});
// Trace sets of Kripke structures with at most k states.
Verdict sat_bounded_kripke(const Sentence& s, int k, const DecideOptions& opt = {});
// Depth-one F/G/X* sentences with prefix exists* forall? exists*.
Verdict sat_fragment(const Sentence& s, const DecideOptions& opt = {});

// Re-checks consistency, closure and satisfaction of every member; returns
// a description of the first violation, or an empty string.
std::string check_certificate(const FragmentCertificate& c);

struct ChainStep {
  LassoTrace trace;                  // value of the universal variable
  std::vector<LassoTrace> witnesses;  // values of the trailing existentials
};

struct WitnessChain {
  std::vector<LassoTrace> base;             // values of the leading existentials
  std::vector<std::vector<ChainStep>> levels;
};

// Builds base traces and `depth` rounds of witnesses; every step is checked
// with eval_qf and every recurring tuple is checked to occur in each loop.
WitnessChain fragment_witness_chain(const FragmentCertificate& c, int depth);

// All distinct lassos with |x| + |y| <= k over props.
std::vector<LassoTrace> bounded_lassos(const std::vector<std::string>& props, int k);

}  // namespace hyperltl
