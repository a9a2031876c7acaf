#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hyperltl/formula.hpp"
#include "hyperltl/types.hpp"

namespace hyperltl {

inline constexpr std::size_t kDefaultExpansionCap = std::size_t{1} << 22;

// Replaces every quantifier by a k-fold conjunction or disjunction over k
// fresh existential variables. SizeBlowup when the tree would exceed node_cap.
Sentence expand_quantifiers(const Sentence& s, int k, std::size_t node_cap = kDefaultExpansionCap);

// Adds one trailing existential witness trace whose markers track every
// subformula of the matrix; the result has temporal depth at most two.
Sentence reduce_depth2(const Sentence& s);
std::string depth2_marker(const Formula& sub);
// One annotated copy per tuple of traces; NotAModel unless t satisfies s.
FiniteTraceModel witness_model_depth2(const FiniteTraceModel& t, const Sentence& s);

// Existentials with a universal in their scope.
int critical_existentials(const Sentence& s);
// Removes critical existentials one round at a time using Skolem markers.
Sentence to_forall_exists(const Sentence& s);
// Marks each round's Skolem tuples at distinct positions past every stem.
FiniteTraceModel witness_model_forall_exists(const FiniteTraceModel& t, const Sentence& s);

// Proposition (a, i) of the merged alphabet.
std::string merged_prop(const std::string& prop, int component);
// Collapses a forall^n exists^* sentence to two universals over tuple traces.
Sentence merge_universals(const Sentence& s);
LassoTrace merge_traces(const std::vector<LassoTrace>& tuple);
// {mrg(t1..tn) | ti in t}.
FiniteTraceModel merged_model(const FiniteTraceModel& t, int n);
// First component of every merged trace.
FiniteTraceModel unmerge_model(const FiniteTraceModel& t);

// reduce_depth2, then to_forall_exists, then merge_universals.
Sentence normalize_forall2_exists(const Sentence& s, bool skip_if_shallow = false);

// Replaces X^k b by G(m^k -> b) guarded by a marker trace. With literal set,
// the construction is produced exactly as stated in the lemma, without the
// distinctness guards on existential witnesses; that version admits spurious
// models whose existential witnesses are the marker trace itself.
Sentence eliminate_x(const Sentence& s, bool literal = false);
// Largest k with X^k b in the matrix.
int next_depth(const Formula& matrix);
// {m^0}{m^1}...{m^d} followed by the empty valuation forever.
LassoTrace xelim_marker_trace(const Sentence& s);

FiniteTraceModel project_model(const FiniteTraceModel& t, const std::set<std::string>& props);

}  // namespace hyperltl
