#pragma once

#include <cstddef>

#include "hyperltl/automata.hpp"
#include "hyperltl/formula.hpp"
#include "hyperltl/types.hpp"

namespace hyperltl {

struct McStats {
  std::size_t largest_automaton = 0;
  int complementations = 0;
};

// Decides whether the trace set of k satisfies s. Runs start in any initial
// state. A ComplementBlowup names the quantifier position being processed.
bool modelcheck(const KripkeStructure& k, const Sentence& s, const ComplementOptions& opt = {},
                McStats* stats = nullptr);

}  // namespace hyperltl
