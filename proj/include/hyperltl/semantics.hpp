#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hyperltl/formula.hpp"
#include "hyperltl/types.hpp"

namespace hyperltl {

inline constexpr std::size_t kDefaultPeriodCap = 1000000;

Valuation value_at(const LassoTrace& t, std::size_t j);
LassoTrace canonical(const LassoTrace& t);
FiniteTraceModel make_model(std::vector<LassoTrace> traces);

struct Alignment {
  std::size_t stem = 0;    // S: longest stem
  std::size_t period = 1;  // P: lcm of loop lengths
  std::size_t horizon() const { return stem + period; }
  // Folds an index into [0, S+P).
  std::size_t fold(std::size_t j) const { return j < stem ? j : stem + (j - stem) % period; }
  std::size_t succ(std::size_t j) const { return j + 1 < horizon() ? j + 1 : stem; }
};

Alignment align(const std::vector<const LassoTrace*>& ts, std::size_t cap = kDefaultPeriodCap);
Alignment align(const std::vector<LassoTrace>& ts, std::size_t cap = kDefaultPeriodCap);

using TraceAssignment = std::map<std::string, LassoTrace>;

// Quantifier-free formula compiled into a topologically ordered DAG.
class QfEvaluator {
 public:
  explicit QfEvaluator(const Formula& psi);
  // Sorted free variables; traces are passed in this order.
  const std::vector<std::string>& variables() const { return vars_; }
  bool holds(const std::vector<const LassoTrace*>& traces,
             std::size_t cap = kDefaultPeriodCap) const;
  // Truth value at every folded index of the given alignment.
  std::vector<char> positions(const std::vector<const LassoTrace*>& traces,
                              const Alignment& al) const;

 private:
  struct Cell {
    Op op;
    std::string prop;
    int var = -1;
    int lhs = -1;
    int rhs = -1;
  };
  std::vector<Cell> cells_;
  std::vector<std::string> vars_;
};

bool eval_qf(const Formula& psi, const TraceAssignment& pi, std::size_t cap = kDefaultPeriodCap);
// Value of psi at every folded index; also returns the alignment used.
std::vector<char> eval_qf_positions(const Formula& psi, const TraceAssignment& pi, Alignment& al,
                                    std::size_t cap = kDefaultPeriodCap);

// Evaluates one sentence over one model with quantifiers pushed inward and
// results memoized per (subformula, traces of its free variables).
class SentenceEvaluator {
 public:
  SentenceEvaluator(const Sentence& s, const FiniteTraceModel& model,
                    std::size_t cap = kDefaultPeriodCap);
  ~SentenceEvaluator();
  bool evaluate();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

bool eval_sentence(const Sentence& s, const FiniteTraceModel& model,
                   std::size_t cap = kDefaultPeriodCap);

FiniteTraceModel kripke_lassos(const KripkeStructure& k, int stem_bound, int loop_bound);

}  // namespace hyperltl
