#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hyperltl/formula.hpp"
#include "hyperltl/types.hpp"

namespace hyperltl {

// ---------- bounded PCP ----------

struct PcpEncoding {
  Sentence sentence;
  int k = 0;  // lasso length bound 2^n + 2l + 1
};

std::string pcp_letter(char c);      // plain letter c
std::string pcp_bar_letter(char c);  // marked letter, "bar_c"

PcpEncoding encode_pcp(const PcpInstance& p);
// Type-one and type-two traces for a solution given as 1-based pair indices.
// Throws NotASolution.
FiniteTraceModel pcp_solution_model(const PcpInstance& p, const std::vector<int>& s);

// ---------- two-counter machines ----------

// Optionally normalized to a forall^2 exists* prefix.
Sentence encode_minsky(const MinskyMachine& m, bool normalize = false);

struct MinskyConfig {
  std::string state;
  int c1 = 0, c2 = 0;
  bool operator==(const MinskyConfig&) const = default;
};

struct MinskyRun {
  std::vector<MinskyConfig> configs;
  bool cyclic = false;  // the last step returns to an earlier configuration
};

// Follows the first applicable rule from (init, 0, 0) until a configuration
// repeats, no rule applies, or max_steps steps were taken.
MinskyRun minsky_run(const MinskyMachine& m, int max_steps);
// {q} plus counter marks i at positions 0 .. c_i - 1, then empty forever.
LassoTrace minsky_trace(const MinskyConfig& c);
FiniteTraceModel minsky_run_model(const MinskyRun& run);
// Number of distinct i-sets strictly below t's. Throws NotTotallyOrdered, or
// InvalidArgument when some i-set is infinite.
std::size_t minsky_rank(const FiniteTraceModel& model, const LassoTrace& t, int i);

// ---------- star-free expressions and the fixed structure ----------

struct StarFreeNode;
using StarFreeExpr = std::shared_ptr<const StarFreeNode>;

struct StarFreeNode {
  enum Kind { A, B, Eps, Empty, Sum, Concat, Complement } kind;
  StarFreeExpr lhs, rhs;
};

StarFreeExpr sf_a();
StarFreeExpr sf_b();
StarFreeExpr sf_eps();
StarFreeExpr sf_empty();
StarFreeExpr sf_sum(StarFreeExpr x, StarFreeExpr y);
StarFreeExpr sf_concat(StarFreeExpr x, StarFreeExpr y);
StarFreeExpr sf_complement(StarFreeExpr x);

// Grammar: sum of '+', concatenation by juxtaposition or '.', prefix '!',
// atoms a, b, eps, empty, parentheses.
StarFreeExpr parse_starfree(const std::string& text);
std::string print_starfree(const StarFreeExpr& e);
int starfree_size(const StarFreeExpr& e);

// Formula with free variable var holding on l^n w r^omega iff w is in e.
Formula starfree_formula(const StarFreeExpr& e, const std::string& var);
Sentence encode_starfree(const StarFreeExpr& e);
// States l, a, b, r, hash, all initial.
KripkeStructure fig1_structure();

}  // namespace hyperltl
