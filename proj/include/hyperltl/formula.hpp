#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hyperltl/error.hpp"

namespace hyperltl {

enum class Op : std::uint8_t {
  Atom, True, False,
  Not, And, Or, Implies, Iff, Xor,
  Next, Eventually, Always, Until,
  Exists, Forall,
};

struct Node;
using Formula = std::shared_ptr<const Node>;

// Unary operators keep their operand in lhs. Quantifiers keep the bound
// variable in var and the body in lhs.
struct Node {
  Op op;
  std::string prop;
  std::string var;
  Formula lhs;
  Formula rhs;
  std::uint64_t hash;
};

bool is_unary(Op op);
bool is_binary(Op op);
bool is_temporal(Op op);
bool is_quantifier(Op op);

Formula atom(const std::string& prop, const std::string& var);
Formula top();
Formula bottom();
Formula lnot(Formula f);
Formula land(Formula a, Formula b);
Formula lor(Formula a, Formula b);
Formula land(const std::vector<Formula>& fs);  // empty -> true
Formula lor(const std::vector<Formula>& fs);   // empty -> false
Formula limplies(Formula a, Formula b);
Formula liff(Formula a, Formula b);
Formula lxor(Formula a, Formula b);
Formula next(Formula f);
Formula next(Formula f, int times);
Formula eventually(Formula f);
Formula always(Formula f);
Formula until(Formula a, Formula b);
Formula exists(const std::string& var, Formula body);
Formula forall(const std::string& var, Formula body);
Formula make(Op op, Formula lhs, Formula rhs = nullptr);

bool equal(const Formula& a, const Formula& b);

struct FormulaHash {
  std::size_t operator()(const Formula& f) const { return static_cast<std::size_t>(f->hash); }
};
struct FormulaEq {
  bool operator()(const Formula& a, const Formula& b) const { return equal(a, b); }
};

enum class Quant : std::uint8_t { Exists, Forall };

struct Binder {
  Quant quant;
  std::string var;
  bool operator==(const Binder&) const = default;
};

struct Sentence {
  std::vector<Binder> prefix;
  Formula matrix;
};

Quant dual(Quant q);
Formula to_formula(const Sentence& s);
// Peels leading quantifiers; the remainder must be quantifier-free.
Sentence as_sentence(const Formula& f);

std::set<std::string> free_vars(const Formula& f);
std::set<std::string> propositions(const Formula& f);
// Atoms as (prop, var) pairs.
std::set<std::pair<std::string, std::string>> atoms(const Formula& f);
bool has_quantifier(const Formula& f);
bool is_closed(const Sentence& s);
// Number of distinct subformulas.
std::size_t formula_size(const Formula& f);

int temporal_depth(const Formula& f);
int temporal_depth(const Sentence& s);
int alternation_depth(const Sentence& s);
// Minimum over all prenexings of f.
int alternation_depth(const Formula& f);

std::vector<std::pair<Quant, int>> prefix_blocks(const Sentence& s);
std::string classify_prefix(const Sentence& s);
std::vector<Binder> prefix_from_class(const std::string& pattern);

bool is_exists_star(const Sentence& s);
bool is_forall_star(const Sentence& s);
bool is_exists_forall(const Sentence& s);        // exists* forall*
bool is_forall_exists(const Sentence& s);        // forall* exists*
bool is_exists_forall1_exists(const Sentence& s);  // exists* (forall)? exists*

enum class Fragment { FG1, FGX1 };
bool in_fragment(const Sentence& s, Fragment which);
bool in_fragment(const Formula& matrix, Fragment which);

Sentence prenex(const Formula& f);
Formula substitute(const Formula& f, const std::string& from, const std::string& to);

// A variable name not in used, derived from base.
std::string fresh_var(const std::string& base, const std::set<std::string>& used);

}  // namespace hyperltl
