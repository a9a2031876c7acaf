#pragma once

#include <set>
#include <string>
#include <vector>

namespace hyperltl {

using Valuation = std::set<std::string>;

// x . y^omega with y nonempty.
struct LassoTrace {
  std::vector<Valuation> stem;
  std::vector<Valuation> loop;

  bool operator==(const LassoTrace& o) const { return stem == o.stem && loop == o.loop; }
  bool operator<(const LassoTrace& o) const {
    if (stem != o.stem) return stem < o.stem;
    return loop < o.loop;
  }
};

// Sorted, deduplicated canonical traces.
struct FiniteTraceModel {
  std::vector<LassoTrace> traces;
};

struct KripkeStructure {
  std::vector<std::string> names;
  std::vector<Valuation> labels;
  std::vector<std::vector<int>> succ;
  std::vector<bool> initial;

  int size() const { return static_cast<int>(names.size()); }
  int add_state(const std::string& name, Valuation label, bool is_initial);
  void add_edge(int from, int to);
  // Throws NoInitialState or NoSuccessor.
  void validate() const;
};

struct PcpInstance {
  std::vector<std::pair<std::string, std::string>> pairs;
};

enum class CounterOp { Inc, Dec, Zero };

struct MinskyRule {
  std::string from;
  int counter;  // 1 or 2
  CounterOp op;
  std::string to;
};

struct MinskyMachine {
  std::string init;
  std::vector<std::string> states;
  std::vector<MinskyRule> rules;
};

}  // namespace hyperltl
