#pragma once

#include <string>

#include "hyperltl/formula.hpp"
#include "hyperltl/types.hpp"

namespace hyperltl {

// Atoms are written prop[var]; a bare prop is an atom over the implicit
// single-trace variable "_", which is how plain LTL is written.
inline const std::string kImplicitVar = "_";

Formula parse_formula(const std::string& text);
Sentence parse_sentence(const std::string& text);  // parse + prenex
std::string print_formula(const Formula& f);
std::string print_sentence(const Sentence& s);

std::string print_valuation(const Valuation& v);
std::string print_trace(const LassoTrace& t);

FiniteTraceModel parse_trace_model(const std::string& text);
std::string print_trace_model(const FiniteTraceModel& m);

KripkeStructure parse_kripke(const std::string& text);
std::string print_kripke(const KripkeStructure& k);

PcpInstance parse_pcp(const std::string& text);
std::string print_pcp(const PcpInstance& p);

MinskyMachine parse_minsky(const std::string& text);
std::string print_minsky(const MinskyMachine& m);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace hyperltl
