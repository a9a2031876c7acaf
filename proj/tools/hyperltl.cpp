#include <cctype>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hyperltl/automata.hpp"
#include "hyperltl/decide.hpp"
#include "hyperltl/encode.hpp"
#include "hyperltl/error.hpp"
#include "hyperltl/modelcheck.hpp"
#include "hyperltl/semantics.hpp"
#include "hyperltl/syntax.hpp"
#include "hyperltl/transform.hpp"

using namespace hyperltl;
using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kNegative = 1, kUnknown = 2, kError = 3 };

struct Settings {
  bool json = false;
  int jobs = 1;
  std::size_t period_cap = kDefaultPeriodCap;
  std::size_t expansion_cap = kDefaultExpansionCap;
  std::size_t enumeration_budget = kDefaultEnumerationBudget;
  std::size_t fragment_budget = kDefaultFragmentBudget;
  int complement_cap = kDefaultComplementCap;
  std::size_t complement_budget = kDefaultComplementBudget;

  DecideOptions decide() const {
    DecideOptions o;
    o.period_cap = period_cap;
    o.expansion_cap = expansion_cap;
    o.enumeration_budget = enumeration_budget;
    o.fragment_budget = fragment_budget;
    o.complement = complement();
    o.jobs = jobs;
    return o;
  }
  ComplementOptions complement() const { return {complement_cap, complement_budget}; }
};

// Text for humans goes to stdout unless --json is set; the record collects
// everything a script needs.
struct Report {
  const Settings& cfg;
  json record;
  std::ostringstream text;

  int finish(int code) {
    record["exit"] = code;
    if (cfg.json)
      std::cout << record.dump() << "\n";
    else
      std::cout << text.str();
    return code;
  }
};

int exit_for(Outcome o) {
  switch (o) {
    case Outcome::Sat: return kOk;
    case Outcome::Unsat:
    case Outcome::UnsatWithinBound: return kNegative;
    case Outcome::Unknown: return kUnknown;
  }
  return kError;
}

json valuation_json(const Valuation& v) { return json(std::vector<std::string>(v.begin(), v.end())); }

json tuples_json(const std::vector<ValuationTuple>& ts) {
  json out = json::array();
  for (const auto& t : ts) {
    json row = json::array();
    for (const auto& v : t) row.push_back(valuation_json(v));
    out.push_back(row);
  }
  return out;
}

json certificate_json(const FragmentCertificate& c) {
  json members = json::array();
  for (const auto& m : c.members) members.push_back({{"head", tuples_json(m.head)}, {"tuples", tuples_json(m.tuples)}});
  return {{"sentence", print_sentence(c.sentence)},
          {"props", c.props},
          {"prefix_len", c.prefix_len},
          {"witness_len", c.witness_len},
          {"head_len", c.head_len},
          {"prefix_head", tuples_json(c.prefix_head)},
          {"prefix_set", tuples_json(c.prefix_set)},
          {"members", members}};
}

std::string cert_stem(const std::string& input, const std::string& prefix) {
  if (!prefix.empty()) return prefix;
  std::filesystem::path p(input);
  return (p.parent_path() / p.stem()).string() + ".cert";
}

Sentence read_sentence(const std::string& path) { return parse_sentence(read_file(path)); }

int cmd_parse(const Settings& cfg, const std::string& file) {
  Report r{cfg, {{"command", "parse"}}, {}};
  Sentence s = read_sentence(file);
  r.record["sentence"] = print_sentence(s);
  r.text << print_sentence(s) << "\n";
  return r.finish(kOk);
}

int cmd_measure(const Settings& cfg, const std::string& file) {
  Report r{cfg, {{"command", "measure"}}, {}};
  Sentence s = read_sentence(file);
  json m = {{"td", temporal_depth(s)},
            {"ad", alternation_depth(s)},
            {"prefix", classify_prefix(s)},
            {"quantifiers", s.prefix.size()},
            {"size", formula_size(s.matrix)},
            {"FG1", in_fragment(s, Fragment::FG1)},
            {"FGX1", in_fragment(s, Fragment::FGX1)},
            {"exists_forall", is_exists_forall(s)},
            {"forall_exists", is_forall_exists(s)},
            {"exists_forall1_exists", is_exists_forall1_exists(s)}};
  r.record.update(m);
  r.text << "td=" << m["td"] << " ad=" << m["ad"] << " prefix=" << s.prefix.size() << ":"
         << classify_prefix(s) << "\n";
  r.text << "fragments:";
  for (const char* f : {"FG1", "FGX1", "exists_forall", "forall_exists", "exists_forall1_exists"})
    if (m[f].get<bool>()) r.text << " " << f;
  r.text << "\n";
  return r.finish(kOk);
}

int cmd_transform(const Settings& cfg, const std::string& pass, const std::string& file, const std::string& out) {
  Report r{cfg, {{"command", "transform"}, {"pass", pass}}, {}};
  Sentence s = read_sentence(file);
  Sentence t;
  if (pass == "prenex") t = s;
  else if (pass == "depth2") t = reduce_depth2(s);
  else if (pass == "forall-exists") t = to_forall_exists(s);
  else if (pass == "forall2") t = merge_universals(s);
  else if (pass == "xelim") t = eliminate_x(s);
  else t = normalize_forall2_exists(s, true);
  std::string printed = print_sentence(t);
  r.record["sentence"] = printed;
  r.record["td"] = temporal_depth(t);
  r.record["prefix"] = classify_prefix(t);
  if (!out.empty()) {
    write_file(out, printed + "\n");
    r.record["output"] = out;
  } else {
    r.text << printed << "\n";
  }
  return r.finish(kOk);
}

int cmd_eval(const Settings& cfg, const std::string& model_file, const std::string& file) {
  Report r{cfg, {{"command", "eval"}}, {}};
  Sentence s = read_sentence(file);
  FiniteTraceModel m = parse_trace_model(read_file(model_file));
  bool v = eval_sentence(s, m, cfg.period_cap);
  r.record["value"] = v;
  r.record["traces"] = m.traces.size();
  r.text << (v ? "true" : "false") << "\n";
  return r.finish(v ? kOk : kNegative);
}

struct SatArgs {
  std::string mode = "auto";
  int bound = -1;
  int chain_depth = 3;
  std::string cert_prefix;
  bool no_write = false;
};

int cmd_sat(const Settings& cfg, const SatArgs& a, const std::string& file) {
  Report r{cfg, {{"command", "sat"}}, {}};
  Sentence s = read_sentence(file);
  DecideOptions opt = cfg.decide();
  std::string mode = a.mode;
  if (mode == "auto") {
    if (is_exists_forall(s))
      mode = "complete";
    else if (in_fragment(s, Fragment::FGX1) && is_exists_forall1_exists(s))
      mode = "fragment";
    else
      throw Error(ErrorKind::Shape, "prefix " + classify_prefix(s) +
                                        " has no complete procedure; pick --mode traces, periodic or kripke with --bound");
  }
  bool bounded = mode == "traces" || mode == "periodic" || mode == "kripke";
  if (bounded && a.bound < 1) throw Error(ErrorKind::InvalidArgument, "--mode " + mode + " needs --bound >= 1");

  Verdict v;
  if (mode == "complete") v = decide_complete(s, opt);
  else if (mode == "fragment") v = sat_fragment(s, opt);
  else if (mode == "traces") v = sat_bounded_traces(s, a.bound, opt);
  else if (mode == "periodic") v = sat_bounded_periodic(s, a.bound, opt);
  else v = sat_bounded_kripke(s, a.bound, opt);

  r.record["mode"] = mode;
  if (bounded) r.record["bound"] = a.bound;
  r.record["outcome"] = outcome_name(v.outcome);
  r.record["stats"] = {{"candidates", v.stats.candidates}, {"seconds", v.stats.seconds}};
  if (!v.note.empty()) r.record["note"] = v.note;
  r.text << outcome_name(v.outcome) << " (" << mode << (bounded ? " k=" + std::to_string(a.bound) : "") << ", "
         << v.stats.candidates << " candidates, " << v.stats.seconds << " s)\n";
  if (!v.note.empty()) r.text << v.note << "\n";

  const std::string stem = cert_stem(file, a.cert_prefix);
  json files = json::array();
  auto emit = [&](const std::string& suffix, const std::string& content) {
    if (a.no_write) return;
    write_file(stem + suffix, content);
    files.push_back(stem + suffix);
  };
  if (v.model) {
    emit(".trc", print_trace_model(*v.model));
    r.text << print_trace_model(*v.model);
  }
  if (v.kripke) {
    emit(".kst", print_kripke(*v.kripke));
    r.text << print_kripke(*v.kripke);
  }
  if (v.fragment) {
    std::string problem = check_certificate(*v.fragment);
    if (!problem.empty()) throw std::logic_error("certificate failed its own check: " + problem);
    emit(".json", certificate_json(*v.fragment).dump(2) + "\n");
    r.text << v.fragment->members.size() << " types in the certificate\n";
    if (a.chain_depth > 0) {
      WitnessChain chain = fragment_witness_chain(*v.fragment, a.chain_depth);
      std::vector<LassoTrace> traces = chain.base;
      for (const auto& level : chain.levels)
        for (const auto& step : level) {
          traces.push_back(step.trace);
          traces.insert(traces.end(), step.witnesses.begin(), step.witnesses.end());
        }
      emit(".chain.trc", print_trace_model(make_model(traces)));
      r.record["chain_depth"] = chain.levels.size();
      r.text << "witness chain of depth " << chain.levels.size() << " checked\n";
    }
  }
  if (!files.empty()) {
    r.record["certificates"] = files;
    for (const auto& f : files) r.text << "wrote " << f.get<std::string>() << "\n";
  }
  return r.finish(exit_for(v.outcome));
}

int cmd_mc(const Settings& cfg, const std::string& kripke_file, const std::string& file) {
  Report r{cfg, {{"command", "mc"}}, {}};
  Sentence s = read_sentence(file);
  KripkeStructure k = parse_kripke(read_file(kripke_file));
  McStats stats;
  bool holds = modelcheck(k, s, cfg.complement(), &stats);
  r.record["holds"] = holds;
  r.record["stats"] = {{"largest_automaton", stats.largest_automaton}, {"complementations", stats.complementations}};
  r.text << (holds ? "holds" : "fails") << "\n";
  return r.finish(holds ? kOk : kNegative);
}

struct EncodeArgs {
  std::string kind;
  std::string input;
  std::string output;
  std::string ref_model;
  std::string kripke;
  std::vector<int> solution;
  int steps = 1000;
  bool normalize = false;
};

int cmd_encode(const Settings& cfg, const EncodeArgs& a) {
  Report r{cfg, {{"command", "encode"}, {"kind", a.kind}}, {}};
  std::string text = read_file(a.input);
  Sentence s;
  std::optional<FiniteTraceModel> ref;
  if (a.kind == "pcp") {
    PcpInstance p = parse_pcp(text);
    PcpEncoding enc = encode_pcp(p);
    s = enc.sentence;
    r.record["k"] = enc.k;
    r.text << "lasso bound k = " << enc.k << "\n";
    if (!a.ref_model.empty()) {
      if (a.solution.empty()) throw Error(ErrorKind::InvalidArgument, "--ref-model for pcp needs --solution");
      ref = pcp_solution_model(p, a.solution);
    }
  } else if (a.kind == "minsky") {
    MinskyMachine m = parse_minsky(text);
    s = encode_minsky(m, a.normalize);
    if (!a.ref_model.empty()) {
      MinskyRun run = minsky_run(m, a.steps);
      r.record["run_length"] = run.configs.size();
      r.record["cyclic"] = run.cyclic;
      r.text << "run of " << run.configs.size() << " configurations, "
             << (run.cyclic ? "cyclic: the reference model satisfies the encoding"
                            : "not cyclic: the reference model is only a prefix")
             << "\n";
      ref = minsky_run_model(run);
    }
  } else {
    std::string expr = text;
    while (!expr.empty() && std::isspace(static_cast<unsigned char>(expr.back()))) expr.pop_back();
    s = encode_starfree(parse_starfree(expr));
    if (!a.ref_model.empty()) ref = kripke_lassos(fig1_structure(), 2, 2);
    if (!a.kripke.empty()) {
      write_file(a.kripke, print_kripke(fig1_structure()));
      r.record["kripke"] = a.kripke;
    }
  }
  write_file(a.output, print_sentence(s) + "\n");
  r.record["output"] = a.output;
  r.record["quantifiers"] = s.prefix.size();
  r.record["prefix"] = classify_prefix(s);
  r.record["size"] = formula_size(s.matrix);
  r.text << "wrote " << a.output << " (" << s.prefix.size() << " quantifiers, size " << formula_size(s.matrix)
         << ")\n";
  if (ref) {
    write_file(a.ref_model, print_trace_model(*ref));
    r.record["ref_model"] = a.ref_model;
    r.text << "wrote " << a.ref_model << " (" << ref->traces.size() << " traces)\n";
  }
  return r.finish(kOk);
}

int cmd_ltl_sat(const Settings& cfg, const std::string& file) {
  Report r{cfg, {{"command", "ltl sat"}}, {}};
  Formula f = parse_formula(read_file(file));
  if (has_quantifier(f)) throw Error(ErrorKind::Shape, "ltl sat takes a quantifier-free formula");
  auto model = ltl_sat(f);
  r.record["outcome"] = model ? "SAT" : "UNSAT";
  r.text << (model ? "SAT" : "UNSAT") << "\n";
  if (model) {
    r.record["trace"] = print_trace(*model);
    r.text << print_trace(*model) << "\n";
  }
  return r.finish(model ? kOk : kNegative);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Satisfiability, model checking and encodings for HyperLTL"};
  app.require_subcommand(1);
  app.fallthrough();
  Settings cfg;
  app.add_flag("--json", cfg.json, "Print one JSON record instead of text");
  app.add_option("--jobs", cfg.jobs, "Worker threads for the deciders")->check(CLI::PositiveNumber);
  app.add_option("--period-cap", cfg.period_cap, "Largest lcm of loop lengths evaluated");
  app.add_option("--expansion-cap", cfg.expansion_cap, "Node cap for quantifier expansion");
  app.add_option("--enum-budget", cfg.enumeration_budget, "Candidates tried by bounded enumeration");
  app.add_option("--fragment-budget", cfg.fragment_budget, "Search leaves per frame in the fragment decider");
  app.add_option("--complement-cap", cfg.complement_cap, "Largest automaton given to rank-based complementation");
  app.add_option("--complement-budget", cfg.complement_budget, "State budget for complementation");

  std::string file, model_file, kripke_file, pass = "prenex", out;
  auto* parse = app.add_subcommand("parse", "Parse and print a sentence");
  parse->add_option("file", file)->required()->check(CLI::ExistingFile);
  auto* measure = app.add_subcommand("measure", "Temporal depth, alternation depth, prefix class, fragments");
  measure->add_option("file", file)->required()->check(CLI::ExistingFile);

  auto* transform = app.add_subcommand("transform", "Apply one syntactic pass");
  transform->add_option("--pass", pass)
      ->check(CLI::IsMember({"prenex", "depth2", "forall-exists", "forall2", "xelim", "normalize"}));
  transform->add_option("-o,--output", out);
  transform->add_option("file", file)->required()->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "Evaluate a sentence over a finite set of lassos");
  eval->add_option("--model", model_file)->required()->check(CLI::ExistingFile);
  eval->add_option("file", file)->required()->check(CLI::ExistingFile);

  SatArgs sat_args;
  auto* sat = app.add_subcommand("sat", "Decide satisfiability");
  sat->add_option("--mode", sat_args.mode)
      ->check(CLI::IsMember({"auto", "traces", "periodic", "kripke", "fragment"}));
  sat->add_option("--bound", sat_args.bound, "Traces, lasso length or states, per mode");
  sat->add_option("--chain-depth", sat_args.chain_depth, "Rounds of fragment witnesses to build");
  sat->add_option("--cert-prefix", sat_args.cert_prefix, "Path prefix for certificate files");
  sat->add_flag("--no-write", sat_args.no_write, "Do not write certificate files");
  sat->add_option("file", file)->required()->check(CLI::ExistingFile);

  auto* mc = app.add_subcommand("mc", "Model check a Kripke structure");
  mc->add_option("--kripke", kripke_file)->required()->check(CLI::ExistingFile);
  mc->add_option("file", file)->required()->check(CLI::ExistingFile);

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Generate sentences from PCP, counter machines, star-free expressions");
  encode->add_option("kind", enc.kind)->required()->check(CLI::IsMember({"pcp", "minsky", "starfree"}));
  encode->add_option("input", enc.input)->required()->check(CLI::ExistingFile);
  encode->add_option("-o,--output", enc.output)->required();
  encode->add_option("--ref-model", enc.ref_model, "Write the reference trace model here");
  encode->add_option("--solution", enc.solution, "PCP solution as 1-based pair indices");
  encode->add_option("--steps", enc.steps, "Counter machine steps to simulate");
  encode->add_flag("--normalize", enc.normalize, "Bring the counter machine sentence to forall^2 exists*");
  encode->add_option("--kripke", enc.kripke, "Write the fixed star-free structure here");

  auto* ltl = app.add_subcommand("ltl", "Single-trace LTL backend");
  ltl->require_subcommand(1);
  auto* ltl_sat_cmd = ltl->add_subcommand("sat", "Find a lasso satisfying an LTL formula");
  ltl_sat_cmd->add_option("file", file)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kError;
  }

  try {
    if (*parse) return cmd_parse(cfg, file);
    if (*measure) return cmd_measure(cfg, file);
    if (*transform) return cmd_transform(cfg, pass, file, out);
    if (*eval) return cmd_eval(cfg, model_file, file);
    if (*sat) return cmd_sat(cfg, sat_args, file);
    if (*mc) return cmd_mc(cfg, kripke_file, file);
    if (*encode) return cmd_encode(cfg, enc);
    if (*ltl_sat_cmd) return cmd_ltl_sat(cfg, file);
  } catch (const Error& e) {
    int code = e.kind() == ErrorKind::Budget ? kUnknown : kError;
    if (cfg.json) {
      json rec = {{"error", kind_name(e.kind())}, {"message", e.what()}, {"exit", code}};
      if (auto* pe = dynamic_cast<const ParseError*>(&e)) rec["span"] = {pe->span().start, pe->span().end};
      std::cout << rec.dump() << "\n";
    } else {
      std::cerr << "error: " << e.what() << "\n";
    }
    return code;
  } catch (const std::exception& e) {
    if (cfg.json)
      std::cout << json{{"error", "internal"}, {"message", e.what()}, {"exit", kError}}.dump() << "\n";
    else
      std::cerr << "internal error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
