#include "hyperltl/syntax.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "hyperltl/semantics.hpp"

namespace hyperltl {

namespace {

enum class Tok {
  Word,
  LParen, RParen, LBracket, RBracket, LBrace, RBrace,
  Dot, Comma, Colon, Semi, Bar, Slash,
  Bang, Amp, Arrow, DArrow,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t start;
  std::size_t end;
};

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@' || c == '\'';
}

std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : src_(text) { tokenize(); }
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  Token take() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_word(const std::string& w) const { return at(Tok::Word) && peek().text == w; }
  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
    const Token& t = peek();
    std::string what = msg + ", found " + describe(t);
    if (!expected.empty()) {
      what += "; expected one of";
      for (const auto& e : expected) what += " " + e;
    }
    throw ParseError(ErrorKind::Parse, what, {t.start, t.end}, std::move(expected));
  }
  Token expect(Tok k, const std::string& name) {
    if (!at(k)) fail("unexpected token", {name});
    return take();
  }
  Token expect_word(const std::string& w) {
    if (!at_word(w)) fail("unexpected token", {"'" + w + "'"});
    return take();
  }
  std::size_t size() const { return src_.size(); }

 private:
  void tokenize() {
    std::size_t i = 0;
    const std::size_t n = src_.size();
    auto push = [&](Tok k, std::size_t len) {
      toks_.push_back({k, src_.substr(i, len), i, i + len});
      i += len;
    };
    while (i < n) {
      char c = src_[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (c == '#') {
        while (i < n && src_[i] != '\n') ++i;
      } else if (word_char(c)) {
        std::size_t j = i;
        bool marker = false;
        while (j < n) {
          if (src_[j] == '@') marker = true;
          if (word_char(src_[j])) {
            ++j;
          } else if (marker && src_[j] == '.' && j + 1 < n && word_char(src_[j + 1])) {
            ++j;
          } else {
            break;
          }
        }
        push(Tok::Word, j - i);
      } else if (src_.compare(i, 3, "<->") == 0) {
        push(Tok::DArrow, 3);
      } else if (src_.compare(i, 2, "->") == 0) {
        push(Tok::Arrow, 2);
      } else {
        Tok k;
        switch (c) {
          case '(': k = Tok::LParen; break;
          case ')': k = Tok::RParen; break;
          case '[': k = Tok::LBracket; break;
          case ']': k = Tok::RBracket; break;
          case '{': k = Tok::LBrace; break;
          case '}': k = Tok::RBrace; break;
          case '.': k = Tok::Dot; break;
          case ',': k = Tok::Comma; break;
          case ':': k = Tok::Colon; break;
          case ';': k = Tok::Semi; break;
          case '|': k = Tok::Bar; break;
          case '/': k = Tok::Slash; break;
          case '!': k = Tok::Bang; break;
          case '&': k = Tok::Amp; break;
          default:
            throw ParseError(ErrorKind::Parse, std::string("unexpected character '") + c + "'",
                             {i, i + 1});
        }
        push(k, 1);
      }
    }
    toks_.push_back({Tok::End, "", n, n});
  }

  const std::string& src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

bool is_keyword(const std::string& w) {
  return w == "X" || w == "F" || w == "G" || w == "U" || w == "forall" || w == "exists" ||
         w == "true" || w == "false" || w == "xor";
}

bool valid_prop(const std::string& w) {
  if (w.empty() || is_keyword(w)) return false;
  if (w[0] == '@') return w.size() > 1;
  for (char c : w) {
    if (c == '@') return true;  // zipped product proposition a@var
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  }
  return true;
}

bool valid_var(const std::string& w) {
  if (w.empty() || is_keyword(w)) return false;
  if (std::isdigit(static_cast<unsigned char>(w[0]))) return false;
  for (char c : w)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'')) return false;
  return true;
}

class FormulaParser {
 public:
  explicit FormulaParser(const std::string& text) : lex_(text) {}

  Formula parse() {
    Formula f = formula();
    if (!lex_.at(Tok::End)) lex_.fail("trailing input", {"end of input"});
    return f;
  }

 private:
  Formula formula() {
    if (lex_.at_word("forall") || lex_.at_word("exists")) return quantified();
    return iff();
  }

  Formula quantified() {
    bool is_forall = lex_.take().text == "forall";
    if (!lex_.at(Tok::Word) || !valid_var(lex_.peek().text))
      lex_.fail("expected a trace variable", {"variable"});
    std::string var = lex_.take().text;
    lex_.expect(Tok::Dot, "'.'");
    Formula body = formula();
    return is_forall ? forall(var, body) : exists(var, body);
  }

  Formula iff() {
    Formula l = implies();
    if (lex_.at(Tok::DArrow)) {
      lex_.take();
      return liff(l, iff_rhs());
    }
    return l;
  }
  Formula iff_rhs() {
    if (lex_.at_word("forall") || lex_.at_word("exists")) return quantified();
    return iff();
  }

  Formula implies() {
    Formula l = xor_();
    if (lex_.at(Tok::Arrow)) {
      lex_.take();
      Formula r = (lex_.at_word("forall") || lex_.at_word("exists")) ? quantified() : implies();
      return limplies(l, r);
    }
    return l;
  }

  Formula xor_() {
    Formula l = disj();
    while (lex_.at_word("xor")) {
      lex_.take();
      l = lxor(l, disj());
    }
    return l;
  }

  Formula disj() {
    Formula l = conj();
    while (lex_.at(Tok::Bar)) {
      lex_.take();
      l = lor(l, conj());
    }
    return l;
  }

  Formula conj() {
    Formula l = until_();
    while (lex_.at(Tok::Amp)) {
      lex_.take();
      l = land(l, until_());
    }
    return l;
  }

  Formula until_() {
    Formula l = unary();
    if (lex_.at_word("U")) {
      lex_.take();
      return until(l, until_());
    }
    return l;
  }

  Formula unary() {
    if (lex_.at(Tok::Bang)) {
      lex_.take();
      return lnot(unary());
    }
    if (lex_.at_word("X")) {
      lex_.take();
      return next(unary());
    }
    if (lex_.at_word("F")) {
      lex_.take();
      return eventually(unary());
    }
    if (lex_.at_word("G")) {
      lex_.take();
      return always(unary());
    }
    if (lex_.at_word("forall") || lex_.at_word("exists")) return quantified();
    return primary();
  }

  Formula primary() {
    if (lex_.at(Tok::LParen)) {
      lex_.take();
      Formula f = formula();
      lex_.expect(Tok::RParen, "')'");
      return f;
    }
    if (lex_.at_word("true")) {
      lex_.take();
      return top();
    }
    if (lex_.at_word("false")) {
      lex_.take();
      return bottom();
    }
    if (lex_.at(Tok::Word) && valid_prop(lex_.peek().text)) {
      std::string prop = lex_.take().text;
      if (!lex_.at(Tok::LBracket)) return atom(prop, kImplicitVar);
      lex_.take();
      if (!lex_.at(Tok::Word) || !valid_var(lex_.peek().text))
        lex_.fail("expected a trace variable", {"variable"});
      std::string var = lex_.take().text;
      lex_.expect(Tok::RBracket, "']'");
      return atom(prop, var);
    }
    lex_.fail("expected a formula",
              {"proposition", "'('", "'!'", "'X'", "'F'", "'G'", "'true'", "'false'", "'forall'",
               "'exists'"});
  }

  Lexer lex_;
};

// Binding strength; larger binds tighter.
int level(Op op) {
  switch (op) {
    case Op::Exists:
    case Op::Forall: return 0;
    case Op::Iff: return 1;
    case Op::Implies: return 2;
    case Op::Xor: return 3;
    case Op::Or: return 4;
    case Op::And: return 5;
    case Op::Until: return 6;
    case Op::Not:
    case Op::Next:
    case Op::Eventually:
    case Op::Always: return 7;
    default: return 8;
  }
}

bool right_assoc(Op op) { return op == Op::Until || op == Op::Implies || op == Op::Iff; }

const char* binary_symbol(Op op) {
  switch (op) {
    case Op::And: return " & ";
    case Op::Or: return " | ";
    case Op::Implies: return " -> ";
    case Op::Iff: return " <-> ";
    case Op::Xor: return " xor ";
    case Op::Until: return " U ";
    default: return " ? ";
  }
}

void print_into(const Formula& f, std::ostringstream& out);

void print_child(const Formula& child, bool parens, std::ostringstream& out) {
  if (parens) out << '(';
  print_into(child, out);
  if (parens) out << ')';
}

void print_into(const Formula& f, std::ostringstream& out) {
  switch (f->op) {
    case Op::Atom:
      out << f->prop;
      if (f->var != kImplicitVar) out << '[' << f->var << ']';
      return;
    case Op::True: out << "true"; return;
    case Op::False: out << "false"; return;
    case Op::Exists:
    case Op::Forall:
      out << (f->op == Op::Exists ? "exists " : "forall ") << f->var << ". ";
      print_child(f->lhs, false, out);
      return;
    case Op::Not:
    case Op::Next:
    case Op::Eventually:
    case Op::Always: {
      out << (f->op == Op::Not ? "!" : f->op == Op::Next ? "X " : f->op == Op::Eventually ? "F " : "G ");
      print_child(f->lhs, level(f->lhs->op) < 7, out);
      return;
    }
    default: {
      int me = level(f->op);
      int l = level(f->lhs->op), r = level(f->rhs->op);
      bool lp = l < me || (l == me && right_assoc(f->op)) || l == 0;
      bool rp = r < me || (r == me && !right_assoc(f->op)) || r == 0;
      print_child(f->lhs, lp, out);
      out << binary_symbol(f->op);
      print_child(f->rhs, rp, out);
    }
  }
}

// Line-oriented formats share one lexer; words may contain dots only after '@'.
std::string take_name(Lexer& lex, const std::string& what) {
  if (!lex.at(Tok::Word)) lex.fail("expected " + what, {what});
  return lex.take().text;
}

Valuation parse_valuation(Lexer& lex) {
  lex.expect(Tok::LBrace, "'{'");
  Valuation v;
  if (lex.at(Tok::RBrace)) {
    lex.take();
    return v;
  }
  while (true) {
    if (!lex.at(Tok::Word) || !valid_prop(lex.peek().text))
      lex.fail("expected a proposition", {"proposition"});
    Token t = lex.take();
    if (!v.insert(t.text).second)
      throw ParseError(ErrorKind::Parse, "duplicate proposition '" + t.text + "' in valuation",
                       {t.start, t.end});
    if (lex.at(Tok::Comma)) {
      lex.take();
      continue;
    }
    lex.expect(Tok::RBrace, "'}'");
    return v;
  }
}

}  // namespace

Formula parse_formula(const std::string& text) { return FormulaParser(text).parse(); }

Sentence parse_sentence(const std::string& text) { return prenex(parse_formula(text)); }

std::string print_formula(const Formula& f) {
  std::ostringstream out;
  print_into(f, out);
  return out.str();
}

std::string print_sentence(const Sentence& s) { return print_formula(to_formula(s)); }

std::string print_valuation(const Valuation& v) {
  std::string out = "{";
  bool first = true;
  for (const auto& p : v) {
    if (!first) out += ",";
    out += p;
    first = false;
  }
  return out + "}";
}

std::string print_trace(const LassoTrace& t) {
  std::string out;
  for (const auto& v : t.stem) out += print_valuation(v) + " ; ";
  out += "| ";
  for (const auto& v : t.loop) out += print_valuation(v) + " ; ";
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

FiniteTraceModel parse_trace_model(const std::string& text) {
  Lexer lex(text);
  std::vector<LassoTrace> traces;
  while (!lex.at(Tok::End)) {
    lex.expect_word("trace");
    take_name(lex, "trace name");
    lex.expect(Tok::Colon, "':'");
    LassoTrace t;
    while (lex.at(Tok::LBrace)) {
      t.stem.push_back(parse_valuation(lex));
      if (lex.at(Tok::Semi)) lex.take();
    }
    Token bar = lex.expect(Tok::Bar, "'|'");
    while (lex.at(Tok::LBrace)) {
      t.loop.push_back(parse_valuation(lex));
      if (lex.at(Tok::Semi)) lex.take();
    }
    if (t.loop.empty())
      throw ParseError(ErrorKind::EmptyLoop, "trace loop must be nonempty",
                       {bar.start, lex.peek().start});
    traces.push_back(std::move(t));
  }
  return make_model(std::move(traces));
}

std::string print_trace_model(const FiniteTraceModel& m) {
  std::string out;
  for (std::size_t i = 0; i < m.traces.size(); ++i)
    out += "trace t" + std::to_string(i) + " : " + print_trace(m.traces[i]) + "\n";
  return out;
}

KripkeStructure parse_kripke(const std::string& text) {
  Lexer lex(text);
  KripkeStructure k;
  std::map<std::string, int> index;
  while (lex.at_word("state")) {
    lex.take();
    Token name = lex.peek();
    std::string n = take_name(lex, "state name");
    if (index.count(n))
      throw ParseError(ErrorKind::Parse, "duplicate state '" + n + "'", {name.start, name.end});
    lex.expect(Tok::Colon, "':'");
    Valuation v = parse_valuation(lex);
    bool init = false;
    if (lex.at_word("initial")) {
      lex.take();
      init = true;
    }
    index[n] = k.add_state(n, std::move(v), init);
  }
  while (lex.at_word("edge")) {
    lex.take();
    auto endpoint = [&]() {
      Token t = lex.peek();
      std::string n = take_name(lex, "state name");
      auto it = index.find(n);
      if (it == index.end())
        throw ParseError(ErrorKind::DanglingEdge, "edge mentions undeclared state '" + n + "'",
                         {t.start, t.end});
      return it->second;
    };
    int from = endpoint();
    lex.expect(Tok::Arrow, "'->'");
    int to = endpoint();
    k.add_edge(from, to);
  }
  if (!lex.at(Tok::End)) lex.fail("unexpected token", {"'state'", "'edge'", "end of input"});
  k.validate();
  return k;
}

std::string print_kripke(const KripkeStructure& k) {
  std::string out;
  for (int s = 0; s < k.size(); ++s) {
    out += "state " + k.names[s] + " : " + print_valuation(k.labels[s]);
    if (k.initial[s]) out += " initial";
    out += "\n";
  }
  for (int s = 0; s < k.size(); ++s)
    for (int t : k.succ[s]) out += "edge " + k.names[s] + " -> " + k.names[t] + "\n";
  return out;
}

PcpInstance parse_pcp(const std::string& text) {
  Lexer lex(text);
  PcpInstance p;
  auto word = [&](const Token& anchor) {
    if (!lex.at(Tok::Word))
      throw ParseError(ErrorKind::EmptyWordPair, "pair has an empty word",
                       {anchor.start, lex.peek().end});
    Token t = lex.take();
    for (char c : t.text)
      if (!std::islower(static_cast<unsigned char>(c)))
        throw ParseError(ErrorKind::Parse, "PCP words use lowercase letters only",
                         {t.start, t.end});
    return t.text;
  };
  while (!lex.at(Tok::End)) {
    Token kw = lex.expect_word("pair");
    std::string u = word(kw);
    lex.expect(Tok::Slash, "'/'");
    std::string v = word(kw);
    p.pairs.emplace_back(u, v);
  }
  if (p.pairs.empty())
    throw ParseError(ErrorKind::Parse, "PCP instance needs at least one pair", {0, text.size()});
  return p;
}

std::string print_pcp(const PcpInstance& p) {
  std::string out;
  for (const auto& [u, v] : p.pairs) out += "pair " + u + " / " + v + "\n";
  return out;
}

MinskyMachine parse_minsky(const std::string& text) {
  Lexer lex(text);
  MinskyMachine m;
  std::set<std::string> states;
  lex.expect_word("init");
  m.init = take_name(lex, "state name");
  states.insert(m.init);
  m.states.push_back(m.init);
  auto note = [&](const std::string& s) {
    if (states.insert(s).second) m.states.push_back(s);
  };
  while (lex.at_word("trans")) {
    lex.take();
    MinskyRule r;
    r.from = take_name(lex, "state name");
    Token c = lex.peek();
    if (!lex.at(Tok::Word) || (c.text != "1" && c.text != "2"))
      lex.fail("expected a counter", {"'1'", "'2'"});
    lex.take();
    r.counter = c.text == "1" ? 1 : 2;
    Token op = lex.peek();
    std::string o = take_name(lex, "opcode");
    if (o == "inc") r.op = CounterOp::Inc;
    else if (o == "dec") r.op = CounterOp::Dec;
    else if (o == "zero") r.op = CounterOp::Zero;
    else
      throw ParseError(ErrorKind::UnknownOpcode, "unknown opcode '" + o + "'", {op.start, op.end},
                       {"'inc'", "'dec'", "'zero'"});
    r.to = take_name(lex, "state name");
    note(r.from);
    note(r.to);
    m.rules.push_back(r);
  }
  if (!lex.at(Tok::End)) lex.fail("unexpected token", {"'trans'", "end of input"});
  return m;
}

std::string print_minsky(const MinskyMachine& m) {
  std::string out = "init " + m.init + "\n";
  for (const auto& r : m.rules) {
    const char* op = r.op == CounterOp::Inc ? "inc" : r.op == CounterOp::Dec ? "dec" : "zero";
    out += "trans " + r.from + " " + std::to_string(r.counter) + " " + op + " " + r.to + "\n";
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
  out << content;
}

}  // namespace hyperltl
