#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperltl {

enum class ErrorKind {
  Parse,
  EmptyLoop,
  DanglingEdge,
  NoInitialState,
  NoSuccessor,
  EmptyWordPair,
  UnknownOpcode,
  QuantifierUnderTemporal,
  Capture,
  PeriodBlowup,
  SizeBlowup,
  ComplementBlowup,
  Budget,
  NotAModel,
  Shape,
  NotASolution,
  NotTotallyOrdered,
  EmptyModel,
  InvalidArgument,
};

const char* kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, const std::string& what, SourceSpan span,
             std::vector<std::string> expected = {})
      : Error(kind, what + " at offset " + std::to_string(span.start)),
        span_(span),
        expected_(std::move(expected)) {}
  const SourceSpan& span() const { return span_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  SourceSpan span_;
  std::vector<std::string> expected_;
};

// Model checking reports which quantifier forced the complement.
class ComplementBlowup : public Error {
 public:
  ComplementBlowup(const std::string& what, int quantifier_position = -1)
      : Error(ErrorKind::ComplementBlowup, what), position_(quantifier_position) {}
  int quantifier_position() const { return position_; }

 private:
  int position_;
};

}  // namespace hyperltl
