#pragma once

#include <stdexcept>
#include <string>

namespace flowgran {

// Base for all toolkit errors. Subtypes carry the failure category in the
// type so callers can catch selectively; the message is single-line and
// machine-parseable ("category: detail").
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SyntaxError : Error {
  int line;
  std::string reason;
  SyntaxError(int line_, const std::string& reason_)
      : Error("syntax error at line " + std::to_string(line_) + ": " + reason_),
        line(line_),
        reason(reason_) {}
};

struct DuplicateNodeId : Error {
  explicit DuplicateNodeId(const std::string& id)
      : Error("duplicate node id: " + id) {}
};

struct DanglingEdgeRef : Error {
  explicit DanglingEdgeRef(const std::string& id)
      : Error("edge references undeclared node: " + id) {}
};

struct UnsupportedDirective : Error {
  explicit UnsupportedDirective(const std::string& directive)
      : Error("unsupported directive: " + directive) {}
};

struct EmptyResult : Error {
  explicit EmptyResult(const std::string& what_) : Error("empty result: " + what_) {}
};

struct UnsupportedGraph : Error {
  explicit UnsupportedGraph(const std::string& why)
      : Error("unsupported graph for layout: " + why) {}
};

struct RuleSpaceExhausted : Error {
  RuleSpaceExhausted(int requested, int available)
      : Error("rule space exhausted: requested " + std::to_string(requested) +
              " variants, only " + std::to_string(available) + " exist") {}
};

struct DegenerateLabels : Error {
  DegenerateLabels() : Error("degenerate labels: all node labels are equal") {}
};

struct ZeroVector : Error {
  ZeroVector() : Error("zero vector has no cosine direction") {}
};

struct TooFewNegatives : Error {
  TooFewNegatives(int have, int need)
      : Error("too few hard negatives: have " + std::to_string(have) +
              ", need at least " + std::to_string(need)) {}
};

struct MissingHardPositives : Error {
  MissingHardPositives() : Error("no hard positives present") {}
};

struct InsufficientCorpus : Error {
  InsufficientCorpus(std::size_t have, std::size_t need)
      : Error("insufficient corpus: " + std::to_string(have) + " granules, need " +
              std::to_string(need)) {}
};

struct InsufficientItems : Error {
  InsufficientItems(std::size_t have, std::size_t need)
      : Error("insufficient test items: " + std::to_string(have) + ", need " +
              std::to_string(need)) {}
};

struct EmptyQuerySet : Error {
  EmptyQuerySet() : Error("empty query set") {}
};

struct MissingFixedSet : Error {
  explicit MissingFixedSet(const std::string& id)
      : Error("missing fixed negative set for sample: " + id) {}
};

struct SchemaViolation : Error {
  int line;
  SchemaViolation(int line_, const std::string& why)
      : Error("schema violation at line " + std::to_string(line_) + ": " + why), line(line_) {}
};

struct NoRecordsFound : Error {
  explicit NoRecordsFound(const std::string& dir)
      : Error("no records found in: " + dir) {}
};

}  // namespace flowgran
