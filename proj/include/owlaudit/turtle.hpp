#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include "owlaudit/decimal.hpp"

namespace owlaudit::turtle {

namespace ns {
inline constexpr std::string_view kRdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view kOwl = "http://www.w3.org/2002/07/owl#";
inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

inline std::string rdf(std::string_view local) { return std::string(kRdf) + std::string(local); }
inline std::string rdfs(std::string_view local) { return std::string(kRdfs) + std::string(local); }
inline std::string owl(std::string_view local) { return std::string(kOwl) + std::string(local); }
inline std::string xsd(std::string_view local) { return std::string(kXsd) + std::string(local); }
}  // namespace ns

struct Iri {
  std::string value;
  friend auto operator<=>(const Iri&, const Iri&) = default;
};

struct BlankNode {
  std::string label;
  friend auto operator<=>(const BlankNode&, const BlankNode&) = default;
};

struct Literal {
  std::string lexical;
  std::string datatype;  // absolute datatype IRI
  // Decoded exact value for xsd:integer, xsd:decimal and xsd:double literals.
  std::optional<Decimal> value;

  // RDF term identity: lexical form plus datatype.
  friend bool operator==(const Literal& a, const Literal& b) {
    return a.lexical == b.lexical && a.datatype == b.datatype;
  }
  friend std::strong_ordering operator<=>(const Literal& a, const Literal& b) {
    if (auto c = a.lexical <=> b.lexical; c != 0) return c;
    return a.datatype <=> b.datatype;
  }
};

// Makes a literal, decoding the numeric value when the datatype is numeric.
Literal make_literal(std::string lexical, std::string datatype);

class Term {
 public:
  Term() = default;
  Term(Iri iri) : value_(std::move(iri)) {}              // NOLINT
  Term(BlankNode node) : value_(std::move(node)) {}      // NOLINT
  Term(Literal literal) : value_(std::move(literal)) {}  // NOLINT

  static Term iri(std::string value) { return Term(Iri{std::move(value)}); }
  static Term blank(std::string label) { return Term(BlankNode{std::move(label)}); }

  [[nodiscard]] bool is_iri() const { return std::holds_alternative<Iri>(value_); }
  [[nodiscard]] bool is_blank() const { return std::holds_alternative<BlankNode>(value_); }
  [[nodiscard]] bool is_literal() const { return std::holds_alternative<Literal>(value_); }

  [[nodiscard]] const std::string& iri_value() const { return std::get<Iri>(value_).value; }
  [[nodiscard]] const std::string& blank_label() const {
    return std::get<BlankNode>(value_).label;
  }
  [[nodiscard]] const Literal& literal() const { return std::get<Literal>(value_); }

  // IRI value, blank label or lexical form; for diagnostics and hashing.
  [[nodiscard]] const std::string& text() const;

  [[nodiscard]] bool is_iri(std::string_view v) const { return is_iri() && iri_value() == v; }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;

 private:
  std::variant<Iri, BlankNode, Literal> value_;
};

struct Triple {
  Term subject;
  Term predicate;
  Term object;
  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const;
};

class Graph {
 public:
  // Returns false when the triple is already present.
  bool add(Triple t);
  bool add(Term s, Term p, Term o) { return add(Triple{std::move(s), std::move(p), std::move(o)}); }

  [[nodiscard]] bool contains(const Triple& t) const { return index_.contains(t); }
  [[nodiscard]] const std::vector<Triple>& triples() const { return triples_; }
  [[nodiscard]] std::size_t size() const { return triples_.size(); }
  [[nodiscard]] bool empty() const { return triples_.empty(); }

  [[nodiscard]] const std::map<std::string, std::string>& prefixes() const { return prefixes_; }
  void set_prefix(std::string label, std::string ns) { prefixes_[std::move(label)] = std::move(ns); }

  // Allocates the next sequential blank node label (b0, b1, ...).
  Term fresh_blank();

  // Objects of (subject, predicate, *) in insertion order.
  [[nodiscard]] std::vector<Term> objects(const Term& subject, std::string_view predicate) const;

  // Set equality of the triples (blank labels compared literally).
  friend bool operator==(const Graph& a, const Graph& b);

 private:
  std::vector<Triple> triples_;
  std::unordered_set<Triple, TripleHash> index_;
  std::map<std::string, std::string> prefixes_;
  std::size_t next_blank_ = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, std::string token, const std::string& message);

  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] std::size_t column() const { return column_; }
  [[nodiscard]] const std::string& token() const { return token_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string token_;
};

// Parses the Turtle subset used by scenario files: @prefix / PREFIX
// directives, prefixed names and <IRIs>, the `a` keyword, `;` and `,`
// lists, anonymous `[ ... ]` and labelled `_:x` blank nodes, collections,
// and numeric, boolean, string and typed literals. Blank nodes are
// relabelled b0, b1, ... in order of first appearance.
Graph parse_turtle(std::string_view source);

// Deterministic serialization: prefixes sorted by label, subjects in order of
// first appearance, single-use blank nodes nested inline and well-formed
// rdf:Lists written as ( ... ).
std::string serialize_turtle(const Graph& g);

// Equality up to a bijective renaming of blank nodes.
bool isomorphic(const Graph& a, const Graph& b);

// Expands an rdf:List starting at head. Throws std::runtime_error when the
// chain is malformed.
std::vector<Term> read_list(const Graph& g, const Term& head);

}  // namespace owlaudit::turtle
