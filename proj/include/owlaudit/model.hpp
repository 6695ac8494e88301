#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "owlaudit/decimal.hpp"
#include "owlaudit/turtle.hpp"

namespace owlaudit::model {

enum class FacetKind { MinExclusive, MinInclusive, MaxExclusive, MaxInclusive };

std::string_view facet_local_name(FacetKind kind);

struct Facet {
  FacetKind kind;
  Decimal value;
  friend bool operator==(const Facet&, const Facet&) = default;
  friend auto operator<=>(const Facet&, const Facet&) = default;
};

// A numeric datatype (xsd:decimal or xsd:integer) narrowed by facets.
struct DatatypeRestriction {
  std::string base;
  std::vector<Facet> facets;

  static DatatypeRestriction decimal(std::vector<Facet> facets = {});
  static DatatypeRestriction integer(std::vector<Facet> facets = {});

  [[nodiscard]] bool integral() const;
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const DatatypeRestriction&, const DatatypeRestriction&) = default;
  friend auto operator<=>(const DatatypeRestriction&, const DatatypeRestriction&) = default;
};

// Class expressions of the supported fragment. Union and Not never come out of
// parsing; they appear through negation normal form and trial insertion.
class ClassExpr {
 public:
  enum class Kind { Named, Intersection, Union, DataSome, Not };

  static ClassExpr named(std::string iri);
  static ClassExpr intersection(std::vector<ClassExpr> operands);
  static ClassExpr union_of(std::vector<ClassExpr> operands);
  static ClassExpr data_some(std::string property, DatatypeRestriction filler);
  static ClassExpr negation(ClassExpr operand);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] bool is(Kind k) const { return kind_ == k; }
  // Class IRI for Named, property IRI for DataSome.
  [[nodiscard]] const std::string& iri() const { return iri_; }
  [[nodiscard]] const std::vector<ClassExpr>& operands() const { return operands_; }
  [[nodiscard]] const ClassExpr& operand() const { return operands_.front(); }
  [[nodiscard]] const DatatypeRestriction& filler() const { return filler_; }

  // Compact Manchester-like rendering, e.g. "Customer and (hasSpend some decimal[> 1000])".
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const ClassExpr& a, const ClassExpr& b);
  friend std::strong_ordering operator<=>(const ClassExpr& a, const ClassExpr& b);

 private:
  Kind kind_ = Kind::Named;
  std::string iri_;
  std::vector<ClassExpr> operands_;
  DatatypeRestriction filler_;
};

// Negation normal form: negation sits only directly above Named or DataSome;
// a negated intersection becomes a Union of negated branches.
ClassExpr nnf(const ClassExpr& e);

// Named classes and properties mentioned anywhere in e.
void collect_signature(const ClassExpr& e, std::set<std::string>& classes,
                       std::set<std::string>& properties);

struct DataProperty {
  bool functional = false;
  std::optional<DatatypeRestriction> range;
  friend bool operator==(const DataProperty&, const DataProperty&) = default;
};

struct SubClassAxiom {
  ClassExpr sub;
  ClassExpr super;
  friend bool operator==(const SubClassAxiom&, const SubClassAxiom&) = default;
};

struct ClassAssertion {
  std::string individual;
  ClassExpr type;
  friend bool operator==(const ClassAssertion&, const ClassAssertion&) = default;
};

struct DataAssertion {
  std::string individual;
  std::string property;
  turtle::Literal value;
  friend bool operator==(const DataAssertion&, const DataAssertion&) = default;
};

struct Individual {
  std::string iri;
  friend auto operator<=>(const Individual&, const Individual&) = default;
};

struct Ontology {
  std::set<std::string> classes;
  std::map<std::string, DataProperty> data_properties;
  std::map<std::string, ClassExpr> equivalences;
  std::vector<SubClassAxiom> subclass_axioms;
  std::vector<std::set<std::string>> disjoint_sets;
  std::vector<ClassAssertion> class_assertions;
  std::vector<DataAssertion> data_assertions;
  // Individuals declared with owl:NamedIndividual but otherwise unasserted.
  std::set<std::string> declared_individuals;

  [[nodiscard]] std::set<Individual> individuals() const;
  [[nodiscard]] const ClassExpr* definition(const std::string& cls) const;
  [[nodiscard]] bool mentions_individual(const std::string& iri) const;
  [[nodiscard]] bool mentions_class(const std::string& iri) const;

  friend bool operator==(const Ontology&, const Ontology&) = default;
};

class ExtractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lifts a parsed graph into the fragment. Unsupported OWL vocabulary, object
// properties, cyclic or duplicate definitions and data assertions outside a
// declared range raise ExtractError.
Ontology extract_ontology(const turtle::Graph& g);

// Checks the definition graph for cycles; throws ExtractError naming the cycle.
void check_acyclic(const Ontology& o);

}  // namespace owlaudit::model
