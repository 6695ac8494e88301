#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "owlaudit/decimal.hpp"
#include "owlaudit/model.hpp"
#include "owlaudit/turtle.hpp"

namespace owlaudit::reasoner {

class ReasonerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Bound {
  Decimal value;
  bool inclusive = false;
  friend bool operator==(const Bound&, const Bound&) = default;
};

// Convex set of numbers, optionally restricted to the integers. The
// representation is normalized: the tightest bound wins when facets stack.
struct FacetInterval {
  std::optional<Bound> lower;
  std::optional<Bound> upper;
  bool integral = false;

  static FacetInterval unbounded(bool integral = false) { return {std::nullopt, std::nullopt, integral}; }
  static FacetInterval from_restriction(const model::DatatypeRestriction& dr);

  [[nodiscard]] bool contains(const Decimal& v) const;
  [[nodiscard]] FacetInterval intersect(const FacetInterval& other) const;
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const FacetInterval&, const FacetInterval&) = default;
};

// True iff no number (no integer, for integral intervals) satisfies the bounds.
bool interval_empty(const FacetInterval& interval);

// True iff some value lies in `required` and outside every `excluded` set.
// Exact over decimals: candidates are the interval endpoints plus one integer
// and one non-integer point from every open segment between endpoints.
bool has_witness(const FacetInterval& required, std::span<const FacetInterval> excluded);

// True iff the literal's value satisfies every facet of dr. Integer literals
// are compared as decimals. Throws ReasonerError when the literal is not
// numeric.
bool membership_value(const turtle::Literal& v, const model::DatatypeRestriction& dr);

// Consistency of the ontology: ground completion over named individuals with
// lazy unfolding of definitions in both directions, exhaustive branching over
// unions introduced by negation normal form, and interval reasoning for the
// data constraints (functional closure, ranges, facets).
bool is_consistent(const model::Ontology& o);

// Per-check statistics, useful for tests and for the audit log.
struct ConsistencyTrace {
  bool consistent = false;
  std::size_t branches_explored = 0;
  std::string first_clash;  // description of the first clash encountered
};

ConsistencyTrace check_consistency(const model::Ontology& o);

}  // namespace owlaudit::reasoner
