#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "owlaudit/reasoner.hpp"
#include "owlaudit/scenarios.hpp"
#include "owlaudit/turtle.hpp"
#include "support/generators.hpp"

using namespace owlaudit::reasoner;
using namespace owlaudit::model;
using owlaudit::Decimal;
using owlaudit::turtle::make_literal;
namespace ns = owlaudit::turtle::ns;

namespace {

std::string r(const std::string& local) { return "http://example.org/retail#" + local; }

Ontology reference() { return owlaudit::scenarios::reference_scenario().ontology; }

FacetInterval interval(std::vector<Facet> facets, bool integral = false) {
  return FacetInterval::from_restriction(integral ? DatatypeRestriction::integer(std::move(facets))
                                                  : DatatypeRestriction::decimal(std::move(facets)));
}

const DatatypeRestriction kAbove1000 = DatatypeRestriction::decimal({{FacetKind::MinExclusive, Decimal(1000)}});

}  // namespace

TEST(Reasoner, EmptyOntologyIsConsistent) { EXPECT_TRUE(is_consistent(Ontology{})); }

TEST(Reasoner, ReferenceOntologyIsConsistent) { EXPECT_TRUE(is_consistent(reference())); }

TEST(Reasoner, FunctionalClosureClash) {
  Ontology o = reference();
  o.class_assertions.push_back({r("c_a"), ClassExpr::named(r("ActiveVIP"))});
  auto trace = check_consistency(o);
  EXPECT_FALSE(trace.consistent);
  EXPECT_FALSE(trace.first_clash.empty());
}

TEST(Reasoner, DisjointnessClash) {
  Ontology o;
  o.classes = {r("ActiveCustomer"), r("Blacklisted")};
  o.disjoint_sets.push_back({r("ActiveCustomer"), r("Blacklisted")});
  o.class_assertions.push_back({r("x"), ClassExpr::named(r("ActiveCustomer"))});
  EXPECT_TRUE(is_consistent(o));
  o.class_assertions.push_back({r("x"), ClassExpr::named(r("Blacklisted"))});
  EXPECT_FALSE(is_consistent(o));
}

TEST(Reasoner, NegatedDefinitionClashes) {
  Ontology o = reference();
  o.class_assertions.push_back({r("c_b"), ClassExpr::negation(ClassExpr::named(r("ActiveVIP")))});
  auto trace = check_consistency(o);
  EXPECT_FALSE(trace.consistent);
  EXPECT_GE(trace.branches_explored, 1u);
  EXPECT_FALSE(trace.first_clash.empty());
}

TEST(Reasoner, ComplementClash) {
  Ontology o;
  o.classes = {r("A")};
  o.class_assertions.push_back({r("x"), ClassExpr::named(r("A"))});
  o.class_assertions.push_back({r("x"), ClassExpr::negation(ClassExpr::named(r("A")))});
  EXPECT_FALSE(is_consistent(o));
}

TEST(Reasoner, TwoFunctionalValues) {
  Ontology o = reference();
  o.data_assertions.push_back({r("c_a"), r("hasSpend"), make_literal("600", ns::xsd("integer"))});
  EXPECT_FALSE(is_consistent(o));
  Ontology same = reference();
  same.data_assertions.push_back({r("c_a"), r("hasSpend"), make_literal("500.0", ns::xsd("decimal"))});
  EXPECT_TRUE(is_consistent(same));
}

TEST(Reasoner, NegatedSomeValuesAgainstAssertedValue) {
  Ontology o = reference();
  o.class_assertions.push_back({r("c_b"), ClassExpr::negation(ClassExpr::data_some(r("hasSpend"), kAbove1000))});
  EXPECT_FALSE(is_consistent(o));
  Ontology fine = reference();
  fine.class_assertions.push_back({r("c_a"), ClassExpr::negation(ClassExpr::data_some(r("hasSpend"), kAbove1000))});
  EXPECT_TRUE(is_consistent(fine));
}

TEST(Reasoner, RestrictionDisjointFromRange) {
  Ontology o;
  o.data_properties[r("p")] = DataProperty{false, DatatypeRestriction::decimal({{FacetKind::MaxInclusive, Decimal(10)}})};
  o.class_assertions.push_back({r("x"), ClassExpr::data_some(r("p"), kAbove1000)});
  EXPECT_FALSE(is_consistent(o));
}

TEST(Reasoner, OpenWorldWitnessForNonFunctionalProperty) {
  Ontology o;
  o.data_properties[r("p")] = DataProperty{};
  o.data_assertions.push_back({r("x"), r("p"), make_literal("5", ns::xsd("integer"))});
  o.class_assertions.push_back({r("x"), ClassExpr::data_some(r("p"), kAbove1000)});
  EXPECT_TRUE(is_consistent(o));
}

TEST(Reasoner, MembershipValue) {
  EXPECT_TRUE(membership_value(make_literal("1500", ns::xsd("integer")), kAbove1000));
  EXPECT_FALSE(membership_value(make_literal("1000", ns::xsd("integer")), kAbove1000));
  EXPECT_FALSE(membership_value(make_literal("500", ns::xsd("integer")), kAbove1000));
  EXPECT_TRUE(membership_value(make_literal("1000.0000001", ns::xsd("decimal")), kAbove1000));
  EXPECT_THROW(membership_value(make_literal("x", ns::xsd("string")), kAbove1000), ReasonerError);
}

TEST(Reasoner, IntervalEmptiness) {
  EXPECT_FALSE(interval_empty(interval({{FacetKind::MinExclusive, Decimal(1000)}})));
  EXPECT_TRUE(interval_empty(
      interval({{FacetKind::MinExclusive, Decimal(1000)}, {FacetKind::MaxExclusive, Decimal(1000)}})));
  EXPECT_FALSE(interval_empty(
      interval({{FacetKind::MinInclusive, Decimal(1000)}, {FacetKind::MaxInclusive, Decimal(1000)}})));
  EXPECT_TRUE(interval_empty(interval(
      {{FacetKind::MinExclusive, Decimal(1)}, {FacetKind::MaxExclusive, Decimal(2)}}, true)));
  EXPECT_FALSE(interval_empty(interval(
      {{FacetKind::MinExclusive, Decimal(1)}, {FacetKind::MaxExclusive, Decimal(2)}}, false)));
}

TEST(Reasoner, FacetsStackToTheTightestBound) {
  auto i = interval({{FacetKind::MinExclusive, Decimal(5)},
                     {FacetKind::MinInclusive, Decimal(5)},
                     {FacetKind::MinInclusive, Decimal(3)},
                     {FacetKind::MaxInclusive, Decimal(9)},
                     {FacetKind::MaxExclusive, Decimal(9)}});
  ASSERT_TRUE(i.lower && i.upper);
  EXPECT_EQ(i.lower->value, Decimal(5));
  EXPECT_FALSE(i.lower->inclusive);
  EXPECT_EQ(i.upper->value, Decimal(9));
  EXPECT_FALSE(i.upper->inclusive);
  EXPECT_TRUE(i.contains(Decimal::parse("5.0001")));
  EXPECT_FALSE(i.contains(Decimal(5)));
  EXPECT_EQ(i.intersect(FacetInterval::unbounded()), i);
}

TEST(Reasoner, HasWitness) {
  auto above = interval({{FacetKind::MinExclusive, Decimal(1000)}});
  auto at_most = interval({{FacetKind::MaxInclusive, Decimal(1000)}});
  auto upto_2000 = interval({{FacetKind::MaxInclusive, Decimal(2000)}});
  std::vector<FacetInterval> none;
  EXPECT_TRUE(has_witness(above, none));
  std::vector<FacetInterval> ex1{upto_2000};
  EXPECT_TRUE(has_witness(above, ex1));
  std::vector<FacetInterval> ex2{upto_2000, interval({{FacetKind::MinExclusive, Decimal(2000)}})};
  EXPECT_FALSE(has_witness(above, ex2));
  std::vector<FacetInterval> ex3{at_most};
  EXPECT_TRUE(has_witness(FacetInterval::unbounded(), ex3));
  // Integers strictly between 1 and 3 other than 2: none.
  auto ints = interval({{FacetKind::MinExclusive, Decimal(1)}, {FacetKind::MaxExclusive, Decimal(3)}}, true);
  std::vector<FacetInterval> two{interval({{FacetKind::MinInclusive, Decimal(2)}, {FacetKind::MaxInclusive, Decimal(2)}})};
  EXPECT_FALSE(has_witness(ints, two));
  // Decimals in the same gap survive.
  auto decs = interval({{FacetKind::MinExclusive, Decimal(1)}, {FacetKind::MaxExclusive, Decimal(3)}});
  EXPECT_TRUE(has_witness(decs, two));
}

TEST(ReasonerProperty, MonotoneInconsistency) {
  owlaudit::testing::Rng rng(4242);
  std::size_t inconsistent_seen = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Ontology o = reference();
    bool was_inconsistent = false;
    for (int step = 0; step < 6; ++step) {
      owlaudit::testing::mutate(o, rng);
      bool consistent = is_consistent(o);
      ASSERT_FALSE(was_inconsistent && consistent) << "trial " << trial << " step " << step;
      was_inconsistent = was_inconsistent || !consistent;
    }
    inconsistent_seen += was_inconsistent;
  }
  EXPECT_GT(inconsistent_seen, 50u);
}
