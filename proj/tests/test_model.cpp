#include <gtest/gtest.h>

#include <string>

#include "owlaudit/model.hpp"
#include "owlaudit/scenarios.hpp"
#include "owlaudit/turtle.hpp"
#include "support/generators.hpp"

using namespace owlaudit::model;
using owlaudit::Decimal;
using owlaudit::turtle::parse_turtle;

namespace {

const std::string kPre =
    "@prefix : <http://example.org/x#> .\n"
    "@prefix owl: <http://www.w3.org/2002/07/owl#> .\n"
    "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
    "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n";

std::string x(const std::string& local) { return "http://example.org/x#" + local; }
std::string r(const std::string& local) { return "http://example.org/retail#" + local; }

Ontology load(const std::string& body) { return extract_ontology(parse_turtle(kPre + body)); }

std::string error_of(const std::string& body) {
  try {
    load(body);
  } catch (const ExtractError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Model, ReferenceOntology) {
  Ontology o = owlaudit::scenarios::reference_scenario().ontology;
  ASSERT_TRUE(o.data_properties.contains(r("hasSpend")));
  EXPECT_TRUE(o.data_properties.at(r("hasSpend")).functional);
  ASSERT_TRUE(o.equivalences.contains(r("VIPCustomer")));
  auto expected = ClassExpr::intersection(
      {ClassExpr::named(r("Customer")),
       ClassExpr::data_some(r("hasSpend"), DatatypeRestriction::decimal({{FacetKind::MinExclusive, Decimal(1000)}}))});
  EXPECT_EQ(o.equivalences.at(r("VIPCustomer")), expected);
  ASSERT_EQ(o.disjoint_sets.size(), 1u);
  EXPECT_EQ(o.disjoint_sets[0], (std::set<std::string>{r("ActiveCustomer"), r("Blacklisted")}));
}

TEST(Model, AssertionOnly) {
  Ontology o = load(":c_a a :Customer .");
  ASSERT_EQ(o.class_assertions.size(), 1u);
  EXPECT_EQ(o.class_assertions[0].individual, x("c_a"));
  EXPECT_TRUE(o.equivalences.empty());
  EXPECT_TRUE(o.subclass_axioms.empty());
  EXPECT_TRUE(o.data_properties.empty());
}

TEST(Model, CyclicDefinitionsNameTheCycle) {
  std::string msg = error_of(":A owl:equivalentClass :B . :B owl:equivalentClass :A .");
  EXPECT_NE(msg.find("cyclic"), std::string::npos) << msg;
  EXPECT_NE(msg.find("A -> B -> A"), std::string::npos) << msg;
}

TEST(Model, RejectsOutOfFragmentInput) {
  EXPECT_NE(error_of(":p a owl:ObjectProperty .").find("object properties"), std::string::npos);
  EXPECT_NE(error_of(":p a owl:DatatypeProperty ; rdfs:domain :A .").find("rdfs:domain"), std::string::npos);
  EXPECT_NE(error_of(":A owl:unionOf ( :B :C ) .").find("unrecognized"), std::string::npos);
  EXPECT_NE(error_of(":A owl:equivalentClass [ owl:intersectionOf ( :B ) ] , [ owl:intersectionOf ( :C ) ] .")
                .find("duplicate definition"),
            std::string::npos);
}

TEST(Model, RangeViolationIsAnError) {
  std::string body =
      ":hasAge a owl:DatatypeProperty ; rdfs:range xsd:integer .\n"
      ":bob :hasAge 41.5 .";
  EXPECT_NE(error_of(body).find("hasAge"), std::string::npos);
}

TEST(Model, DataRestrictionWithFacets) {
  Ontology o = load(
      ":hasAge a owl:DatatypeProperty , owl:FunctionalProperty .\n"
      ":Adult owl:equivalentClass [ owl:intersectionOf ( :Person [ a owl:Restriction ; owl:onProperty :hasAge ;"
      " owl:someValuesFrom [ a rdfs:Datatype ; owl:onDatatype xsd:integer ;"
      " owl:withRestrictions ( [ xsd:minInclusive 18 ] [ xsd:maxExclusive 130 ] ) ] ] ) ] .");
  const ClassExpr& def = o.equivalences.at(x("Adult"));
  ASSERT_TRUE(def.is(ClassExpr::Kind::Intersection));
  const ClassExpr& some = def.operands()[1];
  ASSERT_TRUE(some.is(ClassExpr::Kind::DataSome));
  EXPECT_TRUE(some.filler().integral());
  EXPECT_EQ(some.filler().facets.size(), 2u);
}

TEST(Model, NnfExamples) {
  auto a = ClassExpr::named(x("A"));
  auto b = ClassExpr::named(x("B"));
  EXPECT_EQ(nnf(ClassExpr::negation(ClassExpr::negation(a))), a);
  EXPECT_EQ(nnf(ClassExpr::negation(ClassExpr::intersection({a, b}))),
            ClassExpr::union_of({ClassExpr::negation(a), ClassExpr::negation(b)}));
  auto vip = ClassExpr::named(r("VIPCustomer"));
  auto active = ClassExpr::named(r("ActiveCustomer"));
  EXPECT_EQ(nnf(ClassExpr::negation(ClassExpr::intersection({vip, active}))),
            ClassExpr::union_of({ClassExpr::negation(vip), ClassExpr::negation(active)}));
}

TEST(ModelProperty, NnfIsIdempotentAndKeepsSignature) {
  owlaudit::testing::Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    ClassExpr e = owlaudit::testing::random_class_expr(rng, 4);
    ClassExpr n = nnf(e);
    ASSERT_TRUE(owlaudit::testing::in_nnf(n)) << e.to_string();
    ASSERT_EQ(nnf(n), n) << e.to_string();
    std::set<std::string> c1, p1, c2, p2;
    collect_signature(e, c1, p1);
    collect_signature(n, c2, p2);
    ASSERT_EQ(c1, c2);
    ASSERT_EQ(p1, p2);
  }
}

TEST(Model, ExtractionIsDeterministic) {
  std::string text = owlaudit::scenarios::reference_scenario().ontology_text;
  EXPECT_EQ(extract_ontology(parse_turtle(text)), extract_ontology(parse_turtle(text)));
}
