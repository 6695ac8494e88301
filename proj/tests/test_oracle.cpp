#include <gtest/gtest.h>

#include <string>

#include "owlaudit/oracle.hpp"
#include "owlaudit/scenarios.hpp"
#include "owlaudit/turtle.hpp"

using namespace owlaudit::oracle;
using owlaudit::model::ClassExpr;
using owlaudit::model::Ontology;

namespace {

std::string r(const std::string& local) { return "http://example.org/retail#" + local; }

Query query(const std::string& ind, const std::string& cls) { return {ind + "." + cls, r(ind), r(cls), "", {}}; }

Ontology reference() { return owlaudit::scenarios::reference_scenario().ontology; }

}  // namespace

TEST(Oracle, ReferenceAnswers) {
  Ontology o = reference();
  EXPECT_EQ(classify(o, query("c_a", "ActiveVIP")).answer, Answer::No);
  EXPECT_EQ(classify(o, query("c_b", "ActiveVIP")).answer, Answer::Yes);
  EXPECT_EQ(classify(o, query("c_a", "Blacklisted")).answer, Answer::No);
  EXPECT_EQ(classify(o, query("c_a", "VIPCustomer")).answer, Answer::No);
  EXPECT_EQ(classify(o, query("c_b", "VIPCustomer")).answer, Answer::Yes);
}

TEST(Oracle, VerdictFlags) {
  Verdict v = classify(reference(), query("c_a", "ActiveVIP"));
  EXPECT_FALSE(v.pos_consistent);
  EXPECT_TRUE(v.neg_consistent);
  Verdict y = classify(reference(), query("c_b", "ActiveVIP"));
  EXPECT_TRUE(y.pos_consistent);
  EXPECT_FALSE(y.neg_consistent);
}

TEST(Oracle, SpendlessCustomerIsUnknown) {
  Ontology o = reference();
  o.class_assertions.push_back({r("c_c"), ClassExpr::named(r("Customer"))});
  Verdict v = classify(o, query("c_c", "VIPCustomer"));
  EXPECT_EQ(v.answer, Answer::Unknown);
  EXPECT_TRUE(v.pos_consistent && v.neg_consistent);
}

TEST(Oracle, InconsistentKbThrows) {
  Ontology o = reference();
  o.class_assertions.push_back({r("c_a"), ClassExpr::named(r("Blacklisted"))});
  try {
    classify(o, query("c_b", "VIPCustomer"));
    FAIL();
  } catch (const KbInconsistentError& e) {
    EXPECT_EQ(e.query_id(), "c_b.VIPCustomer");
  }
  EXPECT_THROW(audit_scenario(o, {query("c_a", "VIPCustomer")}), KbInconsistentError);
}

TEST(Oracle, AuditOrdersByIdAndHandlesEmpty) {
  auto s = owlaudit::scenarios::reference_scenario();
  auto audit = audit_scenario(s.ontology, s.queries);
  ASSERT_EQ(audit.entries.size(), 6u);
  for (std::size_t i = 1; i < audit.entries.size(); ++i)
    EXPECT_LT(audit.entries[i - 1].query.id, audit.entries[i].query.id);
  std::size_t nos = 0;
  for (const auto& e : audit.entries) {
    nos += e.verdict.answer == Answer::No;
    ASSERT_TRUE(e.query.expected.has_value());
    EXPECT_EQ(e.verdict.answer, *e.query.expected) << e.query.id;
  }
  EXPECT_GE(nos, 2u);
  EXPECT_TRUE(audit_scenario(s.ontology, {}).entries.empty());
}

TEST(Oracle, GoldJsonRoundTrip) {
  auto s = owlaudit::scenarios::reference_scenario();
  auto j = gold_to_json(s.id, audit_scenario(s.ontology, s.queries));
  EXPECT_EQ(j.at("reasoner"), std::string(kReasonerName));
  auto records = gold_from_json(j);
  ASSERT_EQ(records.size(), 6u);
  EXPECT_EQ(records[0].id, "retail_ref.c_a.activevip");
  EXPECT_EQ(records[0].gold, Answer::No);
  EXPECT_EQ(records[0].cls, r("ActiveVIP"));
}

TEST(Oracle, GoldStableAcrossReserialization) {
  auto s = owlaudit::scenarios::reference_scenario();
  auto text = owlaudit::turtle::serialize_turtle(owlaudit::turtle::parse_turtle(s.ontology_text));
  auto again = owlaudit::model::extract_ontology(owlaudit::turtle::parse_turtle(text));
  auto a = audit_scenario(s.ontology, s.queries);
  auto b = audit_scenario(again, s.queries);
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].verdict, b.entries[i].verdict);
}

TEST(Oracle, AnswerValues) {
  EXPECT_EQ(parse_answer_value("YES"), Answer::Yes);
  EXPECT_EQ(parse_answer_value("Unknown"), Answer::Unknown);
  EXPECT_FALSE(parse_answer_value("maybe").has_value());
  EXPECT_EQ(to_string(Answer::No), "no");
}
