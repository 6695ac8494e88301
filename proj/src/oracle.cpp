#include "owlaudit/oracle.hpp"

#include <algorithm>
#include <cctype>

#include "owlaudit/reasoner.hpp"

namespace owlaudit::oracle {

using model::ClassExpr;

std::string_view to_string(Answer a) {
  switch (a) {
    case Answer::Yes: return "yes";
    case Answer::No: return "no";
    case Answer::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<Answer> parse_answer_value(std::string_view s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "yes") return Answer::Yes;
  if (lower == "no") return Answer::No;
  if (lower == "unknown") return Answer::Unknown;
  return std::nullopt;
}

Verdict classify(const model::Ontology& o, const Query& q) {
  model::Ontology plus = o;
  plus.class_assertions.push_back({q.individual, ClassExpr::named(q.cls)});

  // The negated claim goes in as the NNF of the negated definition (one
  // unfolding step), not as an opaque complement token.
  const ClassExpr* def = o.definition(q.cls);
  ClassExpr negated = model::nnf(ClassExpr::negation(def ? *def : ClassExpr::named(q.cls)));
  model::Ontology minus = o;
  minus.class_assertions.push_back({q.individual, std::move(negated)});

  Verdict v;
  v.pos_consistent = reasoner::is_consistent(plus);
  v.neg_consistent = reasoner::is_consistent(minus);
  if (v.pos_consistent && !v.neg_consistent) {
    v.answer = Answer::Yes;
  } else if (!v.pos_consistent && v.neg_consistent) {
    v.answer = Answer::No;
  } else if (v.pos_consistent && v.neg_consistent) {
    v.answer = Answer::Unknown;
  } else {
    throw KbInconsistentError(q.id);
  }
  return v;
}

AuditResult audit_scenario(const model::Ontology& o, const std::vector<Query>& queries) {
  auto start = std::chrono::steady_clock::now();
  AuditResult result;
  std::vector<const Query*> sorted;
  sorted.reserve(queries.size());
  for (const auto& q : queries) sorted.push_back(&q);
  std::stable_sort(sorted.begin(), sorted.end(), [](const Query* a, const Query* b) { return a->id < b->id; });
  for (const Query* q : sorted) result.entries.push_back({*q, classify(o, *q)});
  result.runtime = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
  return result;
}

nlohmann::json gold_to_json(const std::string& scenario_id, const AuditResult& audit) {
  nlohmann::json qs = nlohmann::json::array();
  for (const auto& e : audit.entries) {
    qs.push_back({{"id", e.query.id},
                  {"individual", e.query.individual},
                  {"class", e.query.cls},
                  {"gold", std::string(to_string(e.verdict.answer))},
                  {"pos_consistent", e.verdict.pos_consistent},
                  {"neg_consistent", e.verdict.neg_consistent}});
  }
  return {{"scenario_id", scenario_id}, {"reasoner", std::string(kReasonerName)}, {"queries", std::move(qs)}};
}

std::vector<GoldRecord> gold_from_json(const nlohmann::json& j) {
  std::vector<GoldRecord> out;
  for (const auto& q : j.at("queries")) {
    auto gold = parse_answer_value(q.at("gold").get<std::string>());
    if (!gold) throw std::runtime_error("gold file has invalid answer for " + q.at("id").get<std::string>());
    out.push_back({q.at("id").get<std::string>(), q.at("individual").get<std::string>(),
                   q.at("class").get<std::string>(), *gold, q.at("pos_consistent").get<bool>(),
                   q.at("neg_consistent").get<bool>()});
  }
  return out;
}

}  // namespace owlaudit::oracle
