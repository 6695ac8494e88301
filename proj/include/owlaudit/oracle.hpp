#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "owlaudit/model.hpp"

namespace owlaudit::oracle {

enum class Answer { Yes, No, Unknown };

std::string_view to_string(Answer a);
// Case-insensitive; returns nullopt for anything outside {yes, no, unknown}.
std::optional<Answer> parse_answer_value(std::string_view s);

struct Query {
  std::string id;          // e.g. "gen24.c_a_24.vip"
  std::string individual;  // absolute IRI
  std::string cls;         // absolute IRI
  std::string question;
  // Hand-authored label, when the scenario carries one.
  std::optional<Answer> expected;

  friend bool operator==(const Query&, const Query&) = default;
};

struct Verdict {
  Answer answer = Answer::Unknown;
  bool pos_consistent = false;
  bool neg_consistent = false;
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

class KbInconsistentError : public std::runtime_error {
 public:
  explicit KbInconsistentError(const std::string& query_id)
      : std::runtime_error("knowledge base is inconsistent (both trial insertions fail) for query " + query_id),
        query_id_(query_id) {}
  [[nodiscard]] const std::string& query_id() const { return query_id_; }

 private:
  std::string query_id_;
};

// Trial insertion: checks the ontology extended with C(x) and with not C(x);
// an inconsistent extension entails the opposite.
Verdict classify(const model::Ontology& o, const Query& q);

struct AuditEntry {
  Query query;
  Verdict verdict;
};

struct AuditResult {
  std::vector<AuditEntry> entries;  // ordered by query id
  std::chrono::microseconds runtime{0};
};

AuditResult audit_scenario(const model::Ontology& o, const std::vector<Query>& queries);

// Gold file: {scenario_id, reasoner, queries: [{id, individual, class, gold,
// pos_consistent, neg_consistent}]}.
inline constexpr std::string_view kReasonerName = "builtin-fragment";
nlohmann::json gold_to_json(const std::string& scenario_id, const AuditResult& audit);

struct GoldRecord {
  std::string id;
  std::string individual;
  std::string cls;
  Answer gold = Answer::Unknown;
  bool pos_consistent = false;
  bool neg_consistent = false;
};

std::vector<GoldRecord> gold_from_json(const nlohmann::json& j);

}  // namespace owlaudit::oracle
