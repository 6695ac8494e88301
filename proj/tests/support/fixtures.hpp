#pragma once

#include <map>
#include <string>
#include <vector>

#include "owlaudit/backends.hpp"
#include "owlaudit/harness.hpp"
#include "owlaudit/oracle.hpp"
#include "owlaudit/scenarios.hpp"

namespace owlaudit::testing {

inline std::map<std::string, oracle::Answer> audit_golds(const std::vector<scenarios::Scenario>& ss) {
  std::map<std::string, oracle::Answer> out;
  for (const auto& s : ss)
    for (const auto& e : oracle::audit_scenario(s.ontology, s.queries).entries) out[e.query.id] = e.verdict.answer;
  return out;
}

// Expansion set with gold attached, as the audit step would leave it.
inline std::vector<scenarios::Scenario> audited_expansion(const scenarios::ExpansionConfig& cfg = {}) {
  auto ss = scenarios::generate_expansion(cfg);
  for (auto& s : ss) s.gold = oracle::gold_from_json(oracle::gold_to_json(s.id, oracle::audit_scenario(s.ontology, s.queries)));
  return ss;
}

// Default scripted policy: hedges on every entailed "no", never malformed.
inline harness::BackendConfig scripted(harness::ScriptedPolicy policy = {}) {
  harness::BackendConfig cfg;
  cfg.kind = harness::BackendKind::ScriptedOvercautious;
  cfg.policy = policy;
  return cfg;
}

// Returns canned responses in order; throws TransportError once exhausted.
class CannedBackend : public harness::Backend {
 public:
  explicit CannedBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const harness::ChatRequest& req) override {
    requests.push_back(req);
    if (next_ >= replies_.size()) throw harness::TransportError("connection reset");
    return replies_[next_++];
  }
  std::vector<harness::ChatRequest> requests;

 private:
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
};

// Synthetic transcript: `rounds` rounds, the last answering `final_answer`.
inline harness::Transcript transcript(const std::string& id, oracle::Answer gold, const harness::ModelAnswer& final_answer,
                                      std::size_t rounds = 1, double latency_ms = 100.0,
                                      const std::string& category = "mixed") {
  harness::Transcript t;
  t.query_id = id;
  t.scenario_id = id.substr(0, id.find('.'));
  t.category = category;
  t.gold = gold;
  for (std::size_t i = 0; i < rounds; ++i) {
    harness::Round r;
    r.index = i;
    r.latency_ms = latency_ms;
    r.parsed = i + 1 == rounds ? final_answer : harness::ModelAnswer(harness::ParsedAnswer{oracle::Answer::Unknown, ""});
    t.rounds.push_back(r);
  }
  t.rounds_used = rounds;
  t.final = final_answer;
  return t;
}

}  // namespace owlaudit::testing
