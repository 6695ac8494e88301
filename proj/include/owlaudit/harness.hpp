#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "owlaudit/oracle.hpp"
#include "owlaudit/scenarios.hpp"

namespace owlaudit::harness {

using oracle::Answer;

enum class Mode { Direct, NaiveRepair, CxRepairHint, CxRepairVerdictOnly };

inline constexpr std::array<Mode, 4> kAllModes = {Mode::Direct, Mode::NaiveRepair, Mode::CxRepairHint,
                                                  Mode::CxRepairVerdictOnly};

std::string_view to_string(Mode m);
// Accepts canonical names plus the short aliases naive, hint, cx_v1,
// verdict_only, cx_v3.
Mode parse_mode(std::string_view s);

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParsedAnswer {
  Answer answer;
  std::string reason;
  friend bool operator==(const ParsedAnswer&, const ParsedAnswer&) = default;
};

struct MalformedAnswer {
  std::string raw;
  friend bool operator==(const MalformedAnswer&, const MalformedAnswer&) = default;
};

using ModelAnswer = std::variant<ParsedAnswer, MalformedAnswer>;

inline bool is_malformed(const ModelAnswer& a) { return std::holds_alternative<MalformedAnswer>(a); }
bool is_correct(const ModelAnswer& a, Answer gold);
// "yes" / "no" / "unknown" / "malformed".
std::string answer_label(const ModelAnswer& a);

// First syntactically valid JSON object in raw; it must carry an "answer" key
// whose value is yes/no/unknown (any case). Everything else is Malformed.
ModelAnswer parse_answer(std::string_view raw);

// --- prompts ------------------------------------------------------------------

inline constexpr std::string_view kInitialTemplateVersion = "initial-v1";
inline constexpr std::string_view kNaiveRetry = "Your answer is incorrect. Reconsider.";
inline constexpr std::string_view kOwaHint = "Consider OWA: missing triples are not negations.";

std::string_view initial_template();
std::string initial_template_hash();
std::string build_initial_prompt(const scenarios::Scenario& s, const oracle::Query& q);

// Follow-up after a wrong answer. Throws HarnessError for Mode::Direct.
std::string build_followup(Mode mode, Answer gold, const ModelAnswer& given);

// --- transcripts -----------------------------------------------------------------

struct Message {
  std::string role;
  std::string content;
};

struct Round {
  std::size_t index = 0;  // 0 is the initial prompt
  std::string prompt_text;
  std::string raw_response;
  ModelAnswer parsed = MalformedAnswer{};
  double latency_ms = 0.0;
  std::string timestamp;
};

struct Transcript {
  std::string query_id;
  std::string scenario_id;
  std::string category;
  Mode mode = Mode::Direct;
  Answer gold = Answer::Unknown;
  std::vector<Round> rounds;
  ModelAnswer final = MalformedAnswer{};
  std::size_t rounds_used = 0;
  std::optional<std::string> error;  // transport failure after retries

  [[nodiscard]] bool correct() const { return is_correct(final, gold); }
  // 1-based round of the first correct answer, if any.
  [[nodiscard]] std::optional<std::size_t> rounds_until_correct() const;
};

nlohmann::json to_json(const ModelAnswer& a);
ModelAnswer model_answer_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Transcript& t);
Transcript transcript_from_json(const nlohmann::json& j);

// JSON Lines: one transcript per line.
std::string to_jsonl(const std::vector<Transcript>& ts);
std::vector<Transcript> read_jsonl(std::string_view text);

// --- backends --------------------------------------------------------------------

struct ChatRequest {
  std::string query_id;
  std::size_t round_index = 0;
  Mode mode = Mode::Direct;
  std::vector<Message> messages;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // Returns the raw assistant text. Throws TransportError when the backend
  // cannot produce a response.
  virtual std::string complete(const ChatRequest& request) = 0;
};

using BackendFactory = std::function<std::unique_ptr<Backend>()>;

// --- running -----------------------------------------------------------------------

struct RunOptions {
  std::size_t budget = 3;  // follow-ups after the initial prompt
  std::size_t parallelism = 1;
  std::uint64_t seed = 7;
  std::string followup_role = "user";
};

// One prompt, then up to `budget` follow-ups while the latest answer is wrong.
// Direct mode never sends follow-ups.
Transcript run_query(const scenarios::Scenario& s, const oracle::Query& q, Answer gold, Mode mode, Backend& backend,
                     const RunOptions& options = {});

struct BatchResult {
  std::vector<Transcript> transcripts;  // sorted by query id
  nlohmann::json manifest;
};

// Gold answers keyed by query id, taken from each scenario's gold.json.
// Throws HarnessError when a scenario has not been audited.
std::map<std::string, Answer> gold_map(const std::vector<scenarios::Scenario>& scenarios);

BatchResult run_batch(const std::vector<scenarios::Scenario>& scenarios, const std::map<std::string, Answer>& golds,
                      Mode mode, const BackendFactory& factory, const RunOptions& options,
                      const nlohmann::json& backend_description = nlohmann::json::object());

}  // namespace owlaudit::harness
