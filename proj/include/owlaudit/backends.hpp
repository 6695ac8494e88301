#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "json.hpp"

#include "owlaudit/harness.hpp"

namespace owlaudit::harness {

enum class BackendKind { HttpChat, Replay, ScriptedOvercautious };

std::string_view to_string(BackendKind k);
BackendKind parse_backend_kind(std::string_view s);

// How the scripted bot reacts to one kind of follow-up after a wrong answer.
struct WrapperPolicy {
  enum class Kind { KeepHedging, Capitulate, CapitulateAfterN, Stochastic };
  Kind kind = Kind::KeepHedging;
  std::size_t after_n = 1;  // CapitulateAfterN: follow-ups needed before giving in
  double rate = 0.0;        // Stochastic: per-follow-up probability of giving in

  [[nodiscard]] nlohmann::json to_json() const;
  static WrapperPolicy from_json(const nlohmann::json& j);
};

struct ScriptedPolicy {
  double initial_hedge_rate = 1.0;  // answers "unknown" when the truth is "no"
  double malformed_rate = 0.01;     // first-round responses cut off mid-JSON
  WrapperPolicy naive{WrapperPolicy::Kind::Stochastic, 1, 0.66};
  WrapperPolicy hint{WrapperPolicy::Kind::Stochastic, 1, 0.16};
  WrapperPolicy verdict{WrapperPolicy::Kind::CapitulateAfterN, 1, 0.0};

  [[nodiscard]] nlohmann::json to_json() const;
  static ScriptedPolicy from_json(const nlohmann::json& j);
};

struct BackendConfig {
  BackendKind kind = BackendKind::ScriptedOvercautious;

  // http_chat
  std::string endpoint;     // full URL of the chat-completions route
  std::string model;
  std::string api_key_env;  // name of the environment variable holding the key
  std::uint32_t timeout_ms = 60000;
  std::uint32_t max_retries = 4;
  std::uint32_t initial_backoff_ms = 500;
  std::uint32_t max_backoff_ms = 30000;
  nlohmann::json params = nlohmann::json::object();  // merged into every request body

  // replay
  std::filesystem::path replay_file;

  // scripted_overcautious
  ScriptedPolicy policy;

  // Throws HarnessError when required fields for the kind are missing.
  void validate() const;
  [[nodiscard]] nlohmann::json to_json() const;
  // Relative replay paths resolve against base_dir.
  static BackendConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  [[nodiscard]] std::string hash() const;
};

BackendConfig load_backend_config(const std::filesystem::path& path);

// One backend instance per call. The scripted bot knows the truth through
// answer_key and draws its randomness from (seed, query id, round).
BackendFactory make_backend_factory(const BackendConfig& cfg, std::map<std::string, Answer> answer_key,
                                    std::uint64_t seed);

// Deterministic uniform draw in [0, 1).
double seeded_uniform(std::uint64_t seed, std::string_view query_id, std::size_t round, std::string_view tag);

// Pulls the assistant text out of a chat-completions, responses-style or
// messages-style response body. Throws TransportError when none is found.
std::string extract_completion_text(const nlohmann::json& body);

}  // namespace owlaudit::harness
