#include "owlaudit/backends.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <regex>
#include <thread>

#include "httplib.h"

#include "owlaudit/io.hpp"

namespace owlaudit::harness {

using nlohmann::json;

std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::HttpChat: return "http_chat";
    case BackendKind::Replay: return "replay";
    case BackendKind::ScriptedOvercautious: return "scripted_overcautious";
  }
  return "scripted_overcautious";
}

BackendKind parse_backend_kind(std::string_view s) {
  if (s == "http_chat") return BackendKind::HttpChat;
  if (s == "replay") return BackendKind::Replay;
  if (s == "scripted_overcautious" || s == "scripted") return BackendKind::ScriptedOvercautious;
  throw HarnessError("unknown backend kind '" + std::string(s) +
                     "' (expected http_chat, replay or scripted_overcautious)");
}

// --- config ------------------------------------------------------------------------

namespace {

std::string_view policy_kind_name(WrapperPolicy::Kind k) {
  switch (k) {
    case WrapperPolicy::Kind::KeepHedging: return "keep_hedging";
    case WrapperPolicy::Kind::Capitulate: return "capitulate";
    case WrapperPolicy::Kind::CapitulateAfterN: return "capitulate_after_n";
    case WrapperPolicy::Kind::Stochastic: return "stochastic";
  }
  return "keep_hedging";
}

double probability(const json& j, const char* key, double fallback) {
  double v = j.value(key, fallback);
  if (!(v >= 0.0 && v <= 1.0)) throw HarnessError(std::string(key) + " must lie in [0, 1]");
  return v;
}

template <typename T>
T unsigned_field(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer() || it->get<std::int64_t>() < 0)
    throw HarnessError(std::string(key) + " must be a non-negative integer");
  return it->get<T>();
}

}  // namespace

json WrapperPolicy::to_json() const {
  json j = {{"kind", policy_kind_name(kind)}};
  if (kind == Kind::CapitulateAfterN) j["n"] = after_n;
  if (kind == Kind::Stochastic) j["rate"] = rate;
  return j;
}

WrapperPolicy WrapperPolicy::from_json(const json& j) {
  WrapperPolicy p;
  std::string k = j.at("kind").get<std::string>();
  if (k == "keep_hedging") p.kind = Kind::KeepHedging;
  else if (k == "capitulate") p.kind = Kind::Capitulate;
  else if (k == "capitulate_after_n") p.kind = Kind::CapitulateAfterN;
  else if (k == "stochastic") p.kind = Kind::Stochastic;
  else throw HarnessError("unknown wrapper policy '" + k + "'");
  p.after_n = unsigned_field<std::size_t>(j, "n", 1);
  if (p.kind == Kind::CapitulateAfterN && p.after_n == 0) throw HarnessError("capitulate_after_n needs n >= 1");
  p.rate = probability(j, "rate", 0.0);
  return p;
}

json ScriptedPolicy::to_json() const {
  return {{"initial_hedge_rate", initial_hedge_rate},
          {"malformed_rate", malformed_rate},
          {"naive", naive.to_json()},
          {"hint", hint.to_json()},
          {"verdict", verdict.to_json()}};
}

ScriptedPolicy ScriptedPolicy::from_json(const json& j) {
  ScriptedPolicy p;
  p.initial_hedge_rate = probability(j, "initial_hedge_rate", p.initial_hedge_rate);
  p.malformed_rate = probability(j, "malformed_rate", p.malformed_rate);
  if (j.contains("naive")) p.naive = WrapperPolicy::from_json(j.at("naive"));
  if (j.contains("hint")) p.hint = WrapperPolicy::from_json(j.at("hint"));
  if (j.contains("verdict")) p.verdict = WrapperPolicy::from_json(j.at("verdict"));
  return p;
}

void BackendConfig::validate() const {
  switch (kind) {
    case BackendKind::HttpChat:
      if (endpoint.empty()) throw HarnessError("http_chat backend needs an endpoint");
      if (model.empty()) throw HarnessError("http_chat backend needs a model name");
      if (!endpoint.starts_with("http://") && !endpoint.starts_with("https://"))
        throw HarnessError("endpoint must be an http:// or https:// URL: " + endpoint);
      if (!params.is_object()) throw HarnessError("params must be a table of key/value pairs");
      break;
    case BackendKind::Replay:
      if (replay_file.empty()) throw HarnessError("replay backend needs a transcript file (replay_file)");
      break;
    case BackendKind::ScriptedOvercautious: break;
  }
}

json BackendConfig::to_json() const {
  json j = {{"kind", to_string(kind)}};
  switch (kind) {
    case BackendKind::HttpChat:
      j["endpoint"] = endpoint;
      j["model"] = model;
      j["api_key_env"] = api_key_env;
      j["timeout_ms"] = timeout_ms;
      j["max_retries"] = max_retries;
      j["initial_backoff_ms"] = initial_backoff_ms;
      j["max_backoff_ms"] = max_backoff_ms;
      j["params"] = params;
      break;
    case BackendKind::Replay: j["replay_file"] = replay_file.string(); break;
    case BackendKind::ScriptedOvercautious: j["policy"] = policy.to_json(); break;
  }
  return j;
}

BackendConfig BackendConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw HarnessError("backend config must be an object");
  for (const char* secret : {"api_key", "key", "token", "password"})
    if (j.contains(secret))
      throw HarnessError(std::string("backend config must not contain '") + secret +
                         "'; name an environment variable in api_key_env instead");
  BackendConfig c;
  try {
    c.kind = parse_backend_kind(j.at("kind").get<std::string>());
    c.endpoint = j.value("endpoint", "");
    c.model = j.value("model", "");
    c.api_key_env = j.value("api_key_env", "");
    c.timeout_ms = unsigned_field<std::uint32_t>(j, "timeout_ms", c.timeout_ms);
    c.max_retries = unsigned_field<std::uint32_t>(j, "max_retries", c.max_retries);
    c.initial_backoff_ms = unsigned_field<std::uint32_t>(j, "initial_backoff_ms", c.initial_backoff_ms);
    c.max_backoff_ms = unsigned_field<std::uint32_t>(j, "max_backoff_ms", c.max_backoff_ms);
    if (j.contains("params")) c.params = j.at("params");
    if (j.contains("replay_file")) {
      std::filesystem::path p = j.at("replay_file").get<std::string>();
      c.replay_file = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    if (j.contains("policy")) c.policy = ScriptedPolicy::from_json(j.at("policy"));
  } catch (const json::exception& e) {
    throw HarnessError(std::string("invalid backend config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string BackendConfig::hash() const { return io::hex64(io::fnv1a(to_json().dump())); }

BackendConfig load_backend_config(const std::filesystem::path& path) {
  json j;
  try {
    j = io::read_config(path);
  } catch (const std::exception& e) {
    throw HarnessError("cannot read backend config " + path.string() + ": " + e.what());
  }
  return BackendConfig::from_json(j, path.parent_path());
}

// --- randomness ----------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double seeded_uniform(std::uint64_t seed, std::string_view query_id, std::size_t round, std::string_view tag) {
  std::string key(query_id);
  key += '\x1f';
  key += std::to_string(round);
  key += '\x1f';
  key += tag;
  std::uint64_t x = splitmix64(splitmix64(seed) ^ io::fnv1a(key));
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// --- scripted overcautious bot -----------------------------------------------------------

namespace {

std::string render(Answer a, std::string_view reason) {
  return json{{"answer", oracle::to_string(a)}, {"reason", reason}}.dump();
}

class ScriptedBackend final : public Backend {
 public:
  ScriptedBackend(ScriptedPolicy policy, std::shared_ptr<const std::map<std::string, Answer>> key,
                  std::uint64_t seed)
      : policy_(policy), key_(std::move(key)), seed_(seed) {}

  std::string complete(const ChatRequest& req) override {
    auto it = key_->find(req.query_id);
    if (it == key_->end()) throw HarnessError("scripted backend has no answer for " + req.query_id);
    Answer truth = it->second;

    if (req.round_index == 0) {
      if (draw(req, "malformed") < policy_.malformed_rate)
        return R"({"answer": "unknown", "reason": "The ontology does not state)";
      if (truth == Answer::No && draw(req, "hedge") < policy_.initial_hedge_rate)
        return render(Answer::Unknown,
                      "Under the open-world assumption the absence of a membership assertion does not "
                      "entail its negation, so membership cannot be decided.");
      return render(truth, confident_reason(truth));
    }

    const std::string& followup = last_user_message(req);
    const WrapperPolicy* policy = &policy_.naive;
    std::string_view tag = "naive";
    Answer target = truth;
    if (auto stated = stated_verdict(followup)) {
      target = *stated;
      bool hint = followup.find(kOwaHint) != std::string::npos;
      policy = hint ? &policy_.hint : &policy_.verdict;
      tag = hint ? "hint" : "verdict";
    }
    if (gives_in(*policy, req, tag)) return render(target, confident_reason(target));
    return render(Answer::Unknown,
                  "Missing triples are not negations; nothing in the ontology rules the membership in or out.");
  }

 private:
  double draw(const ChatRequest& req, std::string_view tag) const {
    return seeded_uniform(seed_, req.query_id, req.round_index, tag);
  }

  bool gives_in(const WrapperPolicy& p, const ChatRequest& req, std::string_view tag) const {
    switch (p.kind) {
      case WrapperPolicy::Kind::KeepHedging: return false;
      case WrapperPolicy::Kind::Capitulate: return true;
      case WrapperPolicy::Kind::CapitulateAfterN: return req.round_index >= p.after_n;
      case WrapperPolicy::Kind::Stochastic: return draw(req, tag) < p.rate;
    }
    return false;
  }

  static const std::string& last_user_message(const ChatRequest& req) {
    for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it)
      if (it->role != "assistant") return it->content;
    throw HarnessError("follow-up request without a prompt");
  }

  static std::optional<Answer> stated_verdict(const std::string& text) {
    static const std::regex re(R"re(correct answer is "(yes|no|unknown)")re");
    std::smatch m;
    if (!std::regex_search(text, m, re)) return std::nullopt;
    return oracle::parse_answer_value(m[1].str());
  }

  static std::string confident_reason(Answer a) {
    switch (a) {
      case Answer::Yes: return "The asserted facts satisfy the class definition, so membership is entailed.";
      case Answer::No:
        return "A functional property value or a disjointness axiom rules out the definition, so the negation "
               "is entailed.";
      case Answer::Unknown: return "Neither membership nor its negation follows from the ontology.";
    }
    return "";
  }

  ScriptedPolicy policy_;
  std::shared_ptr<const std::map<std::string, Answer>> key_;
  std::uint64_t seed_;
};

// --- replay -----------------------------------------------------------------------------

class ReplayBackend final : public Backend {
 public:
  using Table = std::map<std::pair<Mode, std::string>, std::vector<std::string>>;
  explicit ReplayBackend(std::shared_ptr<const Table> table) : table_(std::move(table)) {}

  std::string complete(const ChatRequest& req) override {
    auto it = table_->find({req.mode, req.query_id});
    if (it == table_->end() || req.round_index >= it->second.size())
      throw TransportError("no recorded response for " + req.query_id + " round " +
                           std::to_string(req.round_index) + " in mode " + std::string(to_string(req.mode)));
    return it->second[req.round_index];
  }

 private:
  std::shared_ptr<const Table> table_;
};

std::shared_ptr<const ReplayBackend::Table> load_replay_table(const std::filesystem::path& file) {
  std::string text;
  try {
    text = io::read_file(file);
  } catch (const std::exception& e) {
    throw HarnessError("cannot read replay file: " + std::string(e.what()));
  }
  auto table = std::make_shared<ReplayBackend::Table>();
  for (const auto& t : read_jsonl(text)) {
    auto& responses = (*table)[{t.mode, t.query_id}];
    responses.clear();
    for (const auto& r : t.rounds) responses.push_back(r.raw_response);
  }
  return table;
}

// --- http chat ----------------------------------------------------------------------------

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpChatBackend final : public Backend {
 public:
  explicit HttpChatBackend(const BackendConfig& cfg) : cfg_(cfg), endpoint_(split_endpoint(cfg.endpoint)) {
    if (!cfg.api_key_env.empty()) {
      const char* key = std::getenv(cfg.api_key_env.c_str());
      if (key == nullptr || *key == '\0')
        throw HarnessError("environment variable " + cfg.api_key_env + " is not set");
      key_ = key;
    }
  }

  std::string complete(const ChatRequest& req) override {
    json body = cfg_.params;
    body["model"] = cfg_.model;
    json messages = json::array();
    for (const auto& m : req.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    body["messages"] = std::move(messages);
    std::string payload = body.dump();

    httplib::Headers headers;
    if (!key_.empty()) headers.emplace("Authorization", "Bearer " + key_);

    std::string last_error;
    for (std::uint32_t attempt = 0;; ++attempt) {
      httplib::Client client(endpoint_.origin);
      auto timeout = std::chrono::milliseconds(cfg_.timeout_ms);
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);

      std::chrono::milliseconds retry_after{0};
      auto res = client.Post(endpoint_.path, headers, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
      } else if (res->status == 200) {
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded()) throw TransportError("endpoint returned a body that is not JSON");
        return extract_completion_text(reply);
      } else if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        if (auto ra = res->get_header_value("Retry-After"); !ra.empty()) {
          char* end = nullptr;
          long secs = std::strtol(ra.c_str(), &end, 10);
          if (end != ra.c_str() && secs > 0) retry_after = std::chrono::seconds(secs);
        }
      } else {
        throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
      }

      if (attempt >= cfg_.max_retries)
        throw TransportError(last_error + " (gave up after " + std::to_string(attempt + 1) + " attempts)");
      std::uint64_t backoff = static_cast<std::uint64_t>(cfg_.initial_backoff_ms) << std::min<std::uint32_t>(attempt, 20);
      auto wait = std::chrono::milliseconds(std::min<std::uint64_t>(backoff, cfg_.max_backoff_ms));
      std::this_thread::sleep_for(std::max(wait, std::min(retry_after, std::chrono::milliseconds(cfg_.max_backoff_ms))));
    }
  }

 private:
  BackendConfig cfg_;
  Endpoint endpoint_;
  std::string key_;
};

}  // namespace

std::string extract_completion_text(const json& body) {
  // chat completions
  if (auto c = body.find("choices"); c != body.end() && c->is_array() && !c->empty()) {
    const json& first = c->front();
    if (first.contains("message") && first["message"].contains("content") && first["message"]["content"].is_string())
      return first["message"]["content"].get<std::string>();
    if (first.contains("text") && first["text"].is_string()) return first["text"].get<std::string>();
  }
  // responses
  if (auto t = body.find("output_text"); t != body.end() && t->is_string()) return t->get<std::string>();
  if (auto o = body.find("output"); o != body.end() && o->is_array()) {
    std::string text;
    for (const auto& item : *o)
      if (item.contains("content") && item["content"].is_array())
        for (const auto& part : item["content"])
          if (part.contains("text") && part["text"].is_string()) text += part["text"].get<std::string>();
    if (!text.empty()) return text;
  }
  // messages
  if (auto c = body.find("content"); c != body.end() && c->is_array()) {
    std::string text;
    for (const auto& part : *c)
      if (part.contains("text") && part["text"].is_string()) text += part["text"].get<std::string>();
    if (!text.empty()) return text;
  }
  throw TransportError("response body carries no assistant text");
}

BackendFactory make_backend_factory(const BackendConfig& cfg, std::map<std::string, Answer> answer_key,
                                    std::uint64_t seed) {
  cfg.validate();
  switch (cfg.kind) {
    case BackendKind::ScriptedOvercautious: {
      auto key = std::make_shared<const std::map<std::string, Answer>>(std::move(answer_key));
      return [policy = cfg.policy, key, seed] { return std::make_unique<ScriptedBackend>(policy, key, seed); };
    }
    case BackendKind::Replay: {
      auto table = load_replay_table(cfg.replay_file);
      return [table] { return std::make_unique<ReplayBackend>(table); };
    }
    case BackendKind::HttpChat:
      return [cfg] { return std::make_unique<HttpChatBackend>(cfg); };
  }
  throw HarnessError("unsupported backend kind");
}

}  // namespace owlaudit::harness
