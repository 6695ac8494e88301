#include "owlaudit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <exception>
#include <sstream>
#include <thread>

#include "owlaudit/io.hpp"
#include "owlaudit/version.hpp"

namespace owlaudit::harness {

using nlohmann::json;

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Direct: return "direct";
    case Mode::NaiveRepair: return "naive_repair";
    case Mode::CxRepairHint: return "cx_repair_hint";
    case Mode::CxRepairVerdictOnly: return "cx_repair_verdict_only";
  }
  return "direct";
}

Mode parse_mode(std::string_view s) {
  if (s == "direct") return Mode::Direct;
  if (s == "naive_repair" || s == "naive") return Mode::NaiveRepair;
  if (s == "cx_repair_hint" || s == "hint" || s == "cx_v1") return Mode::CxRepairHint;
  if (s == "cx_repair_verdict_only" || s == "verdict_only" || s == "cx_v3") return Mode::CxRepairVerdictOnly;
  throw HarnessError("unknown mode '" + std::string(s) +
                     "' (expected direct, naive_repair, cx_repair_hint or cx_repair_verdict_only)");
}

bool is_correct(const ModelAnswer& a, Answer gold) {
  const auto* p = std::get_if<ParsedAnswer>(&a);
  return p != nullptr && p->answer == gold;
}

std::string answer_label(const ModelAnswer& a) {
  if (const auto* p = std::get_if<ParsedAnswer>(&a)) return std::string(oracle::to_string(p->answer));
  return "malformed";
}

namespace {

// End of the brace-balanced span starting at raw[start] == '{', honouring JSON
// strings; npos when unbalanced.
std::size_t balanced_end(std::string_view raw, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < raw.size(); ++i) {
    char c = raw[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i;
  }
  return std::string_view::npos;
}

}  // namespace

ModelAnswer parse_answer(std::string_view raw) {
  for (std::size_t pos = raw.find('{'); pos != std::string_view::npos; pos = raw.find('{', pos + 1)) {
    std::size_t end = balanced_end(raw, pos);
    if (end == std::string_view::npos) continue;
    json j = json::parse(raw.substr(pos, end - pos + 1), nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    auto it = j.find("answer");
    if (it == j.end() || !it->is_string()) break;
    auto a = oracle::parse_answer_value(it->get<std::string>());
    if (!a) break;
    std::string reason;
    if (auto r = j.find("reason"); r != j.end()) reason = r->is_string() ? r->get<std::string>() : r->dump();
    return ParsedAnswer{*a, std::move(reason)};
  }
  return MalformedAnswer{std::string(raw)};
}

// --- prompts ------------------------------------------------------------------

namespace {

constexpr std::string_view kInitialTemplate =
    "You are an OWL 2 DL reasoning assistant. Answer strictly under OWL 2 DL semantics: the open-world "
    "assumption applies, so a fact that is not stated and not entailed is not false.\n"
    "\n"
    "Ontology (Turtle):\n"
    "```turtle\n"
    "{{ontology}}"
    "```\n"
    "\n"
    "Question: {{question}}\n"
    "Individual: <{{individual}}>\n"
    "Class: <{{class}}>\n"
    "\n"
    "Answer \"yes\" if the ontology entails that the individual belongs to the class, \"no\" if it entails "
    "that the individual does not belong to the class, and \"unknown\" if neither is entailed.\n"
    "Respond with exactly one JSON object and nothing else:\n"
    "{\"answer\": \"yes\"|\"no\"|\"unknown\", \"reason\": \"...\"}\n";

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

}  // namespace

std::string_view initial_template() { return kInitialTemplate; }

std::string initial_template_hash() { return io::hex64(io::fnv1a(kInitialTemplate)); }

std::string build_initial_prompt(const scenarios::Scenario& s, const oracle::Query& q) {
  std::string ontology = s.ontology_text;
  if (!ontology.empty() && ontology.back() != '\n') ontology += '\n';
  // The ontology goes in last so braces inside it are never mistaken for placeholders.
  std::string out(kInitialTemplate);
  replace_all(out, "{{question}}", q.question);
  replace_all(out, "{{individual}}", q.individual);
  replace_all(out, "{{class}}", q.cls);
  auto pos = out.find("{{ontology}}");
  out.replace(pos, std::string_view("{{ontology}}").size(), ontology);
  return out;
}

std::string build_followup(Mode mode, Answer gold, const ModelAnswer& given) {
  auto verdict = [&] {
    return "The OWL 2 DL reasoner verified the correct answer is \"" + std::string(oracle::to_string(gold)) +
           "\", not \"" + answer_label(given) + "\".";
  };
  switch (mode) {
    case Mode::NaiveRepair: return std::string(kNaiveRetry);
    case Mode::CxRepairVerdictOnly: return verdict();
    case Mode::CxRepairHint: return verdict() + " " + std::string(kOwaHint);
    case Mode::Direct: break;
  }
  throw HarnessError("direct mode has no follow-up prompt");
}

// --- transcripts -----------------------------------------------------------------

std::optional<std::size_t> Transcript::rounds_until_correct() const {
  for (const auto& r : rounds)
    if (is_correct(r.parsed, gold)) return r.index + 1;
  return std::nullopt;
}

json to_json(const ModelAnswer& a) {
  if (const auto* p = std::get_if<ParsedAnswer>(&a))
    return {{"kind", "parsed"}, {"answer", oracle::to_string(p->answer)}, {"reason", p->reason}};
  return {{"kind", "malformed"}, {"raw", std::get<MalformedAnswer>(a).raw}};
}

ModelAnswer model_answer_from_json(const json& j) {
  if (j.at("kind").get<std::string>() == "malformed") return MalformedAnswer{j.value("raw", "")};
  auto a = oracle::parse_answer_value(j.at("answer").get<std::string>());
  if (!a) throw HarnessError("invalid answer value in transcript: " + j.at("answer").dump());
  return ParsedAnswer{*a, j.value("reason", "")};
}

json to_json(const Transcript& t) {
  json rounds = json::array();
  for (const auto& r : t.rounds) {
    rounds.push_back({{"round_index", r.index},
                      {"prompt_text", r.prompt_text},
                      {"raw_response", r.raw_response},
                      {"parsed", to_json(r.parsed)},
                      {"latency_ms", r.latency_ms},
                      {"timestamp", r.timestamp}});
  }
  json j = {{"query_id", t.query_id},
            {"scenario_id", t.scenario_id},
            {"category", t.category},
            {"mode", to_string(t.mode)},
            {"gold", oracle::to_string(t.gold)},
            {"rounds", std::move(rounds)},
            {"final", to_json(t.final)},
            {"rounds_used", t.rounds_used}};
  j["error"] = t.error ? json(*t.error) : json(nullptr);
  return j;
}

Transcript transcript_from_json(const json& j) {
  Transcript t;
  t.query_id = j.at("query_id").get<std::string>();
  t.scenario_id = j.value("scenario_id", "");
  t.category = j.value("category", "");
  t.mode = parse_mode(j.at("mode").get<std::string>());
  auto gold = oracle::parse_answer_value(j.at("gold").get<std::string>());
  if (!gold) throw HarnessError("invalid gold value in transcript " + t.query_id);
  t.gold = *gold;
  for (const auto& r : j.at("rounds")) {
    Round round;
    round.index = r.at("round_index").get<std::size_t>();
    round.prompt_text = r.value("prompt_text", "");
    round.raw_response = r.value("raw_response", "");
    round.parsed = model_answer_from_json(r.at("parsed"));
    round.latency_ms = r.value("latency_ms", 0.0);
    round.timestamp = r.value("timestamp", "");
    t.rounds.push_back(std::move(round));
  }
  t.final = model_answer_from_json(j.at("final"));
  t.rounds_used = j.value("rounds_used", t.rounds.size());
  if (t.rounds_used != t.rounds.size())
    throw HarnessError("transcript " + t.query_id + ": rounds_used does not match the recorded rounds");
  if (auto e = j.find("error"); e != j.end() && e->is_string()) t.error = e->get<std::string>();
  return t;
}

std::string to_jsonl(const std::vector<Transcript>& ts) {
  std::string out;
  for (const auto& t : ts) {
    out += to_json(t).dump();
    out += '\n';
  }
  return out;
}

std::vector<Transcript> read_jsonl(std::string_view text) {
  std::vector<Transcript> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(transcript_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw HarnessError("results line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// --- running -----------------------------------------------------------------------

Transcript run_query(const scenarios::Scenario& s, const oracle::Query& q, Answer gold, Mode mode, Backend& backend,
                     const RunOptions& options) {
  Transcript t;
  t.query_id = q.id;
  t.scenario_id = s.id;
  t.category = std::string(scenarios::to_string(s.category));
  t.mode = mode;
  t.gold = gold;

  ChatRequest req;
  req.query_id = q.id;
  req.mode = mode;
  std::string prompt = build_initial_prompt(s, q);
  std::size_t followups = mode == Mode::Direct ? 0 : options.budget;

  for (std::size_t round = 0;; ++round) {
    req.round_index = round;
    req.messages.push_back({round == 0 ? "user" : options.followup_role, prompt});
    Round r;
    r.index = round;
    r.prompt_text = prompt;
    r.timestamp = io::utc_timestamp();
    auto t0 = std::chrono::steady_clock::now();
    try {
      r.raw_response = backend.complete(req);
    } catch (const TransportError& e) {
      t.error = e.what();
      break;
    }
    r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    r.parsed = parse_answer(r.raw_response);
    req.messages.push_back({"assistant", r.raw_response});
    t.rounds.push_back(std::move(r));

    const ModelAnswer& latest = t.rounds.back().parsed;
    if (is_correct(latest, gold) || round >= followups) break;
    prompt = build_followup(mode, gold, latest);
  }

  t.rounds_used = t.rounds.size();
  if (t.rounds.empty()) t.final = MalformedAnswer{};
  else t.final = t.rounds.back().parsed;
  return t;
}

std::map<std::string, Answer> gold_map(const std::vector<scenarios::Scenario>& scenarios) {
  std::map<std::string, Answer> out;
  for (const auto& s : scenarios) {
    if (!s.gold) throw HarnessError("scenario " + s.id + " has no gold.json; run the audit step first");
    for (const auto& g : *s.gold) out[g.id] = g.gold;
    for (const auto& q : s.queries)
      if (!out.contains(q.id)) throw HarnessError("gold.json of " + s.id + " lacks query " + q.id);
  }
  return out;
}

BatchResult run_batch(const std::vector<scenarios::Scenario>& scenarios, const std::map<std::string, Answer>& golds,
                      Mode mode, const BackendFactory& factory, const RunOptions& options,
                      const json& backend_description) {
  struct Job {
    const scenarios::Scenario* scenario;
    const oracle::Query* query;
    Answer gold;
  };
  std::vector<Job> jobs;
  for (const auto& s : scenarios) {
    for (const auto& q : s.queries) {
      auto it = golds.find(q.id);
      if (it == golds.end()) throw HarnessError("no gold answer for query " + q.id);
      jobs.push_back({&s, &q, it->second});
    }
  }
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.query->id < b.query->id; });

  std::size_t workers = std::max<std::size_t>(1, std::min(options.parallelism, std::max<std::size_t>(jobs.size(), 1)));
  // Backends are built up front so configuration errors surface before any work starts.
  std::vector<std::unique_ptr<Backend>> backends;
  for (std::size_t i = 0; i < workers; ++i) backends.push_back(factory());

  std::string started = io::utc_timestamp();
  auto t0 = std::chrono::steady_clock::now();
  std::vector<Transcript> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&](Backend& backend) {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      try {
        out[i] = run_query(*job.scenario, *job.query, job.gold, mode, backend, options);
      } catch (const std::exception& e) {
        Transcript t;
        t.query_id = job.query->id;
        t.scenario_id = job.scenario->id;
        t.category = std::string(scenarios::to_string(job.scenario->category));
        t.mode = mode;
        t.gold = job.gold;
        t.error = e.what();
        out[i] = std::move(t);
      }
    }
  };
  if (workers == 1) {
    work(*backends[0]);
  } else {
    std::vector<std::jthread> pool;
    for (auto& b : backends) pool.emplace_back([&work, &b] { work(*b); });
  }
  double wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  std::size_t errors = 0;
  for (const auto& t : out) errors += t.error ? 1 : 0;

  json manifest = {{"tool_version", kVersion},
                   {"mode", to_string(mode)},
                   {"backend", backend_description},
                   {"backend_config_hash", io::hex64(io::fnv1a(backend_description.dump()))},
                   {"prompt_template_version", kInitialTemplateVersion},
                   {"prompt_template_hash", initial_template_hash()},
                   {"started_at", started},
                   {"finished_at", io::utc_timestamp()},
                   {"wall_clock_ms", wall_ms},
                   {"seed", options.seed},
                   {"budget", options.budget},
                   {"parallelism", workers},
                   {"followup_role", options.followup_role},
                   {"scenario_count", scenarios.size()},
                   {"query_count", out.size()},
                   {"error_count", errors}};
  return {std::move(out), std::move(manifest)};
}

}  // namespace owlaudit::harness
