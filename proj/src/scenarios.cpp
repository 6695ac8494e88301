#include "owlaudit/scenarios.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "owlaudit/io.hpp"
#include "owlaudit/turtle.hpp"
#include "owlaudit/version.hpp"

namespace owlaudit::scenarios {

namespace fs = std::filesystem;
using oracle::Query;

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Subsumption: return "subsumption";
    case Category::NumericBuiltin: return "numeric_builtin";
    case Category::OwaTrap: return "owa_trap";
    case Category::Mixed: return "mixed";
  }
  return "mixed";
}

std::string_view to_string(Provenance p) {
  return p == Provenance::Generated ? "generated" : "hand_authored";
}

Category parse_category(std::string_view s) {
  if (s == "subsumption") return Category::Subsumption;
  if (s == "numeric_builtin") return Category::NumericBuiltin;
  if (s == "owa_trap") return Category::OwaTrap;
  if (s == "mixed") return Category::Mixed;
  throw ScenarioError("unknown scenario category '" + std::string(s) + "'");
}

Provenance parse_provenance(std::string_view s) {
  if (s == "generated") return Provenance::Generated;
  if (s == "hand_authored") return Provenance::HandAuthored;
  throw ScenarioError("unknown provenance '" + std::string(s) + "'");
}

std::string_view to_string(SpendBucket b) {
  switch (b) {
    case SpendBucket::Below: return "below";
    case SpendBucket::Boundary: return "boundary";
    case SpendBucket::Above: return "above";
  }
  return "below";
}

std::string_view to_string(Membership m) {
  switch (m) {
    case Membership::Active: return "active";
    case Membership::Blacklisted: return "blacklisted";
    case Membership::None: return "none";
  }
  return "none";
}

SpendBucket parse_spend_bucket(std::string_view s) {
  if (s == "below") return SpendBucket::Below;
  if (s == "boundary") return SpendBucket::Boundary;
  if (s == "above") return SpendBucket::Above;
  throw ScenarioError("unknown spend bucket '" + std::string(s) + "'");
}

Membership parse_membership(std::string_view s) {
  if (s == "active") return Membership::Active;
  if (s == "blacklisted") return Membership::Blacklisted;
  if (s == "none") return Membership::None;
  throw ScenarioError("unknown membership '" + std::string(s) + "'");
}

std::vector<GridPoint> grid_points() {
  std::vector<GridPoint> out;
  for (auto b : {SpendBucket::Below, SpendBucket::Boundary, SpendBucket::Above}) {
    for (auto m : {Membership::Active, Membership::Blacklisted, Membership::None}) out.push_back({b, m});
  }
  return out;
}

// --- scenario construction ---------------------------------------------------------

Scenario make_scenario(std::string id, Category category, Provenance provenance, std::string ontology_text,
                       std::vector<Query> queries) {
  if (ontology_text.empty()) throw ScenarioError("scenario " + id + ": empty ontology text");
  Scenario s;
  s.id = std::move(id);
  s.category = category;
  s.provenance = provenance;
  s.ontology_text = std::move(ontology_text);
  try {
    s.ontology = model::extract_ontology(turtle::parse_turtle(s.ontology_text));
  } catch (const std::exception& e) {
    throw ScenarioError("scenario " + s.id + ": " + e.what());
  }
  for (const auto& q : queries) {
    if (!s.ontology.mentions_individual(q.individual)) {
      throw ScenarioError("scenario " + s.id + ", query " + q.id + ": unknown individual <" + q.individual + ">");
    }
    if (!s.ontology.mentions_class(q.cls)) {
      throw ScenarioError("scenario " + s.id + ", query " + q.id + ": unknown class <" + q.cls + ">");
    }
  }
  s.queries = std::move(queries);
  return s;
}

// --- expansion template ------------------------------------------------------------

void ExpansionConfig::validate() const {
  if (variant_count == 0) throw ScenarioError("variant_count must be positive");
  if (queries_per_variant == 0 || queries_per_variant > 6) {
    throw ScenarioError("queries_per_variant must be between 1 and 6");
  }
  if (spend_offset.sign() <= 0) throw ScenarioError("spend_offset must be positive");
  if (pairs && pairs->size() != variant_count) {
    throw ScenarioError("explicit pair list has " + std::to_string(pairs->size()) + " entries, expected " +
                        std::to_string(variant_count));
  }
  if (!pairs && variant_count > 81) throw ScenarioError("at most 81 distinct grid pairs exist");
}

nlohmann::json ExpansionConfig::to_json() const {
  nlohmann::json j = {{"variant_count", variant_count},
                      {"threshold", threshold.to_string()},
                      {"spend_offset", spend_offset.to_string()},
                      {"seed", seed},
                      {"queries_per_variant", queries_per_variant},
                      {"base_iri", base_iri}};
  if (pairs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [a, b] : *pairs) {
      arr.push_back({{"c_a", {std::string(to_string(a.spend)), std::string(to_string(a.membership))}},
                     {"c_b", {std::string(to_string(b.spend)), std::string(to_string(b.membership))}}});
    }
    j["pairs"] = std::move(arr);
  }
  return j;
}

ExpansionConfig ExpansionConfig::from_json(const nlohmann::json& j) {
  ExpansionConfig c;
  if (j.contains("variant_count")) c.variant_count = j.at("variant_count").get<std::size_t>();
  if (j.contains("threshold")) c.threshold = Decimal::parse(j.at("threshold").get<std::string>());
  if (j.contains("spend_offset")) c.spend_offset = Decimal::parse(j.at("spend_offset").get<std::string>());
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("queries_per_variant")) c.queries_per_variant = j.at("queries_per_variant").get<std::size_t>();
  if (j.contains("base_iri")) c.base_iri = j.at("base_iri").get<std::string>();
  if (j.contains("pairs")) {
    std::vector<GridPair> pairs;
    auto point = [](const nlohmann::json& p) {
      return GridPoint{parse_spend_bucket(p.at(0).get<std::string>()), parse_membership(p.at(1).get<std::string>())};
    };
    for (const auto& p : j.at("pairs")) pairs.emplace_back(point(p.at("c_a")), point(p.at("c_b")));
    c.pairs = std::move(pairs);
  }
  return c;
}

namespace {

Decimal spend_for(const ExpansionConfig& cfg, SpendBucket b) {
  switch (b) {
    case SpendBucket::Below: return cfg.threshold - cfg.spend_offset;
    case SpendBucket::Boundary: return cfg.threshold;
    case SpendBucket::Above: return cfg.threshold + cfg.spend_offset;
  }
  return cfg.threshold;
}

std::string customer_block(const ExpansionConfig& cfg, const std::string& name, const GridPoint& p) {
  std::string out = ":" + name + " a :Customer ; :hasSpend " + spend_for(cfg, p.spend).to_string();
  if (p.membership == Membership::Active) out += " ; a :ActiveCustomer";
  if (p.membership == Membership::Blacklisted) out += " ; a :Blacklisted";
  return out + " .\n";
}

std::string suffixed(std::string_view base, std::string_view suffix) {
  return suffix.empty() ? std::string(base) : std::string(base) + "_" + std::string(suffix);
}

}  // namespace

std::string mixed_template_turtle(const ExpansionConfig& cfg, const GridPair& pair, std::string_view suffix) {
  const std::string t = cfg.threshold.to_string();
  std::string out;
  out += "@prefix : <" + cfg.base_iri + "> .\n";
  out += "@prefix owl: <http://www.w3.org/2002/07/owl#> .\n";
  out += "@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n";
  out += "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n";
  out += "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n\n";
  out += ":Customer       a owl:Class .\n";
  out += ":ActiveCustomer a owl:Class .\n";
  out += ":Blacklisted    a owl:Class .\n";
  out += ":VIPCustomer    a owl:Class .\n";
  out += ":ActiveVIP      a owl:Class .\n\n";
  out += ":hasSpend      a owl:FunctionalProperty, owl:DatatypeProperty ;\n";
  out += "               rdfs:range xsd:decimal .\n\n";
  out += ":VIPCustomer   owl:equivalentClass [\n";
  out += "                 a owl:Class ;\n";
  out += "                 owl:intersectionOf (\n";
  out += "                   :Customer\n";
  out += "                   [ owl:onProperty :hasSpend ;\n";
  out += "                     owl:someValuesFrom [\n";
  out += "                       a rdfs:Datatype ;\n";
  out += "                       owl:onDatatype xsd:decimal ;\n";
  out += "                       owl:withRestrictions ( [ xsd:minExclusive " + t + " ] ) ] ] ) ] .\n\n";
  out += ":ActiveVIP     owl:equivalentClass [ owl:intersectionOf ( :VIPCustomer :ActiveCustomer ) ] .\n\n";
  out += "[ a owl:AllDisjointClasses ; owl:members ( :ActiveCustomer :Blacklisted ) ] .\n\n";
  out += customer_block(cfg, suffixed("c_a", suffix), pair.first);
  out += customer_block(cfg, suffixed("c_b", suffix), pair.second);
  return out;
}

std::vector<Query> mixed_template_queries(const ExpansionConfig& cfg, std::string_view scenario_id,
                                          std::string_view suffix, std::size_t count) {
  struct Ask {
    const char* key;
    const char* cls;
    const char* article;
  };
  static constexpr Ask kAsks[] = {
      {"vip", "VIPCustomer", "a"}, {"activevip", "ActiveVIP", "an"}, {"blacklisted", "Blacklisted", "a"}};
  std::vector<Query> out;
  for (const char* who : {"c_a", "c_b"}) {
    std::string name = suffixed(who, suffix);
    for (const auto& ask : kAsks) {
      Query q;
      q.id = std::string(scenario_id) + "." + name + "." + ask.key;
      q.individual = cfg.base_iri + name;
      q.cls = cfg.base_iri + ask.cls;
      q.question = "Is " + name + " " + ask.article + " " + ask.cls + "?";
      out.push_back(std::move(q));
    }
  }
  out.resize(std::min(count, out.size()));
  return out;
}

Scenario reference_scenario() {
  ExpansionConfig cfg;
  GridPair pair{{SpendBucket::Below, Membership::Active}, {SpendBucket::Above, Membership::Active}};
  std::string text = mixed_template_turtle(cfg, pair, "");
  auto queries = mixed_template_queries(cfg, "retail_ref", "", 6);
  std::map<std::string, oracle::Answer> expected = {
      {"retail_ref.c_a.vip", oracle::Answer::No},          {"retail_ref.c_a.activevip", oracle::Answer::No},
      {"retail_ref.c_a.blacklisted", oracle::Answer::No},  {"retail_ref.c_b.vip", oracle::Answer::Yes},
      {"retail_ref.c_b.activevip", oracle::Answer::Yes},   {"retail_ref.c_b.blacklisted", oracle::Answer::No}};
  for (auto& q : queries) q.expected = expected.at(q.id);
  return make_scenario("retail_ref", Category::Mixed, Provenance::HandAuthored, std::move(text), std::move(queries));
}

std::vector<GridPair> seeded_pair_order(std::uint64_t seed) {
  auto points = grid_points();
  std::vector<GridPair> pairs;
  for (const auto& a : points) {
    for (const auto& b : points) pairs.emplace_back(a, b);
  }
  // Fisher-Yates with an explicit bounded draw: std::mt19937_64 output is fixed
  // by the standard, the library distributions are not.
  std::mt19937_64 rng(seed);
  for (std::size_t i = pairs.size() - 1; i > 0; --i) {
    const std::uint64_t bound = i + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(pairs[i], pairs[static_cast<std::size_t>(r % bound)]);
  }
  return pairs;
}

namespace {

std::string variant_suffix(std::size_t index, std::size_t count) {
  std::string s = std::to_string(index);
  std::size_t width = std::max<std::size_t>(2, std::to_string(count - 1).size());
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

// Builds one generated scenario; the text is re-serialized so bundles are canonical.
Scenario build_variant(const ExpansionConfig& cfg, const GridPair& pair, std::size_t index) {
  std::string suffix = variant_suffix(index, cfg.variant_count);
  std::string id = "gen" + suffix;
  std::string text = turtle::serialize_turtle(turtle::parse_turtle(mixed_template_turtle(cfg, pair, suffix)));
  return make_scenario(id, Category::Mixed, Provenance::Generated, std::move(text),
                       mixed_template_queries(cfg, id, suffix, cfg.queries_per_variant));
}

bool has_entailed_no(const Scenario& s, const ExpansionConfig& cfg) {
  // Judge on the full six-question set so the constraint does not depend on
  // queries_per_variant.
  auto suffix = s.id.substr(3);
  auto all = mixed_template_queries(cfg, s.id, suffix, 6);
  auto audit = oracle::audit_scenario(s.ontology, all);
  return std::any_of(audit.entries.begin(), audit.entries.end(),
                     [](const oracle::AuditEntry& e) { return e.verdict.answer == oracle::Answer::No; });
}

std::vector<std::pair<GridPair, Scenario>> generate_impl(const ExpansionConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<GridPair, Scenario>> out;
  if (cfg.pairs) {
    for (std::size_t i = 0; i < cfg.pairs->size(); ++i) {
      out.emplace_back((*cfg.pairs)[i], build_variant(cfg, (*cfg.pairs)[i], i));
    }
    return out;
  }
  for (const auto& pair : seeded_pair_order(cfg.seed)) {
    if (out.size() == cfg.variant_count) break;
    Scenario s = build_variant(cfg, pair, out.size());
    if (has_entailed_no(s, cfg)) out.emplace_back(pair, std::move(s));
  }
  if (out.size() < cfg.variant_count) {
    throw ScenarioError("only " + std::to_string(out.size()) + " grid pairs admit an entailed \"no\"; requested " +
                        std::to_string(cfg.variant_count));
  }
  return out;
}

}  // namespace

std::vector<Scenario> generate_expansion(const ExpansionConfig& cfg) {
  std::vector<Scenario> out;
  for (auto& [pair, s] : generate_impl(cfg)) out.push_back(std::move(s));
  return out;
}

std::vector<GridPair> selected_pairs(const ExpansionConfig& cfg) {
  std::vector<GridPair> out;
  for (auto& [pair, s] : generate_impl(cfg)) out.push_back(pair);
  return out;
}

// --- bundles --------------------------------------------------------------------

nlohmann::json queries_to_json(const std::vector<Query>& queries) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& q : queries) {
    nlohmann::json j = {{"id", q.id}, {"individual", q.individual}, {"class", q.cls}, {"question", q.question}};
    if (q.expected) j["expected"] = std::string(oracle::to_string(*q.expected));
    arr.push_back(std::move(j));
  }
  return arr;
}

nlohmann::json bundle_manifest(const std::vector<Scenario>& scenarios, const nlohmann::json& extra) {
  nlohmann::json list = nlohmann::json::array();
  std::size_t queries = 0;
  for (const auto& s : scenarios) {
    list.push_back({{"id", s.id},
                    {"category", std::string(to_string(s.category))},
                    {"provenance", std::string(to_string(s.provenance))},
                    {"queries", s.queries.size()}});
    queries += s.queries.size();
  }
  nlohmann::json m = extra.is_object() ? extra : nlohmann::json::object();
  m["tool_version"] = std::string(kVersion);
  m["scenario_count"] = scenarios.size();
  m["query_count"] = queries;
  m["scenarios"] = std::move(list);
  return m;
}

void write_bundle(const fs::path& dir, const std::vector<Scenario>& scenarios, const nlohmann::json& manifest_extra) {
  fs::create_directories(dir);
  for (const auto& s : scenarios) {
    fs::path sd = dir / s.id;
    io::atomic_write(sd / "scenario.ttl", s.ontology_text);
    io::atomic_write(sd / "queries.json", io::dump_json(queries_to_json(s.queries)));
  }
  io::atomic_write(dir / "manifest.json", io::dump_json(bundle_manifest(scenarios, manifest_extra)));
}

namespace {

// Resolves "prefix:local" against the scenario's prefixes; absolute IRIs pass through.
std::string resolve_name(const std::string& name, const turtle::Graph& g) {
  auto colon = name.find(':');
  if (colon == std::string::npos) throw ScenarioError("cannot resolve name '" + name + "'");
  std::string prefix = name.substr(0, colon);
  auto it = g.prefixes().find(prefix);
  if (it != g.prefixes().end() && name.compare(colon, 3, "://") != 0) return it->second + name.substr(colon + 1);
  return name;
}

}  // namespace

std::vector<Scenario> load_bundle(const fs::path& dir, std::vector<std::string>* warnings) {
  if (!fs::is_directory(dir)) throw ScenarioError("bundle directory not found: " + dir.string());
  std::map<std::string, std::pair<Category, Provenance>> meta;
  if (fs::exists(dir / "manifest.json")) {
    auto m = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
    if (m.contains("scenarios")) {
      for (const auto& e : m.at("scenarios")) {
        meta[e.at("id").get<std::string>()] = {parse_category(e.value("category", "mixed")),
                                               parse_provenance(e.value("provenance", "hand_authored"))};
      }
    }
  }

  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "scenario.ttl")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty() && warnings != nullptr) warnings->push_back("bundle " + dir.string() + " contains no scenarios");

  std::vector<Scenario> out;
  for (const auto& sd : dirs) {
    const std::string id = sd.filename().string();
    try {
      std::string text = io::read_file(sd / "scenario.ttl");
      turtle::Graph g = turtle::parse_turtle(text);
      if (!fs::exists(sd / "queries.json")) throw ScenarioError("missing queries.json");
      auto qj = nlohmann::json::parse(io::read_file(sd / "queries.json"));
      std::vector<Query> queries;
      for (const auto& e : qj) {
        Query q;
        q.id = e.at("id").get<std::string>();
        q.individual = resolve_name(e.at("individual").get<std::string>(), g);
        q.cls = resolve_name(e.at("class").get<std::string>(), g);
        q.question = e.value("question", "");
        if (e.contains("expected")) {
          auto a = oracle::parse_answer_value(e.at("expected").get<std::string>());
          if (!a) throw ScenarioError("query " + q.id + ": invalid expected answer");
          q.expected = *a;
        }
        queries.push_back(std::move(q));
      }
      auto it = meta.find(id);
      if (it == meta.end() && warnings != nullptr) {
        warnings->push_back("scenario " + id + " is not listed in manifest.json; assuming category 'mixed'");
      }
      auto [category, provenance] =
          it == meta.end() ? std::pair{Category::Mixed, Provenance::HandAuthored} : it->second;
      Scenario s = make_scenario(id, category, provenance, std::move(text), std::move(queries));
      if (fs::exists(sd / "gold.json")) s.gold = oracle::gold_from_json(nlohmann::json::parse(io::read_file(sd / "gold.json")));
      out.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw ScenarioError((sd / "scenario.ttl").string() + ": " + e.what());
    }
  }
  std::sort(out.begin(), out.end(), [](const Scenario& a, const Scenario& b) { return a.id < b.id; });
  return out;
}

std::size_t audit_bundle(const fs::path& dir, std::vector<Scenario>& scenarios) {
  std::size_t written = 0;
  for (auto& s : scenarios) {
    oracle::AuditResult audit;
    try {
      audit = oracle::audit_scenario(s.ontology, s.queries);
    } catch (const oracle::KbInconsistentError& e) {
      throw ScenarioError("scenario " + s.id + ": " + e.what());
    }
    auto j = oracle::gold_to_json(s.id, audit);
    io::atomic_write(dir / s.id / "gold.json", io::dump_json(j));
    s.gold = oracle::gold_from_json(j);
    written += audit.entries.size();
  }
  return written;
}

}  // namespace owlaudit::scenarios
