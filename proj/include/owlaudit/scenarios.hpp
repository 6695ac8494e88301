#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "owlaudit/decimal.hpp"
#include "owlaudit/model.hpp"
#include "owlaudit/oracle.hpp"

namespace owlaudit::scenarios {

enum class Category { Subsumption, NumericBuiltin, OwaTrap, Mixed };
enum class Provenance { HandAuthored, Generated };

std::string_view to_string(Category c);
std::string_view to_string(Provenance p);
Category parse_category(std::string_view s);
Provenance parse_provenance(std::string_view s);

struct Scenario {
  std::string id;
  Category category = Category::Mixed;
  Provenance provenance = Provenance::HandAuthored;
  std::string ontology_text;
  std::vector<oracle::Query> queries;
  model::Ontology ontology;  // extracted from ontology_text
  std::optional<std::vector<oracle::GoldRecord>> gold;  // from gold.json, when present
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses and extracts the ontology and checks that every query refers to an
// individual and a class present in it.
Scenario make_scenario(std::string id, Category category, Provenance provenance, std::string ontology_text,
                       std::vector<oracle::Query> queries);

enum class SpendBucket { Below, Boundary, Above };
enum class Membership { Active, Blacklisted, None };

struct GridPoint {
  SpendBucket spend = SpendBucket::Below;
  Membership membership = Membership::None;
  friend auto operator<=>(const GridPoint&, const GridPoint&) = default;
};

std::string_view to_string(SpendBucket b);
std::string_view to_string(Membership m);
SpendBucket parse_spend_bucket(std::string_view s);
Membership parse_membership(std::string_view s);

// The nine (spend, membership) points in canonical order.
std::vector<GridPoint> grid_points();

using GridPair = std::pair<GridPoint, GridPoint>;  // (c_a, c_b)

struct ExpansionConfig {
  std::size_t variant_count = 30;
  Decimal threshold = Decimal(1000);
  Decimal spend_offset = Decimal(500);
  std::uint64_t seed = 7;
  std::size_t queries_per_variant = 6;
  std::string base_iri = "http://example.org/retail#";
  // Explicit (c_a, c_b) assignment per variant; when set, overrides the seeded
  // walk over the 81 ordered pairs.
  std::optional<std::vector<GridPair>> pairs;

  [[nodiscard]] std::size_t total_queries() const { return variant_count * queries_per_variant; }
  void validate() const;
  [[nodiscard]] nlohmann::json to_json() const;
  static ExpansionConfig from_json(const nlohmann::json& j);
};

// Retail template: functional hasSpend, VIPCustomer defined by a
// strict threshold, ActiveVIP = VIPCustomer and ActiveCustomer, ActiveCustomer
// disjoint from Blacklisted, two customers c_a and c_b.
std::string mixed_template_turtle(const ExpansionConfig& cfg, const GridPair& pair, std::string_view suffix);

// The six membership questions (VIPCustomer?, ActiveVIP?, Blacklisted? for c_a
// then c_b); the first `count` are kept.
std::vector<oracle::Query> mixed_template_queries(const ExpansionConfig& cfg, std::string_view scenario_id,
                                                  std::string_view suffix, std::size_t count);

// The reference scenario: c_a = (below, active) spending 500 and
// c_b = (above, active) spending 1500 against threshold 1000.
Scenario reference_scenario();

// The 81 ordered grid pairs shuffled deterministically from the seed.
std::vector<GridPair> seeded_pair_order(std::uint64_t seed);

// Emits variant_count scenarios gen00..genNN. Each must admit at least one
// query whose gold answer is "no"; candidates failing that are skipped.
std::vector<Scenario> generate_expansion(const ExpansionConfig& cfg);

// The grid pair behind each generated scenario id, as chosen by generate_expansion.
std::vector<GridPair> selected_pairs(const ExpansionConfig& cfg);

// --- bundles ------------------------------------------------------------------

// <dir>/<scenario_id>/{scenario.ttl, queries.json, gold.json?} plus <dir>/manifest.json.
nlohmann::json queries_to_json(const std::vector<oracle::Query>& queries);

nlohmann::json bundle_manifest(const std::vector<Scenario>& scenarios, const nlohmann::json& extra);

void write_bundle(const std::filesystem::path& dir, const std::vector<Scenario>& scenarios,
                  const nlohmann::json& manifest_extra);

// Loads, extracts and validates every scenario directory, sorted by id.
// Category and provenance come from manifest.json when listed there.
std::vector<Scenario> load_bundle(const std::filesystem::path& dir, std::vector<std::string>* warnings = nullptr);

// Writes gold.json for every scenario (audits with the built-in reasoner) and
// returns the number of gold answers written.
std::size_t audit_bundle(const std::filesystem::path& dir, std::vector<Scenario>& scenarios);

}  // namespace owlaudit::scenarios
