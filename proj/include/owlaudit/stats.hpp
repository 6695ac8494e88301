#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

#include "owlaudit/harness.hpp"

namespace owlaudit::stats {

using harness::Answer;

class StatsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval at the two-sided normal quantile for alpha, evaluated
// in 50-digit binary floating point and rounded to double at the end.
Interval wilson_interval(std::uint64_t k, std::uint64_t n, double alpha = 0.05);

// Two-sided exact McNemar p-value, min(1, 2 P(X <= min(b, c))) with
// X ~ Binomial(b + c, 1/2), as an exact fraction.
boost::multiprecision::cpp_rational mcnemar_exact_rational(std::uint64_t b, std::uint64_t c);
double mcnemar_exact(std::uint64_t b, std::uint64_t c);

// p * m capped at 1, for a family of m = p_values.size() tests.
std::vector<double> bonferroni(const std::vector<double>& p_values);
double bonferroni(double p, std::size_t family_size);

enum class Taxonomy { Correct, Overcautious, HallucinatedCertainty, Inversion, Malformed };

inline constexpr std::array<Taxonomy, 5> kAllLabels = {Taxonomy::Correct, Taxonomy::Overcautious,
                                                       Taxonomy::HallucinatedCertainty, Taxonomy::Inversion,
                                                       Taxonomy::Malformed};

std::string_view to_string(Taxonomy t);
Taxonomy parse_taxonomy(std::string_view s);
Taxonomy classify_error(Answer gold, const harness::ModelAnswer& final);

struct FaithfulnessResult {
  std::size_t correct = 0;
  std::size_t total = 0;
  double point = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
};

FaithfulnessResult faithfulness(std::size_t correct, std::size_t total, double alpha = 0.05);

struct RunSummary {
  std::string label;  // canonical mode name
  FaithfulnessResult faithfulness;
  std::map<Taxonomy, std::size_t> taxonomy;      // every label present, zero counts included
  std::vector<std::size_t> rounds_until_correct;  // [i] = first correct at round i + 1
  std::size_t never_correct = 0;
  double mean_rounds = 0.0;
  double mean_latency_ms = 0.0;  // per round
  double total_wall_clock_ms = 0.0;  // sum of round latencies
  std::size_t transport_errors = 0;
  std::size_t no_to_unknown = 0;  // gold "no" answered "unknown"
  std::map<std::string, FaithfulnessResult> by_category;
};

struct PairwiseResult {
  std::string first;
  std::string second;
  std::size_t b = 0;  // wrong in first, right in second
  std::size_t c = 0;  // right in first, wrong in second
  double p_raw = 1.0;
  double p_bonferroni = 1.0;
  double delta_pp = 0.0;  // second minus first, in percentage points
};

struct StatsReport {
  double alpha = 0.05;
  std::size_t query_count = 0;
  std::vector<RunSummary> runs;
  std::vector<PairwiseResult> pairs;

  [[nodiscard]] nlohmann::json to_json() const;
  static StatsReport from_json(const nlohmann::json& j);
};

struct Run {
  std::string label;
  std::vector<harness::Transcript> transcripts;
};

// Keys of transcripts must equal the keys of golds.
RunSummary summarize_run(const Run& run, const std::map<std::string, Answer>& golds, double alpha = 0.05);

// Discordant pairs between two runs over the same query set. p_bonferroni is
// left equal to p_raw; aggregate() applies the family correction.
PairwiseResult compare_runs(const Run& first, const Run& second);

StatsReport aggregate(const std::vector<Run>& runs, const std::map<std::string, Answer>& golds,
                      const std::vector<std::pair<std::string, std::string>>& pairs, double alpha = 0.05);

// Gold answers carried inside transcripts; throws on conflicting records.
std::map<std::string, Answer> golds_from_runs(const std::vector<Run>& runs);

// "6.8e-21" style, n significant figures.
std::string format_sig(double v, int digits = 2);

}  // namespace owlaudit::stats
