#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "owlaudit/stats.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace owlaudit::stats;
using StatsRun = owlaudit::stats::Run;
using owlaudit::harness::MalformedAnswer;
using owlaudit::harness::ModelAnswer;
using owlaudit::harness::ParsedAnswer;
using owlaudit::testing::transcript;

namespace {

ModelAnswer ans(Answer a) { return ParsedAnswer{a, ""}; }

// n transcripts q000.. with gold "no"; those listed in `right` are answered correctly.
StatsRun run_with(const std::string& label, std::size_t n, const std::vector<bool>& right) {
  StatsRun r{label, {}};
  for (std::size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "s.q%03zu", i);
    r.transcripts.push_back(transcript(id, Answer::No, right[i] ? ans(Answer::No) : ans(Answer::Unknown)));
  }
  return r;
}

std::map<std::string, Answer> golds_of(const Run& r) {
  std::map<std::string, Answer> g;
  for (const auto& t : r.transcripts) g[t.query_id] = t.gold;
  return g;
}

double pp(double x) { return std::round(x * 1000.0) / 10.0; }

}  // namespace

TEST(Stats, WilsonReproducesReportedRows) {
  struct Row {
    std::uint64_t k;
    double lo, hi;
  };
  for (Row row : {Row{79, 36.8, 51.2}, Row{147, 75.4, 86.6}, Row{121, 60.1, 73.7}, Row{176, 94.4, 99.1}}) {
    auto ci = wilson_interval(row.k, 180);
    EXPECT_DOUBLE_EQ(pp(ci.lo), row.lo) << row.k;
    EXPECT_DOUBLE_EQ(pp(ci.hi), row.hi) << row.k;
  }
}

TEST(Stats, WilsonMatchesTextbookFormula) {
  for (std::uint64_t n = 1; n <= 60; ++n) {
    for (std::uint64_t k = 0; k <= n; ++k) {
      auto ci = wilson_interval(k, n);
      auto [lo, hi] = owlaudit::testing::wilson_oracle(k, n);
      ASSERT_NEAR(ci.lo, lo, 1e-12) << k << "/" << n;
      ASSERT_NEAR(ci.hi, hi, 1e-12) << k << "/" << n;
    }
  }
}

TEST(Stats, WilsonBoundaries) {
  auto zero = wilson_interval(0, 10);
  EXPECT_EQ(zero.lo, 0.0);
  EXPECT_GT(zero.hi, 0.0);
  auto all = wilson_interval(10, 10);
  EXPECT_EQ(all.hi, 1.0);
  EXPECT_THROW(wilson_interval(0, 0), StatsError);
  EXPECT_THROW(wilson_interval(5, 4), StatsError);
  EXPECT_THROW(wilson_interval(1, 4, 0.0), StatsError);
  auto wide = wilson_interval(50, 100, 0.01);
  auto narrow = wilson_interval(50, 100, 0.05);
  EXPECT_LT(wide.lo, narrow.lo);
  EXPECT_GT(wide.hi, narrow.hi);
}

TEST(StatsProperty, WilsonMonotoneInK) {
  for (std::uint64_t n = 1; n <= 50; ++n) {
    Interval prev = wilson_interval(0, n);
    for (std::uint64_t k = 1; k <= n; ++k) {
      Interval cur = wilson_interval(k, n);
      ASSERT_GE(cur.lo, prev.lo) << k << "/" << n;
      ASSERT_GE(cur.hi, prev.hi) << k << "/" << n;
      double p = static_cast<double>(k) / n;
      ASSERT_LE(cur.lo, p);
      ASSERT_GE(cur.hi, p);
      prev = cur;
    }
  }
}

TEST(Stats, McNemarMatchesBruteForceOracle) {
  for (std::uint64_t n = 0; n <= 200; ++n) {
    for (std::uint64_t b = 0; b <= n; b += (n > 60 ? 7 : 1)) {
      ASSERT_EQ(mcnemar_exact_rational(b, n - b), owlaudit::testing::mcnemar_oracle(b, n - b)) << b << "," << n - b;
    }
  }
}

TEST(StatsProperty, McNemarSymmetric) {
  for (std::uint64_t b = 0; b <= 50; ++b)
    for (std::uint64_t c = 0; c <= 50; ++c) ASSERT_EQ(mcnemar_exact_rational(b, c), mcnemar_exact_rational(c, b));
}

TEST(Stats, McNemarExamples) {
  EXPECT_DOUBLE_EQ(owlaudit::testing::round_sig(mcnemar_exact(68, 0), 2), 6.8e-21);
  EXPECT_DOUBLE_EQ(owlaudit::testing::round_sig(mcnemar_exact(56, 1), 2), 8.0e-16);
  EXPECT_DOUBLE_EQ(owlaudit::testing::round_sig(mcnemar_exact(5, 31), 2), 1.3e-5);
  EXPECT_DOUBLE_EQ(owlaudit::testing::round_sig(mcnemar_exact(97, 0), 2), 1.3e-29);
  EXPECT_EQ(mcnemar_exact(1, 1), 1.0);
  EXPECT_EQ(mcnemar_exact(0, 0), 1.0);
  EXPECT_EQ(mcnemar_exact_rational(0, 2), boost::multiprecision::cpp_rational(1, 2));
  EXPECT_GT(mcnemar_exact_rational(2000, 0), 0);
  EXPECT_EQ(mcnemar_exact(2000, 0), 0.0);
}

TEST(Stats, Bonferroni) {
  EXPECT_DOUBLE_EQ(bonferroni(1.3e-5, 5), 6.5e-5);
  EXPECT_EQ(bonferroni(std::vector<double>{0.5, 0.5}), (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(bonferroni(std::vector<double>{0.002}), (std::vector<double>{0.002}));
  EXPECT_THROW(bonferroni(std::vector<double>{}), StatsError);
  EXPECT_THROW(bonferroni(std::vector<double>{0.0}), StatsError);
  EXPECT_THROW(bonferroni(std::vector<double>{1.5}), StatsError);
}

TEST(Stats, TaxonomyExamples) {
  EXPECT_EQ(classify_error(Answer::No, ans(Answer::Unknown)), Taxonomy::Overcautious);
  EXPECT_EQ(classify_error(Answer::Yes, ans(Answer::Unknown)), Taxonomy::Overcautious);
  EXPECT_EQ(classify_error(Answer::Yes, ans(Answer::No)), Taxonomy::Inversion);
  EXPECT_EQ(classify_error(Answer::No, ans(Answer::Yes)), Taxonomy::Inversion);
  EXPECT_EQ(classify_error(Answer::Unknown, ans(Answer::No)), Taxonomy::HallucinatedCertainty);
  EXPECT_EQ(classify_error(Answer::No, MalformedAnswer{"{"}), Taxonomy::Malformed);
  EXPECT_EQ(classify_error(Answer::Unknown, ans(Answer::Unknown)), Taxonomy::Correct);
  for (Taxonomy t : kAllLabels) EXPECT_EQ(parse_taxonomy(to_string(t)), t);
  EXPECT_THROW(parse_taxonomy("rude"), StatsError);
}

TEST(Stats, TaxonomyPartition) {
  const std::vector<ModelAnswer> finals = {ans(Answer::Yes), ans(Answer::No), ans(Answer::Unknown), MalformedAnswer{}};
  std::map<Taxonomy, int> counts;
  for (Answer g : {Answer::Yes, Answer::No, Answer::Unknown})
    for (const auto& f : finals) ++counts[classify_error(g, f)];
  EXPECT_EQ(counts[Taxonomy::Correct], 3);
  EXPECT_EQ(counts[Taxonomy::Overcautious], 2);
  EXPECT_EQ(counts[Taxonomy::HallucinatedCertainty], 2);
  EXPECT_EQ(counts[Taxonomy::Inversion], 2);
  EXPECT_EQ(counts[Taxonomy::Malformed], 3);
}

TEST(Stats, SummaryOfDirectRow) {
  std::vector<bool> right(180, false);
  for (std::size_t i = 0; i < 79; ++i) right[i] = true;
  StatsRun r = run_with("direct", 180, right);
  auto s = summarize_run(r, golds_of(r));
  EXPECT_EQ(s.faithfulness.correct, 79u);
  EXPECT_EQ(pp(s.faithfulness.point), 43.9);
  EXPECT_EQ(pp(s.faithfulness.wilson_lo), 36.8);
  EXPECT_EQ(pp(s.faithfulness.wilson_hi), 51.2);
  EXPECT_EQ(s.taxonomy.at(Taxonomy::Overcautious), 101u);
  EXPECT_EQ(s.taxonomy.size(), kAllLabels.size());
  EXPECT_EQ(s.no_to_unknown, 101u);
  EXPECT_EQ(s.rounds_until_correct.at(0), 79u);
  EXPECT_EQ(s.never_correct, 101u);
  EXPECT_DOUBLE_EQ(s.mean_rounds, 1.0);
  EXPECT_DOUBLE_EQ(s.mean_latency_ms, 100.0);
  EXPECT_DOUBLE_EQ(s.total_wall_clock_ms, 18000.0);
  EXPECT_EQ(s.by_category.at("mixed").total, 180u);
}

TEST(Stats, RoundsAndLatency) {
  StatsRun r{"naive_repair", {}};
  r.transcripts.push_back(transcript("s.a", Answer::No, ans(Answer::No), 1, 10.0));
  r.transcripts.push_back(transcript("s.b", Answer::No, ans(Answer::No), 3, 20.0));
  r.transcripts.push_back(transcript("s.c", Answer::No, ans(Answer::Unknown), 4, 30.0, "owa_trap"));
  auto s = summarize_run(r, golds_of(r));
  EXPECT_EQ(s.rounds_until_correct[0], 1u);
  EXPECT_EQ(s.rounds_until_correct[1], 0u);
  EXPECT_EQ(s.rounds_until_correct[2], 1u);
  EXPECT_EQ(s.never_correct, 1u);
  EXPECT_NEAR(s.mean_rounds, 8.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.mean_latency_ms, (10.0 + 60.0 + 120.0) / 8.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.total_wall_clock_ms, 190.0);
  EXPECT_EQ(s.by_category.at("owa_trap").correct, 0u);
}

TEST(Stats, KeyMismatchIsAnError) {
  StatsRun r = run_with("direct", 3, {true, false, true});
  auto golds = golds_of(r);
  golds["s.extra"] = Answer::Yes;
  EXPECT_THROW(summarize_run(r, golds), StatsError);
  StatsRun dup = r;
  dup.transcripts.push_back(dup.transcripts.front());
  EXPECT_THROW(summarize_run(dup, golds_of(r)), StatsError);
  auto flipped = golds_of(r);
  flipped["s.q000"] = Answer::Yes;
  EXPECT_THROW(summarize_run(r, flipped), StatsError);
  StatsRun shorter = run_with("naive_repair", 2, {true, true});
  EXPECT_THROW(compare_runs(r, shorter), StatsError);
}

TEST(Stats, PairedRunsRecoverDiscordants) {
  std::vector<bool> first(180, false), second(180, false);
  for (std::size_t i = 0; i < 79; ++i) first[i] = second[i] = true;
  for (std::size_t i = 79; i < 79 + 97; ++i) second[i] = true;
  StatsRun a = run_with("direct", 180, first);
  StatsRun b = run_with("cx_repair_verdict_only", 180, second);
  auto pr = compare_runs(a, b);
  EXPECT_EQ(pr.b, 97u);
  EXPECT_EQ(pr.c, 0u);
  EXPECT_EQ(format_sig(pr.p_raw), "1.3e-29");
  EXPECT_EQ(std::round(pr.delta_pp * 10) / 10, 53.9);
  auto rev = compare_runs(b, a);
  EXPECT_EQ(rev.b, 0u);
  EXPECT_EQ(rev.c, 97u);
  EXPECT_LT(rev.delta_pp, 0);
}

TEST(Stats, IdenticalRunsHaveNoDiscordants) {
  StatsRun a = run_with("direct", 10, std::vector<bool>(10, true));
  StatsRun b = a;
  b.label = "naive_repair";
  auto pr = compare_runs(a, b);
  EXPECT_EQ(pr.b, 0u);
  EXPECT_EQ(pr.c, 0u);
  EXPECT_EQ(pr.p_raw, 1.0);
  EXPECT_EQ(pr.delta_pp, 0.0);
}

TEST(Stats, AggregateAppliesFamilyCorrection) {
  std::vector<bool> x(40, false), y(40, true), z(40, false);
  for (std::size_t i = 0; i < 20; ++i) z[i] = true;
  std::vector<StatsRun> runs = {run_with("direct", 40, x), run_with("naive_repair", 40, y), run_with("cx_repair_hint", 40, z)};
  auto golds = golds_of(runs[0]);
  auto report = aggregate(runs, golds, {{"direct", "naive_repair"}, {"direct", "cx_repair_hint"}});
  ASSERT_EQ(report.pairs.size(), 2u);
  EXPECT_EQ(report.query_count, 40u);
  for (const auto& p : report.pairs) EXPECT_DOUBLE_EQ(p.p_bonferroni, std::min(1.0, 2 * p.p_raw));
  auto back = StatsReport::from_json(report.to_json());
  EXPECT_EQ(back.to_json(), report.to_json());
  EXPECT_EQ(report.to_json().at("family_size"), 2);
  EXPECT_THROW(aggregate(runs, golds, {{"direct", "cx_repair_verdict_only"}}), StatsError);
  EXPECT_THROW(aggregate({}, golds, {}), StatsError);
  EXPECT_EQ(golds_from_runs(runs), golds);
}

TEST(Stats, FormatSig) {
  EXPECT_EQ(format_sig(6.8e-21), "6.8e-21");
  EXPECT_EQ(format_sig(1.3e-5), "1.3e-05");
  EXPECT_EQ(format_sig(0.5), "0.50");
  EXPECT_EQ(format_sig(1.0), "1.0");
  EXPECT_EQ(format_sig(0.0123, 3), "0.0123");
}
