#include "owlaudit/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include <boost/math/distributions/normal.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace owlaudit::stats {

namespace mp = boost::multiprecision;
using Float = mp::cpp_bin_float_50;
using nlohmann::json;

namespace {

// The decimal the user wrote rather than the binary double nearest to it.
Float to_float(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return Float(std::string(buf, res.ptr));
}

}  // namespace

Interval wilson_interval(std::uint64_t k, std::uint64_t n, double alpha) {
  if (n == 0) throw StatsError("wilson_interval: n must be at least 1");
  if (k > n) throw StatsError("wilson_interval: k exceeds n");
  if (!(alpha > 0.0 && alpha < 1.0)) throw StatsError("wilson_interval: alpha must lie in (0, 1)");

  Float a = to_float(alpha);
  Float z = boost::math::quantile(boost::math::normal_distribution<Float>(), Float(1) - a / 2);
  Float nn(n);
  Float p = Float(k) / nn;
  Float z2 = z * z;
  Float denom = 1 + z2 / nn;
  Float center = (p + z2 / (2 * nn)) / denom;
  Float half = z / denom * mp::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));

  Interval out;
  out.lo = k == 0 ? 0.0 : std::max(0.0, (center - half).convert_to<double>());
  out.hi = k == n ? 1.0 : std::min(1.0, (center + half).convert_to<double>());
  return out;
}

mp::cpp_rational mcnemar_exact_rational(std::uint64_t b, std::uint64_t c) {
  std::uint64_t n = b + c;
  if (n == 0) return 1;
  std::uint64_t m = std::min(b, c);
  if (2 * m >= n) return 1;
  // P(X <= m) = sum_{i<=m} C(n, i) / 2^n, doubled for the two-sided test.
  mp::cpp_int term = 1;
  mp::cpp_int tail = 1;
  for (std::uint64_t i = 0; i < m; ++i) {
    term = term * (n - i) / (i + 1);
    tail += term;
  }
  mp::cpp_int denom = mp::cpp_int(1) << (n - 1);
  mp::cpp_rational p(tail, denom);
  return p > 1 ? mp::cpp_rational(1) : p;
}

double mcnemar_exact(std::uint64_t b, std::uint64_t c) {
  mp::cpp_rational p = mcnemar_exact_rational(b, c);
  Float v = Float(mp::numerator(p)) / Float(mp::denominator(p));
  return v.convert_to<double>();
}

double bonferroni(double p, std::size_t family_size) {
  if (family_size == 0) throw StatsError("bonferroni: empty family");
  if (!(p > 0.0 && p <= 1.0)) throw StatsError("bonferroni: p-value outside (0, 1]");
  return std::min(1.0, p * static_cast<double>(family_size));
}

std::vector<double> bonferroni(const std::vector<double>& p_values) {
  if (p_values.empty()) throw StatsError("bonferroni: empty list of p-values");
  std::vector<double> out;
  out.reserve(p_values.size());
  for (double p : p_values) out.push_back(bonferroni(p, p_values.size()));
  return out;
}

std::string_view to_string(Taxonomy t) {
  switch (t) {
    case Taxonomy::Correct: return "correct";
    case Taxonomy::Overcautious: return "overcautious";
    case Taxonomy::HallucinatedCertainty: return "hallucinated_certainty";
    case Taxonomy::Inversion: return "inversion";
    case Taxonomy::Malformed: return "malformed";
  }
  return "correct";
}

Taxonomy parse_taxonomy(std::string_view s) {
  for (Taxonomy t : kAllLabels)
    if (to_string(t) == s) return t;
  throw StatsError("unknown taxonomy label '" + std::string(s) + "'");
}

Taxonomy classify_error(Answer gold, const harness::ModelAnswer& final) {
  const auto* parsed = std::get_if<harness::ParsedAnswer>(&final);
  if (parsed == nullptr) return Taxonomy::Malformed;
  if (parsed->answer == gold) return Taxonomy::Correct;
  if (gold == Answer::Unknown) return Taxonomy::HallucinatedCertainty;
  if (parsed->answer == Answer::Unknown) return Taxonomy::Overcautious;
  return Taxonomy::Inversion;
}

FaithfulnessResult faithfulness(std::size_t correct, std::size_t total, double alpha) {
  FaithfulnessResult f;
  f.correct = correct;
  f.total = total;
  f.point = static_cast<double>(correct) / static_cast<double>(total);
  auto ci = wilson_interval(correct, total, alpha);
  f.wilson_lo = ci.lo;
  f.wilson_hi = ci.hi;
  return f;
}

namespace {

void check_keys(const Run& run, const std::map<std::string, Answer>& golds) {
  std::set<std::string> seen;
  for (const auto& t : run.transcripts) {
    if (!seen.insert(t.query_id).second) throw StatsError(run.label + ": duplicate transcript for " + t.query_id);
    auto it = golds.find(t.query_id);
    if (it == golds.end()) throw StatsError(run.label + ": no gold answer for " + t.query_id);
    if (it->second != t.gold) throw StatsError(run.label + ": transcript gold disagrees with gold file for " + t.query_id);
  }
  if (seen.size() != golds.size())
    throw StatsError(run.label + ": covers " + std::to_string(seen.size()) + " of " + std::to_string(golds.size()) +
                     " queries");
}

}  // namespace

RunSummary summarize_run(const Run& run, const std::map<std::string, Answer>& golds, double alpha) {
  if (run.transcripts.empty()) throw StatsError(run.label + ": no transcripts");
  check_keys(run, golds);

  RunSummary s;
  s.label = run.label;
  for (Taxonomy t : kAllLabels) s.taxonomy[t] = 0;
  s.rounds_until_correct.assign(4, 0);

  std::size_t correct = 0;
  std::size_t rounds = 0;
  double latency = 0.0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> cat;
  for (const auto& t : run.transcripts) {
    Answer gold = golds.at(t.query_id);
    Taxonomy label = classify_error(gold, t.final);
    ++s.taxonomy[label];
    bool ok = label == Taxonomy::Correct;
    correct += ok ? 1 : 0;
    auto& c = cat[t.category];
    c.first += ok ? 1 : 0;
    ++c.second;

    if (auto r = t.rounds_until_correct()) {
      if (*r > s.rounds_until_correct.size()) s.rounds_until_correct.resize(*r, 0);
      ++s.rounds_until_correct[*r - 1];
    } else {
      ++s.never_correct;
    }
    rounds += t.rounds_used;
    for (const auto& r : t.rounds) latency += r.latency_ms;
    if (t.error) ++s.transport_errors;
    if (gold == Answer::No && is_correct(t.final, Answer::Unknown)) ++s.no_to_unknown;
  }

  std::size_t n = run.transcripts.size();
  s.faithfulness = faithfulness(correct, n, alpha);
  s.mean_rounds = static_cast<double>(rounds) / static_cast<double>(n);
  s.mean_latency_ms = rounds == 0 ? 0.0 : latency / static_cast<double>(rounds);
  s.total_wall_clock_ms = latency;
  for (const auto& [name, counts] : cat) s.by_category[name] = faithfulness(counts.first, counts.second, alpha);
  return s;
}

PairwiseResult compare_runs(const Run& first, const Run& second) {
  std::map<std::string, bool> a;
  for (const auto& t : first.transcripts) a[t.query_id] = t.correct();
  std::map<std::string, bool> b;
  for (const auto& t : second.transcripts) b[t.query_id] = t.correct();
  if (a.size() != b.size() || !std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) {
        return x.first == y.first;
      }))
    throw StatsError("cannot pair " + first.label + " with " + second.label + ": query sets differ");
  if (a.empty()) throw StatsError("cannot pair empty runs");

  PairwiseResult r;
  r.first = first.label;
  r.second = second.label;
  std::size_t right_a = 0;
  std::size_t right_b = 0;
  for (const auto& [id, ok_a] : a) {
    bool ok_b = b.at(id);
    right_a += ok_a ? 1 : 0;
    right_b += ok_b ? 1 : 0;
    if (!ok_a && ok_b) ++r.b;
    if (ok_a && !ok_b) ++r.c;
  }
  r.p_raw = mcnemar_exact(r.b, r.c);
  r.p_bonferroni = r.p_raw;
  r.delta_pp = 100.0 * (static_cast<double>(right_b) - static_cast<double>(right_a)) / static_cast<double>(a.size());
  return r;
}

std::map<std::string, Answer> golds_from_runs(const std::vector<Run>& runs) {
  std::map<std::string, Answer> out;
  for (const auto& run : runs) {
    for (const auto& t : run.transcripts) {
      auto [it, inserted] = out.emplace(t.query_id, t.gold);
      if (!inserted && it->second != t.gold) throw StatsError("conflicting gold answers for " + t.query_id);
    }
  }
  return out;
}

StatsReport aggregate(const std::vector<Run>& runs, const std::map<std::string, Answer>& golds,
                      const std::vector<std::pair<std::string, std::string>>& pairs, double alpha) {
  if (runs.empty()) throw StatsError("nothing to aggregate");
  StatsReport report;
  report.alpha = alpha;
  report.query_count = golds.size();
  std::map<std::string, const Run*> by_label;
  for (const auto& run : runs) {
    if (!by_label.emplace(run.label, &run).second) throw StatsError("two runs share the label " + run.label);
    report.runs.push_back(summarize_run(run, golds, alpha));
  }
  for (const auto& [x, y] : pairs) {
    auto a = by_label.find(x);
    auto b = by_label.find(y);
    if (a == by_label.end()) throw StatsError("pair refers to missing run " + x);
    if (b == by_label.end()) throw StatsError("pair refers to missing run " + y);
    report.pairs.push_back(compare_runs(*a->second, *b->second));
  }
  for (auto& p : report.pairs) p.p_bonferroni = bonferroni(p.p_raw, report.pairs.size());
  return report;
}

// --- serialization --------------------------------------------------------------------

namespace {

json to_json(const FaithfulnessResult& f) {
  return {{"correct", f.correct}, {"total", f.total}, {"point", f.point}, {"wilson_lo", f.wilson_lo},
          {"wilson_hi", f.wilson_hi}};
}

FaithfulnessResult faithfulness_from_json(const json& j) {
  FaithfulnessResult f;
  f.correct = j.at("correct").get<std::size_t>();
  f.total = j.at("total").get<std::size_t>();
  f.point = j.at("point").get<double>();
  f.wilson_lo = j.at("wilson_lo").get<double>();
  f.wilson_hi = j.at("wilson_hi").get<double>();
  return f;
}

}  // namespace

json StatsReport::to_json() const {
  json jr = json::array();
  for (const auto& r : runs) {
    json tax = json::object();
    for (const auto& [k, v] : r.taxonomy) tax[std::string(stats::to_string(k))] = v;
    json cats = json::object();
    for (const auto& [k, v] : r.by_category) cats[k] = stats::to_json(v);
    jr.push_back({{"label", r.label},
                  {"faithfulness", stats::to_json(r.faithfulness)},
                  {"taxonomy", tax},
                  {"rounds_until_correct", r.rounds_until_correct},
                  {"never_correct", r.never_correct},
                  {"mean_rounds", r.mean_rounds},
                  {"mean_latency_ms", r.mean_latency_ms},
                  {"total_wall_clock_ms", r.total_wall_clock_ms},
                  {"transport_errors", r.transport_errors},
                  {"no_to_unknown", r.no_to_unknown},
                  {"by_category", cats}});
  }
  json jp = json::array();
  for (const auto& p : pairs) {
    jp.push_back({{"first", p.first},
                  {"second", p.second},
                  {"b", p.b},
                  {"c", p.c},
                  {"p_raw", p.p_raw},
                  {"p_bonferroni", p.p_bonferroni},
                  {"delta_pp", p.delta_pp}});
  }
  return {{"alpha", alpha}, {"query_count", query_count}, {"family_size", pairs.size()}, {"runs", jr}, {"pairs", jp}};
}

StatsReport StatsReport::from_json(const json& j) {
  StatsReport r;
  try {
    r.alpha = j.at("alpha").get<double>();
    r.query_count = j.at("query_count").get<std::size_t>();
    for (const auto& jr : j.at("runs")) {
      RunSummary s;
      s.label = jr.at("label").get<std::string>();
      s.faithfulness = faithfulness_from_json(jr.at("faithfulness"));
      for (Taxonomy t : kAllLabels) s.taxonomy[t] = jr.at("taxonomy").value(std::string(stats::to_string(t)), 0);
      s.rounds_until_correct = jr.at("rounds_until_correct").get<std::vector<std::size_t>>();
      s.never_correct = jr.at("never_correct").get<std::size_t>();
      s.mean_rounds = jr.at("mean_rounds").get<double>();
      s.mean_latency_ms = jr.at("mean_latency_ms").get<double>();
      s.total_wall_clock_ms = jr.at("total_wall_clock_ms").get<double>();
      s.transport_errors = jr.value("transport_errors", 0);
      s.no_to_unknown = jr.value("no_to_unknown", 0);
      for (const auto& [k, v] : jr.at("by_category").items()) s.by_category[k] = faithfulness_from_json(v);
      r.runs.push_back(std::move(s));
    }
    for (const auto& jp : j.at("pairs")) {
      PairwiseResult p;
      p.first = jp.at("first").get<std::string>();
      p.second = jp.at("second").get<std::string>();
      p.b = jp.at("b").get<std::size_t>();
      p.c = jp.at("c").get<std::size_t>();
      p.p_raw = jp.at("p_raw").get<double>();
      p.p_bonferroni = jp.at("p_bonferroni").get<double>();
      p.delta_pp = jp.at("delta_pp").get<double>();
      r.pairs.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw StatsError(std::string("invalid analysis file: ") + e.what());
  }
  return r;
}

std::string format_sig(double v, int digits) {
  if (v == 0.0) return "0";
  char buf[64];
  if (std::fabs(v) >= 1e-3 && std::fabs(v) < 1e6) {
    std::snprintf(buf, sizeof buf, "%#.*g", digits, v);
    return buf;
  }
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
  return buf;
}

}  // namespace owlaudit::stats
