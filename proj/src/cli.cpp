#include "owlaudit/cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "owlaudit/backends.hpp"
#include "owlaudit/decimal.hpp"
#include "owlaudit/harness.hpp"
#include "owlaudit/io.hpp"
#include "owlaudit/model.hpp"
#include "owlaudit/oracle.hpp"
#include "owlaudit/report.hpp"
#include "owlaudit/scenarios.hpp"
#include "owlaudit/stats.hpp"
#include "owlaudit/turtle.hpp"
#include "owlaudit/version.hpp"

namespace owlaudit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_dir(const fs::path& p, std::string_view what) {
  if (!fs::is_directory(p)) throw ValidationError(std::string(what) + " not found: " + p.string());
}

void require_file(const fs::path& p, std::string_view what) {
  if (!fs::is_regular_file(p)) throw ValidationError(std::string(what) + " not found: " + p.string());
}

std::vector<scenarios::Scenario> load(const fs::path& bundle) {
  require_dir(bundle, "bundle directory");
  std::vector<std::string> warnings;
  auto out = scenarios::load_bundle(bundle, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return out;
}

// --- gen --------------------------------------------------------------------------------

struct GenArgs {
  fs::path out;
  fs::path config;
  std::size_t variants = 30;
  std::uint64_t seed = 7;
  std::string threshold;
  std::string offset;
  std::size_t queries = 6;
  bool audit = false;
};

int cmd_gen(const GenArgs& a, const CLI::App& sub) {
  scenarios::ExpansionConfig cfg;
  if (!a.config.empty()) {
    require_file(a.config, "expansion config");
    try {
      cfg = scenarios::ExpansionConfig::from_json(io::read_config(a.config));
    } catch (const std::exception& e) {
      throw ValidationError("invalid expansion config " + a.config.string() + ": " + e.what());
    }
  }
  if (sub.count("--variants") > 0) cfg.variant_count = a.variants;
  if (sub.count("--seed") > 0) cfg.seed = a.seed;
  if (sub.count("--queries-per-variant") > 0) cfg.queries_per_variant = a.queries;
  if (!a.threshold.empty()) cfg.threshold = Decimal::parse(a.threshold);
  if (!a.offset.empty()) cfg.spend_offset = Decimal::parse(a.offset);
  cfg.validate();

  auto generated = scenarios::generate_expansion(cfg);
  scenarios::write_bundle(a.out, generated, {{"expansion_config", cfg.to_json()}});
  std::size_t queries = 0;
  for (const auto& s : generated) queries += s.queries.size();
  std::cout << "wrote " << generated.size() << " scenarios, " << queries << " queries to " << a.out.string() << "\n";
  if (a.audit) {
    std::size_t n = scenarios::audit_bundle(a.out, generated);
    std::cout << "wrote " << n << " gold answers\n";
  }
  return kExitOk;
}

// --- audit ------------------------------------------------------------------------------

int cmd_audit(const fs::path& bundle) {
  auto loaded = load(bundle);
  if (loaded.empty()) throw ValidationError("bundle contains no scenarios: " + bundle.string());
  std::size_t n = scenarios::audit_bundle(bundle, loaded);
  std::map<std::string, std::size_t> hist;
  std::size_t mismatches = 0;
  for (const auto& s : loaded) {
    for (const auto& g : *s.gold) ++hist[std::string(oracle::to_string(g.gold))];
    for (const auto& q : s.queries) {
      if (!q.expected) continue;
      for (const auto& g : *s.gold) {
        if (g.id == q.id && g.gold != *q.expected) {
          ++mismatches;
          std::cerr << "warning: " << q.id << " expected " << oracle::to_string(*q.expected) << " but reasoner says "
                    << oracle::to_string(g.gold) << "\n";
        }
      }
    }
  }
  std::cout << "audited " << loaded.size() << " scenarios, " << n << " gold answers (yes " << hist["yes"] << ", no "
            << hist["no"] << ", unknown " << hist["unknown"] << ")\n";
  if (mismatches > 0) std::cout << mismatches << " hand-authored labels disagree with the reasoner\n";
  return kExitOk;
}

// --- run ----------------------------------------------------------------------------------

struct RunArgs {
  fs::path bundle;
  std::string mode;
  fs::path backend;
  fs::path out;
  std::size_t parallelism = 1;
  std::size_t budget = 3;
  std::uint64_t seed = 7;
  std::string followup_role = "user";
};

int cmd_run(const RunArgs& a) {
  harness::Mode mode = harness::parse_mode(a.mode);
  require_file(a.backend, "backend config");
  auto cfg = harness::load_backend_config(a.backend);
  if (a.parallelism == 0) throw ValidationError("--parallelism must be at least 1");
  auto loaded = load(a.bundle);
  auto golds = harness::gold_map(loaded);

  harness::RunOptions opt;
  opt.budget = a.budget;
  opt.parallelism = a.parallelism;
  opt.seed = a.seed;
  opt.followup_role = a.followup_role;
  auto factory = harness::make_backend_factory(cfg, golds, a.seed);
  auto result = harness::run_batch(loaded, golds, mode, factory, opt, cfg.to_json());

  io::atomic_write(a.out, harness::to_jsonl(result.transcripts));
  fs::path manifest = a.out;
  manifest += ".manifest.json";
  io::atomic_write(manifest, io::dump_json(result.manifest));

  std::size_t correct = 0;
  for (const auto& t : result.transcripts) correct += t.correct() ? 1 : 0;
  std::cout << "wrote " << result.transcripts.size() << " transcripts to " << a.out.string() << " (" << correct << "/"
            << result.transcripts.size() << " correct, " << result.manifest["error_count"].get<std::size_t>()
            << " transport errors)\n";
  return kExitOk;
}

// --- analyze ------------------------------------------------------------------------------

struct AnalyzeArgs {
  std::vector<fs::path> results;
  std::vector<std::string> pairs;
  fs::path bundle;
  fs::path out = "analysis.json";
  double alpha = 0.05;
};

int cmd_analyze(const AnalyzeArgs& a) {
  std::vector<stats::Run> runs;
  for (const auto& p : a.results) {
    require_file(p, "results file");
    auto transcripts = harness::read_jsonl(io::read_file(p));
    if (transcripts.empty()) throw ValidationError("results file is empty: " + p.string());
    harness::Mode mode = transcripts.front().mode;
    for (const auto& t : transcripts)
      if (t.mode != mode) throw ValidationError("results file mixes modes: " + p.string());
    runs.push_back({std::string(harness::to_string(mode)), std::move(transcripts)});
  }

  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& spec : a.pairs) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw ValidationError("--pair expects first:second, got " + spec);
    pairs.emplace_back(std::string(harness::to_string(harness::parse_mode(spec.substr(0, colon)))),
                       std::string(harness::to_string(harness::parse_mode(spec.substr(colon + 1)))));
  }

  auto golds = stats::golds_from_runs(runs);
  if (!a.bundle.empty()) {
    auto from_bundle = harness::gold_map(load(a.bundle));
    if (from_bundle != golds) throw ValidationError("transcript gold answers do not match the bundle's gold.json files");
  }
  auto report = stats::aggregate(runs, golds, pairs, a.alpha);
  io::atomic_write(a.out, io::dump_json(report.to_json()));
  std::cout << report::markdown(report);
  return kExitOk;
}

// --- report -------------------------------------------------------------------------------

int cmd_report(const fs::path& analysis, const fs::path& out, const std::vector<std::string>& formats) {
  require_file(analysis, "analysis file");
  json j = json::parse(io::read_file(analysis), nullptr, false);
  if (j.is_discarded()) throw ValidationError("analysis file is not valid JSON: " + analysis.string());
  auto r = stats::StatsReport::from_json(j);
  std::set<report::Format> fmts;
  for (const auto& f : formats) fmts.insert(report::parse_format(f));
  auto written = report::render_report(r, out, fmts);
  for (const auto& p : written) std::cout << p.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit LLM answers to OWL 2 DL membership questions against a reasoner"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate the seeded expansion set as a scenario bundle");
  g->add_option("--out", gen.out, "Output bundle directory")->required();
  g->add_option("--config", gen.config, "Expansion config (JSON or TOML)");
  g->add_option("--variants", gen.variants, "Number of variants")->capture_default_str();
  g->add_option("--seed", gen.seed, "Seed for the variant walk")->capture_default_str();
  g->add_option("--threshold", gen.threshold, "VIP spend threshold (decimal)");
  g->add_option("--offset", gen.offset, "Spend offset for the below/above buckets (decimal)");
  g->add_option("--queries-per-variant", gen.queries, "Questions kept per variant (1-6)")->capture_default_str();
  g->add_flag("--audit", gen.audit, "Also write gold.json files");

  fs::path audit_dir;
  auto* au = app.add_subcommand("audit", "Compute reasoner gold answers for every scenario in a bundle");
  au->add_option("bundle", audit_dir, "Bundle directory")->required();

  RunArgs run;
  auto* ru = app.add_subcommand("run", "Run every query of a bundle against a model backend");
  ru->add_option("bundle", run.bundle, "Bundle directory")->required();
  ru->add_option("--mode", run.mode, "direct, naive_repair, cx_repair_hint or cx_repair_verdict_only")->required();
  ru->add_option("--backend", run.backend, "Backend config (JSON or TOML)")->required();
  ru->add_option("--out", run.out, "Results file (JSON Lines)")->required();
  ru->add_option("--parallelism", run.parallelism, "Concurrent queries")->capture_default_str();
  ru->add_option("--budget", run.budget, "Follow-ups allowed after the first answer")->capture_default_str();
  ru->add_option("--seed", run.seed, "Seed for scripted backends")->capture_default_str();
  ru->add_option("--followup-role", run.followup_role, "Chat role used for follow-up prompts")->capture_default_str();

  AnalyzeArgs an;
  auto* az = app.add_subcommand("analyze", "Faithfulness, taxonomy and paired McNemar tests over result files");
  az->add_option("results", an.results, "Results files (JSON Lines), one per mode")->required();
  az->add_option("--pair", an.pairs, "Paired comparison first:second (repeatable)");
  az->add_option("--bundle", an.bundle, "Cross-check gold answers against this bundle");
  az->add_option("--out", an.out, "Analysis output (JSON)")->capture_default_str();
  az->add_option("--alpha", an.alpha, "Significance level for the Wilson intervals")->capture_default_str();

  fs::path analysis;
  fs::path report_dir;
  std::vector<std::string> formats = {"md", "svg", "csv"};
  auto* rp = app.add_subcommand("report", "Render Markdown tables, SVG charts and CSV from an analysis");
  rp->add_option("analysis", analysis, "Analysis file from analyze")->required();
  rp->add_option("--out", report_dir, "Output directory")->required();
  rp->add_option("--format", formats, "Formats: md, svg, csv, json")->delimiter(',')->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*g) return cmd_gen(gen, *g);
    if (*au) return cmd_audit(audit_dir);
    if (*ru) return cmd_run(run);
    if (*az) return cmd_analyze(an);
    if (*rp) return cmd_report(analysis, report_dir, formats);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const turtle::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const model::ExtractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const scenarios::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const harness::HarnessError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const stats::StatsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DecimalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    std::cerr << "error: invalid JSON input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace owlaudit::cli
