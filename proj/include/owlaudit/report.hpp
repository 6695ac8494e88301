#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "owlaudit/stats.hpp"

namespace owlaudit::report {

enum class Format { Markdown, Svg, Csv, Json };

Format parse_format(std::string_view s);  // md, svg, csv, json

struct Artifact {
  std::string name;  // file name inside the output directory
  std::string content;
};

// Faithfulness with pairwise McNemar, latency and rounds, rounds-until-correct,
// taxonomy and per-category tables.
std::string markdown(const stats::StatsReport& r);

std::string faithfulness_csv(const stats::StatsReport& r);
std::string pairwise_csv(const stats::StatsReport& r);
std::string taxonomy_csv(const stats::StatsReport& r);

std::string category_heatmap_svg(const stats::StatsReport& r);
std::string rounds_histogram_svg(const stats::StatsReport& r);
std::string taxonomy_bars_svg(const stats::StatsReport& r);

// Renders everything in memory. Throws stats::StatsError on an empty analysis.
std::vector<Artifact> render(const stats::StatsReport& r, const std::set<Format>& formats);

// Writes every artifact atomically; nothing is written if rendering fails.
std::vector<std::filesystem::path> render_report(const stats::StatsReport& r, const std::filesystem::path& out_dir,
                                                 const std::set<Format>& formats);

// Display name used in tables ("cx_repair (hint)" and so on).
std::string display_name(const std::string& label);

}  // namespace owlaudit::report
