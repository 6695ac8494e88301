#include "owlaudit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "owlaudit/io.hpp"

namespace owlaudit::report {

using stats::StatsReport;
using stats::Taxonomy;

Format parse_format(std::string_view s) {
  if (s == "md" || s == "markdown") return Format::Markdown;
  if (s == "svg") return Format::Svg;
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw stats::StatsError("unknown report format '" + std::string(s) + "' (expected md, svg, csv or json)");
}

std::string display_name(const std::string& label) {
  if (label == "naive_repair") return "naive_repair";
  if (label == "cx_repair_hint") return "cx_repair (hint)";
  if (label == "cx_repair_verdict_only") return "cx_repair (verdict-only)";
  return label;
}

namespace {

std::string short_name(const std::string& label) {
  if (label == "naive_repair") return "naive";
  if (label == "cx_repair_hint") return "cx_v1 (hint)";
  if (label == "cx_repair_verdict_only") return "cx_v3";
  return label;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string signed_fixed(double v, int decimals) {
  std::string s = fixed(v, decimals);
  return s.front() == '-' || s.find_first_not_of("0.") == std::string::npos ? s : "+" + s;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> categories(const StatsReport& r) {
  std::set<std::string> cats;
  for (const auto& run : r.runs)
    for (const auto& [c, _] : run.by_category) cats.insert(c);
  return {cats.begin(), cats.end()};
}

std::size_t bucket_count(const StatsReport& r) {
  std::size_t n = 4;
  for (const auto& run : r.runs) n = std::max(n, run.rounds_until_correct.size());
  return n;
}

std::string pct(double ratio) { return fixed(100.0 * ratio, 1); }

}  // namespace

std::string markdown(const StatsReport& r) {
  std::ostringstream md;
  int ci = static_cast<int>(100.0 * (1.0 - r.alpha) + 0.5);
  md << "## Faithfulness\n\n";
  md << "| Mode | Faithfulness | " << ci << " % CI |\n|---|---:|---:|\n";
  for (const auto& run : r.runs) {
    const auto& f = run.faithfulness;
    md << "| " << display_name(run.label) << " | " << f.correct << "/" << f.total << " = " << pct(f.point)
       << " % | [" << pct(f.wilson_lo) << ", " << pct(f.wilson_hi) << "] |\n";
  }
  if (!r.pairs.empty()) {
    md << "\n## Pairwise McNemar, paired\n\n";
    md << "| Comparison | Δ (pp) | b | c | p | p (Bonferroni ×" << r.pairs.size() << ") |\n";
    md << "|---|---:|---:|---:|---:|---:|\n";
    for (const auto& p : r.pairs) {
      md << "| " << short_name(p.first) << " → " << short_name(p.second) << " | " << signed_fixed(p.delta_pp, 1)
         << " | " << p.b << " | " << p.c << " | " << stats::format_sig(p.p_raw) << " | "
         << stats::format_sig(p.p_bonferroni) << " |\n";
    }
  }

  md << "\n## Latency and query budget\n\n";
  md << "| Mode | Avg. latency | Avg. rounds | Total wall-clock |\n|---|---:|---:|---:|\n";
  for (const auto& run : r.runs) {
    md << "| " << display_name(run.label) << " | " << fixed(run.mean_latency_ms / 1000.0, 2) << " s | "
       << fixed(run.mean_rounds, 2) << " | " << fixed(run.total_wall_clock_ms / 60000.0, 1) << " min |\n";
  }

  std::size_t buckets = bucket_count(r);
  md << "\n## Rounds until correct\n\n| Mode |";
  for (std::size_t i = 1; i <= buckets; ++i) md << " " << i << " |";
  md << " never |\n|---|";
  for (std::size_t i = 0; i <= buckets; ++i) md << "---:|";
  md << "\n";
  for (const auto& run : r.runs) {
    md << "| " << display_name(run.label) << " |";
    for (std::size_t i = 0; i < buckets; ++i)
      md << " " << (i < run.rounds_until_correct.size() ? run.rounds_until_correct[i] : 0) << " |";
    md << " " << run.never_correct << " |\n";
  }

  md << "\n## Error taxonomy\n\n| Mode |";
  for (Taxonomy t : stats::kAllLabels) md << " " << stats::to_string(t) << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < stats::kAllLabels.size(); ++i) md << "---:|";
  md << "\n";
  for (const auto& run : r.runs) {
    md << "| " << display_name(run.label) << " |";
    for (Taxonomy t : stats::kAllLabels) md << " " << run.taxonomy.at(t) << " |";
    md << "\n";
  }

  auto cats = categories(r);
  md << "\n## Faithfulness by category\n\n| Mode |";
  for (const auto& c : cats) md << " " << c << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < cats.size(); ++i) md << "---:|";
  md << "\n";
  for (const auto& run : r.runs) {
    md << "| " << display_name(run.label) << " |";
    for (const auto& c : cats) {
      auto it = run.by_category.find(c);
      if (it == run.by_category.end()) md << " - |";
      else md << " " << pct(it->second.point) << " % (" << it->second.correct << "/" << it->second.total << ") |";
    }
    md << "\n";
  }
  return md.str();
}

std::string faithfulness_csv(const StatsReport& r) {
  std::string out = "mode,correct,total,faithfulness,wilson_lo,wilson_hi,mean_rounds,mean_latency_ms,total_wall_clock_ms\n";
  for (const auto& run : r.runs) {
    const auto& f = run.faithfulness;
    out += csv_field(run.label) + "," + std::to_string(f.correct) + "," + std::to_string(f.total) + "," +
           fixed(f.point, 6) + "," + fixed(f.wilson_lo, 6) + "," + fixed(f.wilson_hi, 6) + "," +
           fixed(run.mean_rounds, 4) + "," + fixed(run.mean_latency_ms, 3) + "," + fixed(run.total_wall_clock_ms, 3) +
           "\n";
  }
  return out;
}

std::string pairwise_csv(const StatsReport& r) {
  std::string out = "first,second,b,c,delta_pp,p_raw,p_bonferroni\n";
  for (const auto& p : r.pairs) {
    char pr[32];
    char pb[32];
    std::snprintf(pr, sizeof pr, "%.6e", p.p_raw);
    std::snprintf(pb, sizeof pb, "%.6e", p.p_bonferroni);
    out += csv_field(p.first) + "," + csv_field(p.second) + "," + std::to_string(p.b) + "," + std::to_string(p.c) +
           "," + fixed(p.delta_pp, 4) + "," + pr + "," + pb + "\n";
  }
  return out;
}

std::string taxonomy_csv(const StatsReport& r) {
  std::string out = "mode";
  for (Taxonomy t : stats::kAllLabels) out += "," + std::string(stats::to_string(t));
  out += "\n";
  for (const auto& run : r.runs) {
    out += csv_field(run.label);
    for (Taxonomy t : stats::kAllLabels) out += "," + std::to_string(run.taxonomy.at(t));
    out += "\n";
  }
  return out;
}

// --- SVG ------------------------------------------------------------------------------

namespace {

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948"};

class Svg {
 public:
  Svg(int w, int h) : w_(w), h_(h) {}

  void rect(double x, double y, double w, double h, std::string_view fill) {
    body_ << "  <rect x=\"" << fixed(x, 1) << "\" y=\"" << fixed(y, 1) << "\" width=\"" << fixed(w, 1)
          << "\" height=\"" << fixed(h, 1) << "\" fill=\"" << fill << "\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, std::string_view stroke) {
    body_ << "  <line x1=\"" << fixed(x1, 1) << "\" y1=\"" << fixed(y1, 1) << "\" x2=\"" << fixed(x2, 1)
          << "\" y2=\"" << fixed(y2, 1) << "\" stroke=\"" << stroke << "\"/>\n";
  }
  void text(double x, double y, std::string_view s, std::string_view anchor = "start", int size = 12,
            std::string_view fill = "#222") {
    body_ << "  <text x=\"" << fixed(x, 1) << "\" y=\"" << fixed(y, 1) << "\" font-size=\"" << size
          << "\" text-anchor=\"" << anchor << "\" fill=\"" << fill << "\">" << xml_escape(s) << "</text>\n";
  }

  [[nodiscard]] std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_ << "\" viewBox=\"0 0 "
        << w_ << " " << h_ << "\" font-family=\"Helvetica, Arial, sans-serif\">\n";
    out << "  <rect x=\"0\" y=\"0\" width=\"" << w_ << "\" height=\"" << h_ << "\" fill=\"#ffffff\"/>\n";
    out << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  int w_;
  int h_;
  std::ostringstream body_;
};

// White to dark blue.
std::string ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto mix = [t](int a, int b) { return static_cast<int>(a + (b - a) * t + 0.5); };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(247, 8), mix(251, 48), mix(255, 107));
  return buf;
}

// Grouped vertical bars: one group per x label, one bar per series.
std::string grouped_bars(std::string_view title, const std::vector<std::string>& groups,
                         const std::vector<std::string>& series, const std::vector<std::vector<double>>& values,
                         std::string_view y_label) {
  const double left = 60, top = 40, plot_h = 260, group_w = std::max(80.0, 28.0 * static_cast<double>(series.size()) + 24);
  const double plot_w = group_w * static_cast<double>(groups.size());
  const int width = static_cast<int>(left + plot_w + 220);
  const int height = static_cast<int>(top + plot_h + 60);
  double max_v = 1.0;
  for (const auto& row : values)
    for (double v : row) max_v = std::max(max_v, v);

  Svg svg(width, height);
  svg.text(left, 24, title, "start", 15);
  for (int i = 0; i <= 4; ++i) {
    double v = max_v * i / 4.0;
    double y = top + plot_h - plot_h * i / 4.0;
    svg.line(left, y, left + plot_w, y, "#dddddd");
    svg.text(left - 6, y + 4, fixed(v, v < 10 && max_v < 10 ? 1 : 0), "end", 11);
  }
  svg.text(14, top + plot_h / 2, y_label, "start", 11);
  double bar_w = (group_w - 24) / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    double gx = left + group_w * static_cast<double>(g) + 12;
    for (std::size_t s = 0; s < series.size(); ++s) {
      double v = values[s][g];
      double h = plot_h * v / max_v;
      svg.rect(gx + bar_w * static_cast<double>(s), top + plot_h - h, bar_w - 2, h, kPalette[s % 6]);
    }
    svg.text(left + group_w * (static_cast<double>(g) + 0.5), top + plot_h + 18, groups[g], "middle", 11);
  }
  svg.line(left, top + plot_h, left + plot_w, top + plot_h, "#333333");
  for (std::size_t s = 0; s < series.size(); ++s) {
    double y = top + 10 + 20.0 * static_cast<double>(s);
    svg.rect(left + plot_w + 20, y - 10, 12, 12, kPalette[s % 6]);
    svg.text(left + plot_w + 38, y, series[s], "start", 12);
  }
  return svg.str();
}

}  // namespace

std::string category_heatmap_svg(const StatsReport& r) {
  auto cats = categories(r);
  const double left = 190, top = 50, cell_w = 120, cell_h = 36;
  int width = static_cast<int>(left + cell_w * static_cast<double>(cats.size()) + 20);
  int height = static_cast<int>(top + cell_h * static_cast<double>(r.runs.size()) + 30);
  Svg svg(width, height);
  svg.text(10, 24, "Faithfulness by category (%)", "start", 15);
  for (std::size_t c = 0; c < cats.size(); ++c)
    svg.text(left + cell_w * (static_cast<double>(c) + 0.5), top - 8, cats[c], "middle", 12);
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    const auto& run = r.runs[i];
    double y = top + cell_h * static_cast<double>(i);
    svg.text(left - 8, y + cell_h / 2 + 4, display_name(run.label), "end", 12);
    for (std::size_t c = 0; c < cats.size(); ++c) {
      double x = left + cell_w * static_cast<double>(c);
      auto it = run.by_category.find(cats[c]);
      if (it == run.by_category.end()) {
        svg.rect(x, y, cell_w - 2, cell_h - 2, "#eeeeee");
        svg.text(x + cell_w / 2, y + cell_h / 2 + 4, "n/a", "middle", 12);
        continue;
      }
      double v = it->second.point;
      svg.rect(x, y, cell_w - 2, cell_h - 2, ramp(v));
      svg.text(x + cell_w / 2, y + cell_h / 2 + 4, pct(v), "middle", 12, v > 0.55 ? "#ffffff" : "#222222");
    }
  }
  return svg.str();
}

std::string rounds_histogram_svg(const StatsReport& r) {
  std::size_t buckets = bucket_count(r);
  std::vector<std::string> groups;
  for (std::size_t i = 1; i <= buckets; ++i) groups.push_back(std::to_string(i));
  groups.emplace_back("never");
  std::vector<std::string> series;
  std::vector<std::vector<double>> values;
  for (const auto& run : r.runs) {
    series.push_back(display_name(run.label));
    std::vector<double> row;
    for (std::size_t i = 0; i < buckets; ++i)
      row.push_back(i < run.rounds_until_correct.size() ? static_cast<double>(run.rounds_until_correct[i]) : 0.0);
    row.push_back(static_cast<double>(run.never_correct));
    values.push_back(std::move(row));
  }
  return grouped_bars("Rounds until correct", groups, series, values, "queries");
}

std::string taxonomy_bars_svg(const StatsReport& r) {
  std::vector<std::string> groups;
  for (Taxonomy t : stats::kAllLabels)
    if (t != Taxonomy::Correct) groups.emplace_back(stats::to_string(t));
  std::vector<std::string> series;
  std::vector<std::vector<double>> values;
  for (const auto& run : r.runs) {
    series.push_back(display_name(run.label));
    std::vector<double> row;
    for (Taxonomy t : stats::kAllLabels)
      if (t != Taxonomy::Correct) row.push_back(static_cast<double>(run.taxonomy.at(t)));
    values.push_back(std::move(row));
  }
  return grouped_bars("Error taxonomy", groups, series, values, "errors");
}

std::vector<Artifact> render(const StatsReport& r, const std::set<Format>& formats) {
  if (r.runs.empty()) throw stats::StatsError("analysis contains no runs; nothing to report");
  if (formats.empty()) throw stats::StatsError("no report formats selected");
  std::vector<Artifact> out;
  if (formats.contains(Format::Markdown)) out.push_back({"report.md", markdown(r)});
  if (formats.contains(Format::Csv)) {
    out.push_back({"faithfulness.csv", faithfulness_csv(r)});
    out.push_back({"pairwise.csv", pairwise_csv(r)});
    out.push_back({"taxonomy.csv", taxonomy_csv(r)});
  }
  if (formats.contains(Format::Svg)) {
    out.push_back({"category_heatmap.svg", category_heatmap_svg(r)});
    out.push_back({"rounds_histogram.svg", rounds_histogram_svg(r)});
    out.push_back({"taxonomy.svg", taxonomy_bars_svg(r)});
  }
  if (formats.contains(Format::Json)) out.push_back({"analysis.json", io::dump_json(r.to_json())});
  return out;
}

std::vector<std::filesystem::path> render_report(const StatsReport& r, const std::filesystem::path& out_dir,
                                                 const std::set<Format>& formats) {
  auto artifacts = render(r, formats);
  std::vector<std::filesystem::path> written;
  for (const auto& a : artifacts) {
    auto p = out_dir / a.name;
    io::atomic_write(p, a.content);
    written.push_back(p);
  }
  return written;
}

}  // namespace owlaudit::report
