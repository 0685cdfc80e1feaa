#include "fairpsy/report.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace fairpsy {

namespace {

namespace fs = std::filesystem;

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("file not found: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string config_string(const nlohmann::json& config, const char* key) {
  return config.is_object() && config.contains(key) && config[key].is_string() ? config[key].get<std::string>() : "?";
}

std::string mitigation_label(const nlohmann::json& config) {
  std::string m = config_string(config, "mitigation");
  if (m == "prejudice" && config.contains("eta")) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " (eta=%g)", config["eta"].get<double>());
    m += buf;
  }
  return m;
}

constexpr std::array<std::string_view, 2> kPerformance = {"balanced_accuracy", "f1"};
constexpr std::array<std::string_view, 5> kFairness = {"statistical_parity_difference", "disparate_impact",
                                                       "disparate_impact_error", "equal_opportunity_difference",
                                                       "average_odds_difference"};
constexpr std::array<std::pair<std::string_view, std::string_view>, 7> kHeadings = {{
    {"balanced_accuracy", "Balanced accuracy"},
    {"f1", "F1"},
    {"statistical_parity_difference", "SPD"},
    {"disparate_impact", "DI"},
    {"disparate_impact_error", "DI error"},
    {"equal_opportunity_difference", "EOD"},
    {"average_odds_difference", "AOD"},
}};

std::string heading(std::string_view metric) {
  for (auto [name, text] : kHeadings)
    if (name == metric) return std::string(text);
  return std::string(metric);
}

template <std::size_t N>
void summary_table(std::ostringstream& o, const std::vector<RunRecord>& runs,
                   const std::array<std::string_view, N>& metrics) {
  o << "| Run | Classifier | Mitigation |";
  for (auto m : metrics) o << ' ' << heading(m) << " |";
  o << "\n|---|---|---|";
  for (std::size_t i = 0; i < N; ++i) o << "---|";
  o << '\n';
  for (const auto& r : runs) {
    o << "| " << r.label << " | " << config_string(r.config, "classifier") << " | " << mitigation_label(r.config)
      << " |";
    for (auto m : metrics) {
      const auto& s = r.summary.metrics.at(std::string(m));
      o << ' ' << format_mean_std(s.mean, s.std) << " |";
    }
    o << '\n';
  }
}

struct Pairing {
  const RunRecord* base;
  const RunRecord* mitigated;
  DiffSummary diff;
};

template <std::size_t N>
void diff_table(std::ostringstream& o, const std::vector<Pairing>& pairs,
                const std::array<std::string_view, N>& metrics) {
  o << "| Run | Baseline | Classifier | Mitigation |";
  for (auto m : metrics) o << " Δ " << heading(m) << " |";
  o << "\n|---|---|---|---|";
  for (std::size_t i = 0; i < N; ++i) o << "---|";
  o << '\n';
  for (const auto& p : pairs) {
    o << "| " << p.mitigated->label << " | " << p.base->label << " | "
      << config_string(p.mitigated->config, "classifier") << " | " << mitigation_label(p.mitigated->config) << " |";
    for (auto m : metrics) {
      const auto& d = p.diff.metrics.at(std::string(m));
      o << ' ' << format_mean_std(d.mean, d.std, d.significant) << " |";
    }
    o << '\n';
  }
}

std::string safe_name(std::string_view s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  return out;
}

}  // namespace

RunRecord load_run(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("run directory not found: " + dir.string());
  RunRecord run;
  run.label = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
  const auto summary = read_json(dir / "summary.json");
  run.config = summary.value("config", nlohmann::json::object());
  run.folds = folds_from_table(load_csv(dir / "folds.csv", folds_schema()));
  for (const auto& f : run.folds)
    run.curves.push_back(
        curve_from_table(load_csv(dir / "curves" / ("fold_" + std::to_string(f.fold_index) + ".csv"), curve_schema())));
  run.summary = summarize_folds(run.folds);
  return run;
}

std::string format_mean_std(Metric mean, Metric std, bool bold) {
  if (!mean) return "n/a";
  std::string s = fixed3(*mean) + " ± " + (std ? fixed3(*std) : std::string("n/a"));
  return bold ? "**" + s + "**" : s;
}

std::string report_markdown(const std::vector<RunRecord>& runs) {
  std::ostringstream o;
  o << "# Fairness evaluation report\n\n"
    << "Values are mean ± standard deviation over the cross-validation folds.\n\n"
    << "## Performance\n\n";
  summary_table(o, runs, kPerformance);
  o << "\n## Fairness\n\n";
  summary_table(o, runs, kFairness);

  std::vector<Pairing> pairs;
  for (const auto& r : runs) {
    if (config_string(r.config, "mitigation") == "none") continue;
    for (const auto& b : runs) {
      if (config_string(b.config, "mitigation") != "none" ||
          config_string(b.config, "classifier") != config_string(r.config, "classifier"))
        continue;
      pairs.push_back({&b, &r, compare(b.folds, r.folds)});
      break;
    }
  }
  if (!pairs.empty()) {
    o << "\n## Performance change after mitigation\n\n"
      << "Mitigated minus baseline, paired by fold. Differences significant at the 95% level are in bold.\n\n";
    diff_table(o, pairs, kPerformance);
    o << "\n## Fairness change after mitigation\n\n"
      << "Mitigated minus baseline, paired by fold. Differences significant at the 95% level are in bold.\n\n";
    diff_table(o, pairs, kFairness);
  }
  return o.str();
}

std::vector<fs::path> write_report(const std::vector<RunRecord>& runs, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  auto write = [&](const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw DataError("cannot write " + path.string());
    written.push_back(path);
  };

  std::set<std::string> used;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::string stem = safe_name(runs[r].label);
    if (!used.insert(stem).second) {
      stem += "_" + std::to_string(r);
      used.insert(stem);
    }
    for (std::size_t f = 0; f < runs[r].folds.size(); ++f) {
      const FoldResult& fold = runs[r].folds[f];
      const SweepCurve& c = runs[r].curves[f];
      const std::string prefix = stem + "_fold_" + std::to_string(fold.fold_index);
      const std::string title = runs[r].label + ", fold " + std::to_string(fold.fold_index);
      write(out_dir / (prefix + "_di_error.svg"),
            line_chart_svg(title, "Classification threshold", c.thresholds,
                           {{"Balanced accuracy", c.balanced_accuracy}, {"Disparate impact error", c.di_error}},
                           fold.chosen_threshold));
      write(out_dir / (prefix + "_aod.svg"),
            line_chart_svg(title, "Classification threshold", c.thresholds,
                           {{"Balanced accuracy", c.balanced_accuracy}, {"Average odds difference", c.aod}},
                           fold.chosen_threshold));
    }
  }
  write(out_dir / "report.md", report_markdown(runs));
  return written;
}

}  // namespace fairpsy
