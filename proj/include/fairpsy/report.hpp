#ifndef FAIRPSY_REPORT_HPP
#define FAIRPSY_REPORT_HPP

#include "fairpsy/evaluate.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fairpsy {

struct ChartSeries {
  std::string label;
  std::vector<Metric> values;  ///< undefined points break the line
};

/// SVG 1.1 line chart of the series against `x`, with an optional dotted
/// vertical marker.
std::string line_chart_svg(std::string_view title, std::string_view x_label, const std::vector<double>& x,
                           const std::vector<ChartSeries>& series, std::optional<double> marker);

/// Everything `evaluate` writes into a run directory.
struct RunRecord {
  std::string label;
  nlohmann::json config;
  std::vector<FoldResult> folds;
  std::vector<SweepCurve> curves;  ///< parallel to folds
  CvSummary summary;
};

/// Reads summary.json, folds.csv and curves/fold_<i>.csv. Throws DataError when
/// any of them is missing or malformed.
RunRecord load_run(const std::filesystem::path& dir);

/// "0.123 ± 0.045", bold when `bold`; "n/a" for an undefined mean.
std::string format_mean_std(Metric mean, Metric std, bool bold = false);

/// Markdown with performance and fairness tables (mean ± std over folds) and,
/// for every mitigated run with a matching baseline run of the same
/// classifier, tables of paired differences with significant cells in bold.
std::string report_markdown(const std::vector<RunRecord>& runs);

/// Writes report.md and two charts per fold per run into `out_dir`; returns
/// the written paths.
std::vector<std::filesystem::path> write_report(const std::vector<RunRecord>& runs,
                                                const std::filesystem::path& out_dir);

}  // namespace fairpsy

#endif  // FAIRPSY_REPORT_HPP
