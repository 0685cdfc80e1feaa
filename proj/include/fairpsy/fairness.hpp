#ifndef FAIRPSY_FAIRNESS_HPP
#define FAIRPSY_FAIRNESS_HPP

#include "fairpsy/core.hpp"
#include "fairpsy/dataset.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <string_view>

namespace fairpsy {

/// A metric value; nullopt marks a metric that is undefined because one of
/// its rates has a zero denominator.
using Metric = std::optional<double>;

/// Confusion cells as (weighted) counts.
struct ConfusionCounts {
  double tp = 0.0;
  double fp = 0.0;
  double tn = 0.0;
  double fn = 0.0;

  double total() const { return tp + fp + tn + fn; }
  double positives() const { return tp + fn; }
  double negatives() const { return fp + tn; }
  double predicted_positive() const { return tp + fp; }

  ConfusionCounts operator+(const ConfusionCounts& o) const { return {tp + o.tp, fp + o.fp, tn + o.tn, fn + o.fn}; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct GroupConfusion {
  ConfusionCounts privileged;
  ConfusionCounts unprivileged;

  ConfusionCounts pooled() const { return privileged + unprivileged; }
  bool operator==(const GroupConfusion&) const = default;
};

// Signs follow the unprivileged-minus-privileged convention: negative values
// mean the privileged group is advantaged.
struct FairnessReport {
  Metric spd;       ///< SR_u - SR_p
  Metric di;        ///< SR_u / SR_p
  Metric di_error;  ///< 1 - min(di, 1/di)
  Metric eod;       ///< TPR_u - TPR_p
  Metric aod;       ///< ((FPR_u - FPR_p) + (TPR_u - TPR_p)) / 2
};

struct PerformanceReport {
  Metric balanced_accuracy;
  Metric f1;
};

inline constexpr std::array<std::string_view, 7> kMetricNames = {
    "balanced_accuracy",           "f1",
    "statistical_parity_difference", "disparate_impact",
    "disparate_impact_error",      "equal_opportunity_difference",
    "average_odds_difference"};

/// Tallies weighted confusion cells per protected group. Throws DataError on
/// length mismatch, non-binary inputs or a group with no rows.
GroupConfusion confusion_by_group(const Eigen::VectorXi& labels, const Eigen::VectorXi& predictions,
                                  const Eigen::VectorXi& protected_attr, const Vector& weights);
GroupConfusion confusion_by_group(const Eigen::VectorXi& labels, const Eigen::VectorXi& predictions,
                                  const Eigen::VectorXi& protected_attr);

Metric disparate_impact_error(Metric di);

FairnessReport fairness_report(const GroupConfusion& conf);
PerformanceReport performance_report(const ConfusionCounts& pooled);

/// Looks a metric up by its serialized name.
Metric metric_by_name(const PerformanceReport& perf, const FairnessReport& fair, std::string_view name);

/// Reweighing weights w(s, y) = n(s) n(y) / (n n(s, y)). Throws DataError if
/// any (group, label) cell is empty.
Vector reweigh(const Eigen::VectorXi& labels, const Eigen::VectorXi& protected_attr);
Vector reweigh(const LabeledDataset& ds);

nlohmann::json to_json(const FairnessReport& report);
nlohmann::json to_json(const PerformanceReport& report);

}  // namespace fairpsy

#endif  // FAIRPSY_FAIRNESS_HPP
