#ifndef FAIRPSY_EVALUATE_HPP
#define FAIRPSY_EVALUATE_HPP

#include "fairpsy/dataset.hpp"
#include "fairpsy/fairness.hpp"
#include "fairpsy/models.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace fairpsy {

enum class Classifier { logistic, forest };

struct Mitigation {
  enum class Kind { none, reweigh, prejudice };
  Kind kind = Kind::none;
  double eta = 0.0;  ///< prejudice penalty, used when kind == prejudice

  static Mitigation none() { return {}; }
  static Mitigation reweigh() { return {Kind::reweigh, 0.0}; }
  static Mitigation prejudice(double eta) { return {Kind::prejudice, eta}; }
};

/// 99 evenly spaced thresholds 0.01, 0.02, ..., 0.99.
std::vector<double> default_threshold_grid();

struct ExperimentConfig {
  Classifier classifier = Classifier::logistic;
  Mitigation mitigation;
  int k_folds = 5;
  double inner_train_fraction = 0.625;
  std::vector<double> threshold_grid = default_threshold_grid();
  std::uint64_t seed = 0;
  LogisticConfig logistic;
  ForestConfig forest;
  /// Run folds on separate threads. Results are identical either way.
  bool parallel = false;

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Validation metrics against the classification threshold.
struct SweepCurve {
  std::vector<double> thresholds;
  std::vector<Metric> balanced_accuracy;
  std::vector<Metric> di_error;
  std::vector<Metric> aod;
};

/// Classifies with score > t at every grid threshold and records balanced
/// accuracy, disparate-impact error and average odds difference (unit weights).
SweepCurve sweep(const Vector& scores, const Eigen::VectorXi& labels, const Eigen::VectorXi& protected_attr,
                 const std::vector<double>& grid);

/// Threshold maximizing balanced accuracy; ties go to the smallest threshold.
/// Throws DataError when no balanced-accuracy value is defined.
double select_threshold(const SweepCurve& curve);

Eigen::VectorXi classify(const Vector& scores, double threshold);

struct FoldResult {
  int fold_index = 0;
  double chosen_threshold = 0.0;
  PerformanceReport performance;
  FairnessReport fairness;
};

/// Row indices (into the experiment dataset) and fit-time data of one fold.
struct FoldTrace {
  int fold_index = 0;
  IndexVector development;
  IndexVector test;
  IndexVector train;       ///< subset of development
  IndexVector validation;  ///< subset of development
  Vector validation_scores;
  Vector train_weights;        ///< weights used to fit the threshold-selection model
  Vector development_weights;  ///< weights used to fit the final model
};

struct MetricSummary {
  Metric mean;
  Metric std;  ///< sample standard deviation (n - 1); undefined for n < 2
  int n_defined = 0;
};

struct CvSummary {
  std::map<std::string, MetricSummary> metrics;
  int n_folds = 0;
};

struct MetricDiff {
  Metric mean;
  Metric std;
  Metric t_statistic;
  bool significant = false;
  int n = 0;
};

struct DiffSummary {
  std::map<std::string, MetricDiff> metrics;
  int n_folds = 0;
};

struct ExperimentResult {
  std::vector<FoldResult> folds;
  CvSummary summary;
  std::vector<SweepCurve> curves;  ///< validation curve per completed fold
  std::vector<FoldTrace> traces;
  std::vector<std::string> warnings;
};

/// Grouped k-fold protocol: per fold, the development set is split into
/// training and validation by group, the threshold is chosen on validation,
/// the model is refit on the whole development set with the same mitigation,
/// and test metrics are computed at the chosen threshold with unit weights.
/// Folds whose training data lack a class are skipped with a warning.
ExperimentResult run_experiment(const LabeledDataset& ds, const ExperimentConfig& cfg);

/// Mean and sample standard deviation of every metric over the folds where it
/// is defined.
CvSummary summarize_folds(const std::vector<FoldResult>& folds);

/// Two-sided critical value of Student's t at significance `alpha`.
double t_critical(int degrees_of_freedom, double alpha = 0.05);

/// Paired per-fold differences (mitigated - base) with a two-sided one-sample
/// t-test at the 95% level. Throws DataError when the fold indices differ.
DiffSummary compare(const std::vector<FoldResult>& base, const std::vector<FoldResult>& mitigated);

nlohmann::json to_json(const CvSummary& s);
nlohmann::json to_json(const DiffSummary& s);

// folds.csv: one row per fold with the threshold and every metric.
Table folds_table(const std::vector<FoldResult>& folds);
std::vector<FoldResult> folds_from_table(const Table& table);
Schema folds_schema();

// curves/fold_<i>.csv
Table curve_table(const SweepCurve& curve);
SweepCurve curve_from_table(const Table& table);
Schema curve_schema();

}  // namespace fairpsy

#endif  // FAIRPSY_EVALUATE_HPP
