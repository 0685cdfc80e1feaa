#ifndef FAIRPSY_MODELS_HPP
#define FAIRPSY_MODELS_HPP

#include "fairpsy/core.hpp"
#include "fairpsy/dataset.hpp"
#include "fairpsy/logistic_objective.hpp"

#include <json.hpp>

#include <string>
#include <variant>
#include <vector>

namespace fairpsy {

struct LogisticConfig {
  double l2_lambda = 1.0;
  double eta = 0.0;  ///< prejudice-index penalty; 0 disables it
  int max_iters = 5000;
  double step_size = 1.0;  ///< initial step of the backtracking line search
  double tol = 1e-6;       ///< stop when the gradient infinity-norm drops below

  void validate() const;
};

enum class MaxFeatures { sqrt, all };

struct ForestConfig {
  int n_trees = 500;
  int min_samples_leaf = 25;
  MaxFeatures max_features = MaxFeatures::sqrt;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  /// Worker threads for tree fitting; 0 picks the hardware concurrency.
  /// Results do not depend on this value.
  unsigned n_threads = 0;

  void validate() const;
};

/// Logistic regression over internally standardized features. Scores are
/// sigmoid(coef . ((x - mean) / scale) + intercept).
struct LogisticModel {
  std::vector<std::string> feature_names;
  Vector mean;
  Vector scale;
  Vector coef;
  double intercept = 0.0;
  bool converged = false;
  int iterations = 0;

  /// Coefficients on the raw feature scale (standardization folded in).
  Vector raw_coef() const { return coef.cwiseQuotient(scale); }
  double raw_intercept() const { return intercept - raw_coef().dot(mean); }

  bool operator==(const LogisticModel&) const = default;
};

struct TreeNode {
  int feature = -1;  ///< -1 for a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  ///< weighted positive rate of the training rows reaching the node

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Binary decision tree stored as a node array rooted at index 0. Rows with
/// x[feature] <= threshold go left.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  template <typename Derived>
  double predict(const Eigen::MatrixBase<Derived>& row) const {
    int at = 0;
    while (!nodes[static_cast<std::size_t>(at)].is_leaf()) {
      const TreeNode& n = nodes[static_cast<std::size_t>(at)];
      at = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(at)].value;
  }

  bool operator==(const DecisionTree&) const = default;
};

struct ForestModel {
  std::vector<std::string> feature_names;
  std::vector<DecisionTree> trees;

  bool operator==(const ForestModel&) const = default;
};

enum class ModelKind { logistic, forest };

class TrainedModel {
 public:
  explicit TrainedModel(LogisticModel m) : model_(std::move(m)) {}
  explicit TrainedModel(ForestModel m) : model_(std::move(m)) {}

  ModelKind kind() const { return model_.index() == 0 ? ModelKind::logistic : ModelKind::forest; }
  const std::vector<std::string>& feature_names() const;

  const LogisticModel& logistic() const { return std::get<LogisticModel>(model_); }
  const ForestModel& forest() const { return std::get<ForestModel>(model_); }

  /// False only for a logistic fit that hit max_iters before reaching tol.
  bool converged() const;

  bool operator==(const TrainedModel&) const = default;

 private:
  std::variant<LogisticModel, ForestModel> model_;
};

/// Fits the prejudice-regularized weighted logistic regression by full-batch
/// gradient descent with backtracking line search, starting from `initial`
/// (packed [coef; intercept] on the standardized scale) or zeros.
/// Throws DataError on fewer than two rows or a single class.
TrainedModel train_logistic(const LabeledDataset& ds, const LogisticConfig& cfg, const Vector* initial = nullptr);

/// Standardization used by train_logistic: per-column mean and population
/// standard deviation over the training rows (scale 1 for constant columns).
void standardization(const Matrix& x, Vector& mean, Vector& scale);

TrainedModel train_forest(const LabeledDataset& ds, const ForestConfig& cfg);

/// Scores in [0, 1]. Throws DataError when the feature width does not match.
Vector predict_scores(const TrainedModel& model, const Matrix& features);

// Versioned JSON document; doubles round-trip exactly.
nlohmann::json to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& doc);

}  // namespace fairpsy

#endif  // FAIRPSY_MODELS_HPP
