#ifndef FAIRPSY_DATASET_HPP
#define FAIRPSY_DATASET_HPP

#include "fairpsy/core.hpp"
#include "fairpsy/table.hpp"

#include <span>
#include <string>
#include <vector>

namespace fairpsy {

/// Feature matrix with binary label, binary protected attribute, positive
/// instance weights and per-row group identifiers (patient IDs).
///
/// Labels use 1 for the favourable outcome; the protected attribute uses 1 for
/// the privileged group. The constructor enforces the invariants (matching
/// lengths, binary vectors, finite positive weights, unique feature names) and
/// instances are immutable afterwards.
class LabeledDataset {
 public:
  LabeledDataset(Matrix features, std::vector<std::string> feature_names, Eigen::VectorXi labels,
                 Eigen::VectorXi protected_attr, Vector weights, std::vector<std::string> group_ids);

  /// Unit weights.
  LabeledDataset(Matrix features, std::vector<std::string> feature_names, Eigen::VectorXi labels,
                 Eigen::VectorXi protected_attr, std::vector<std::string> group_ids);

  Eigen::Index n_rows() const { return features_.rows(); }
  Eigen::Index n_features() const { return features_.cols(); }

  const Matrix& features() const { return features_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const Eigen::VectorXi& labels() const { return labels_; }
  const Eigen::VectorXi& protected_attr() const { return protected_; }
  const Vector& weights() const { return weights_; }
  const std::vector<std::string>& group_ids() const { return group_ids_; }

  LabeledDataset with_weights(Vector weights) const;
  LabeledDataset subset(std::span<const Eigen::Index> rows) const;

 private:
  Matrix features_;
  std::vector<std::string> feature_names_;
  Eigen::VectorXi labels_;
  Eigen::VectorXi protected_;
  Vector weights_;
  std::vector<std::string> group_ids_;
};

struct LabelingSpec {
  std::string label_col;
  std::string protected_col;
  std::string group_col;
  std::string privileged_value;
  std::string favourable_value;
  /// Keep the protected column as a 0/1 feature named after the column.
  bool protected_as_feature = false;
};

/// Converts a table into a LabeledDataset. Every column other than the label,
/// protected and group columns becomes a float feature; boolean cells map to
/// 0/1. Missing feature cells and non-numeric feature columns are errors.
/// Label and protected values are compared against the canonical CSV text of
/// the cell.
LabeledDataset to_labeled(const Table& table, const LabelingSpec& spec);

struct SplitSpec {
  std::vector<double> fractions;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Row indices of each partition. Distinct group IDs are shuffled with the
/// seed and assigned whole, in order, to the partition whose cumulative row
/// target they best fill. Rows keep their original order within a partition.
std::vector<IndexVector> split_group_indices(const std::vector<std::string>& group_ids, const SplitSpec& spec);

std::vector<LabeledDataset> split_disjoint_groups(const LabeledDataset& ds, const SplitSpec& spec);

}  // namespace fairpsy

#endif  // FAIRPSY_DATASET_HPP
