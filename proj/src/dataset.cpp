#include "fairpsy/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

namespace fairpsy {

namespace {

void require_binary(const Eigen::VectorXi& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] != 0 && v[i] != 1) throw DataError(std::string(what) + " must contain only 0 or 1");
}

}  // namespace

LabeledDataset::LabeledDataset(Matrix features, std::vector<std::string> feature_names, Eigen::VectorXi labels,
                               Eigen::VectorXi protected_attr, Vector weights, std::vector<std::string> group_ids)
    : features_(std::move(features)),
      feature_names_(std::move(feature_names)),
      labels_(std::move(labels)),
      protected_(std::move(protected_attr)),
      weights_(std::move(weights)),
      group_ids_(std::move(group_ids)) {
  const Eigen::Index n = features_.rows();
  if (weights_.size() == 0 && n > 0) weights_ = Vector::Ones(n);
  if (static_cast<Eigen::Index>(feature_names_.size()) != features_.cols())
    throw DataError("feature_names length does not match feature columns");
  if (labels_.size() != n || protected_.size() != n || weights_.size() != n ||
      static_cast<Eigen::Index>(group_ids_.size()) != n)
    throw DataError("labeled dataset vectors must all have n_rows entries");
  require_binary(labels_, "labels");
  require_binary(protected_, "protected attribute");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
      throw DataError("weights must be strictly positive and finite");
  std::set<std::string> seen;
  for (const auto& name : feature_names_)
    if (!seen.insert(name).second) throw DataError("duplicate feature name '" + name + "'");
  if (!features_.allFinite()) throw DataError("features must be finite");
}

LabeledDataset::LabeledDataset(Matrix features, std::vector<std::string> feature_names, Eigen::VectorXi labels,
                               Eigen::VectorXi protected_attr, std::vector<std::string> group_ids)
    : LabeledDataset(std::move(features), std::move(feature_names), std::move(labels), std::move(protected_attr),
                     Vector(), std::move(group_ids)) {}

LabeledDataset LabeledDataset::with_weights(Vector weights) const {
  return LabeledDataset(features_, feature_names_, labels_, protected_, std::move(weights), group_ids_);
}

LabeledDataset LabeledDataset::subset(std::span<const Eigen::Index> rows) const {
  const auto m = static_cast<Eigen::Index>(rows.size());
  Matrix x(m, n_features());
  Eigen::VectorXi y(m), s(m);
  Vector w(m);
  std::vector<std::string> g;
  g.reserve(rows.size());
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index r = rows[static_cast<std::size_t>(k)];
    if (r < 0 || r >= n_rows()) throw DataError("subset row index out of range");
    x.row(k) = features_.row(r);
    y[k] = labels_[r];
    s[k] = protected_[r];
    w[k] = weights_[r];
    g.push_back(group_ids_[static_cast<std::size_t>(r)]);
  }
  return LabeledDataset(std::move(x), feature_names_, std::move(y), std::move(s), std::move(w), std::move(g));
}

LabeledDataset to_labeled(const Table& table, const LabelingSpec& spec) {
  const std::size_t label_idx = table.column_index(spec.label_col);
  const std::size_t prot_idx = table.column_index(spec.protected_col);
  const std::size_t group_idx = table.column_index(spec.group_col);
  const auto n = static_cast<Eigen::Index>(table.n_rows());

  auto binary_column = [&](std::size_t col, const std::string& positive_value, const char* what) {
    std::set<std::string> distinct;
    Eigen::VectorXi out(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const Cell& cell = table.at(static_cast<std::size_t>(r), col);
      if (is_missing(cell))
        throw DataError(std::string(what) + " column '" + table.columns()[col].name + "' has a missing cell at row " +
                        std::to_string(r + 1));
      const std::string text = format_cell(cell);
      distinct.insert(text);
      out[r] = text == positive_value ? 1 : 0;
    }
    if (distinct.size() != 2)
      throw DataError(std::string(what) + " column '" + table.columns()[col].name + "' must have exactly two " +
                      "distinct values, found " + std::to_string(distinct.size()));
    if (!distinct.count(positive_value))
      throw DataError(std::string(what) + " column '" + table.columns()[col].name + "' never takes value '" +
                      positive_value + "'");
    return out;
  };

  Eigen::VectorXi labels = binary_column(label_idx, spec.favourable_value, "label");
  Eigen::VectorXi prot = binary_column(prot_idx, spec.privileged_value, "protected");

  std::vector<std::string> groups;
  groups.reserve(table.n_rows());
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    const Cell& cell = table.at(r, group_idx);
    if (is_missing(cell)) throw DataError("group column has a missing cell at row " + std::to_string(r + 1));
    groups.push_back(format_cell(cell));
  }

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    if (c == label_idx || c == group_idx) continue;
    if (c == prot_idx) {
      if (spec.protected_as_feature) {
        feature_cols.push_back(c);
        names.push_back(table.columns()[c].name);
      }
      continue;
    }
    const ColumnKind kind = table.columns()[c].kind;
    if (kind != ColumnKind::boolean && kind != ColumnKind::integer && kind != ColumnKind::floating)
      throw DataError("column '" + table.columns()[c].name + "' of kind " + std::string(kind_name(kind)) +
                      " cannot be used as a feature");
    feature_cols.push_back(c);
    names.push_back(table.columns()[c].name);
  }

  Matrix x(n, static_cast<Eigen::Index>(feature_cols.size()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const std::size_t c = feature_cols[static_cast<std::size_t>(j)];
    if (c == prot_idx) {
      x.col(j) = prot.cast<double>();
      continue;
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      const Cell& cell = table.at(static_cast<std::size_t>(r), c);
      if (is_missing(cell))
        throw DataError("feature column '" + table.columns()[c].name + "' has a missing cell at row " +
                        std::to_string(r + 1));
      if (const auto* b = std::get_if<bool>(&cell))
        x(r, j) = *b ? 1.0 : 0.0;
      else
        x(r, j) = *cell_number(cell);
    }
  }
  return LabeledDataset(std::move(x), std::move(names), std::move(labels), std::move(prot), std::move(groups));
}

void SplitSpec::validate() const {
  if (fractions.empty()) throw ConfigError("split fractions must not be empty");
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ConfigError("split fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
}

std::vector<IndexVector> split_group_indices(const std::vector<std::string>& group_ids, const SplitSpec& spec) {
  spec.validate();
  const std::size_t k = spec.fractions.size();

  // Groups in order of first appearance, then shuffled.
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<IndexVector> members;
  for (std::size_t r = 0; r < group_ids.size(); ++r) {
    auto [it, inserted] = slot.try_emplace(group_ids[r], members.size());
    if (inserted) members.emplace_back();
    members[it->second].push_back(static_cast<Eigen::Index>(r));
  }
  if (members.size() < k)
    throw DataError("cannot split " + std::to_string(members.size()) + " distinct groups into " + std::to_string(k) +
                    " partitions");

  std::vector<std::size_t> order(members.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> boundary(k);
  double cumulative = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    cumulative += spec.fractions[p];
    boundary[p] = cumulative * static_cast<double>(group_ids.size());
  }

  std::vector<IndexVector> parts(k);
  std::size_t part = 0;
  std::size_t assigned_rows = 0;
  for (std::size_t g = 0; g < order.size(); ++g) {
    const auto& rows = members[order[g]];
    const std::size_t groups_left = order.size() - g;
    while (part + 1 < k && !parts[part].empty()) {
      const bool overshoots = static_cast<double>(assigned_rows) + 0.5 * static_cast<double>(rows.size()) >
                              boundary[part];
      const bool must_leave = groups_left <= k - 1 - part;
      if (!overshoots && !must_leave) break;
      ++part;
    }
    parts[part].insert(parts[part].end(), rows.begin(), rows.end());
    assigned_rows += rows.size();
  }
  for (auto& p : parts) std::sort(p.begin(), p.end());
  return parts;
}

std::vector<LabeledDataset> split_disjoint_groups(const LabeledDataset& ds, const SplitSpec& spec) {
  std::vector<LabeledDataset> out;
  for (const auto& rows : split_group_indices(ds.group_ids(), spec)) out.push_back(ds.subset(rows));
  return out;
}

}  // namespace fairpsy
