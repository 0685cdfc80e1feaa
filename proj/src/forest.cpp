#include "fairpsy/models.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace fairpsy {

void ForestConfig::validate() const {
  if (n_trees <= 0) throw ConfigError("n_trees must be positive");
  if (min_samples_leaf <= 0) throw ConfigError("min_samples_leaf must be positive");
}

namespace {

// Twice the Gini impurity mass of a node: W * (1 - p^2 - (1-p)^2) = 2 P (W - P) / W.
double gini_mass(double weight, double positive) {
  return weight > 0.0 ? 2.0 * positive * (weight - positive) / weight : 0.0;
}

struct Draw {
  Eigen::Index row;
  double weight;
  int label;
};

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, int min_leaf, int n_candidates, std::mt19937_64& rng)
      : x_(x), min_leaf_(min_leaf), n_candidates_(n_candidates), rng_(rng) {}

  DecisionTree build(std::vector<Draw> draws) {
    draws_ = std::move(draws);
    tree_.nodes.clear();
    grow(0, draws_.size());
    return std::move(tree_);
  }

 private:
  int grow(std::size_t begin, std::size_t end) {
    double weight = 0.0, positive = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      weight += draws_[i].weight;
      positive += draws_[i].weight * draws_[i].label;
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    tree_.nodes.back().value = weight > 0.0 ? std::clamp(positive / weight, 0.0, 1.0) : 0.0;

    const std::size_t count = end - begin;
    if (count < 2 * static_cast<std::size_t>(min_leaf_) || positive <= 0.0 || positive >= weight) return id;

    const SplitChoice split = best_split(begin, end, weight, positive);
    if (split.feature < 0) return id;

    auto mid_it = std::stable_partition(draws_.begin() + static_cast<std::ptrdiff_t>(begin),
                                        draws_.begin() + static_cast<std::ptrdiff_t>(end), [&](const Draw& d) {
                                          return x_(d.row, split.feature) <= split.threshold;
                                        });
    const auto mid = static_cast<std::size_t>(mid_it - draws_.begin());
    const int left = grow(begin, mid);
    const int right = grow(mid, end);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  std::vector<int> candidate_features() {
    const int d = static_cast<int>(x_.cols());
    std::vector<int> all(static_cast<std::size_t>(d));
    std::iota(all.begin(), all.end(), 0);
    if (n_candidates_ >= d) return all;
    // Partial Fisher-Yates; the draws only depend on the stream, never on data.
    for (int i = 0; i < n_candidates_; ++i) {
      std::uniform_int_distribution<int> pick(i, d - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng_))]);
    }
    all.resize(static_cast<std::size_t>(n_candidates_));
    std::sort(all.begin(), all.end());
    return all;
  }

  SplitChoice best_split(std::size_t begin, std::size_t end, double weight, double positive) {
    const double parent = gini_mass(weight, positive);
    const std::size_t count = end - begin;
    const auto min_leaf = static_cast<std::size_t>(min_leaf_);
    SplitChoice best;

    for (int f : candidate_features()) {
      sorted_.clear();
      for (std::size_t i = begin; i < end; ++i) sorted_.push_back({x_(draws_[i].row, f), &draws_[i]});
      std::stable_sort(sorted_.begin(), sorted_.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      if (sorted_.front().first == sorted_.back().first) continue;

      double lw = 0.0, lp = 0.0;
      for (std::size_t k = 1; k < count; ++k) {
        const Draw& d = *sorted_[k - 1].second;
        lw += d.weight;
        lp += d.weight * d.label;
        if (k < min_leaf || count - k < min_leaf) continue;
        const double lo = sorted_[k - 1].first, hi = sorted_[k].first;
        if (!(lo < hi)) continue;
        const double gain = parent - gini_mass(lw, lp) - gini_mass(weight - lw, positive - lp);
        if (gain > best.gain + 1e-12 * weight) {
          best.feature = f;
          best.gain = gain;
          double t = lo + 0.5 * (hi - lo);
          if (!(t < hi)) t = lo;
          best.threshold = t;
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  int min_leaf_;
  int n_candidates_;
  std::mt19937_64& rng_;
  std::vector<Draw> draws_;
  std::vector<std::pair<double, const Draw*>> sorted_;
  DecisionTree tree_;
};

DecisionTree fit_tree(const LabeledDataset& ds, const ForestConfig& cfg, int n_candidates, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::Index n = ds.n_rows();
  std::vector<Draw> draws;
  draws.reserve(static_cast<std::size_t>(n));
  if (cfg.bootstrap) {
    // Weighted bootstrap: rows drawn with probability proportional to weight,
    // each draw counting once.
    const Vector& w = ds.weights();
    std::discrete_distribution<Eigen::Index> pick(w.data(), w.data() + w.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index r = pick(rng);
      draws.push_back({r, 1.0, ds.labels()[r]});
    }
  } else {
    for (Eigen::Index r = 0; r < n; ++r) draws.push_back({r, ds.weights()[r], ds.labels()[r]});
  }
  TreeBuilder builder(ds.features(), cfg.min_samples_leaf, n_candidates, rng);
  return builder.build(std::move(draws));
}

}  // namespace

TrainedModel train_forest(const LabeledDataset& ds, const ForestConfig& cfg) {
  cfg.validate();
  const Eigen::Index positives = ds.labels().sum();
  if (ds.n_rows() == 0 || positives == 0 || positives == ds.n_rows())
    throw DataError("random forest needs both classes");

  const int d = static_cast<int>(ds.n_features());
  const int n_candidates =
      cfg.max_features == MaxFeatures::all ? d : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(d))));

  ForestModel model;
  model.feature_names = ds.feature_names();
  model.trees.resize(static_cast<std::size_t>(cfg.n_trees));

  unsigned threads = cfg.n_threads ? cfg.n_threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.n_trees));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < cfg.n_trees; t = next++)
      model.trees[static_cast<std::size_t>(t)] =
          fit_tree(ds, cfg, n_candidates, substream_seed(cfg.seed, static_cast<std::uint64_t>(t)));
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  return TrainedModel(std::move(model));
}

}  // namespace fairpsy
