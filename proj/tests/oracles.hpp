#ifndef FAIRPSY_TESTS_ORACLES_HPP
#define FAIRPSY_TESTS_ORACLES_HPP

// Brute-force reference computations shared by the unit and acceptance tests.

#include "fairpsy/evaluate.hpp"
#include "fairpsy/fairness.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fairpsy::oracle {

struct Triple {
  int label;
  int prediction;
  int group;  // 1 = privileged
};

/// Integer tallies [group][label][prediction].
using Tally = std::array<std::array<std::array<long, 2>, 2>, 2>;

inline Tally tally(const std::vector<Triple>& rows) {
  Tally t{};
  for (const auto& r : rows) ++t[r.group][r.label][r.prediction];
  return t;
}

using Frac = std::optional<long double>;

inline Frac frac(long num, long den) {
  if (den == 0) return std::nullopt;
  return static_cast<long double>(num) / static_cast<long double>(den);
}

struct Metrics {
  Frac spd, di, di_error, eod, aod, balanced_accuracy, f1;
};

inline Metrics metrics(const std::vector<Triple>& rows) {
  const Tally t = tally(rows);
  auto tp = [&](int g) { return t[g][1][1]; };
  auto fn = [&](int g) { return t[g][1][0]; };
  auto fp = [&](int g) { return t[g][0][1]; };
  auto tn = [&](int g) { return t[g][0][0]; };
  auto n = [&](int g) { return tp(g) + fn(g) + fp(g) + tn(g); };

  Metrics m;
  const Frac sr_u = frac(tp(0) + fp(0), n(0)), sr_p = frac(tp(1) + fp(1), n(1));
  const Frac tpr_u = frac(tp(0), tp(0) + fn(0)), tpr_p = frac(tp(1), tp(1) + fn(1));
  const Frac fpr_u = frac(fp(0), fp(0) + tn(0)), fpr_p = frac(fp(1), fp(1) + tn(1));
  if (sr_u && sr_p) {
    m.spd = *sr_u - *sr_p;
    // di = (a_u n_p) / (n_u a_p) as one exact integer ratio.
    m.di = frac((tp(0) + fp(0)) * n(1), n(0) * (tp(1) + fp(1)));
  }
  if (m.di) m.di_error = *m.di == 0 ? 1.0L : 1.0L - std::min(*m.di, 1.0L / *m.di);
  if (tpr_u && tpr_p) m.eod = *tpr_u - *tpr_p;
  if (m.eod && fpr_u && fpr_p) m.aod = ((*fpr_u - *fpr_p) + *m.eod) / 2;

  const long TP = tp(0) + tp(1), FN = fn(0) + fn(1), FP = fp(0) + fp(1), TN = tn(0) + tn(1);
  const Frac tpr = frac(TP, TP + FN), tnr = frac(TN, TN + FP);
  if (tpr && tnr) m.balanced_accuracy = (*tpr + *tnr) / 2;
  m.f1 = frac(2 * TP, 2 * TP + FP + FN);
  return m;
}

/// Random triples with both groups present.
inline std::vector<Triple> random_triples(std::mt19937_64& rng, int max_rows = 64) {
  std::uniform_int_distribution<int> size(2, max_rows);
  std::bernoulli_distribution coin(std::uniform_real_distribution<double>(0.05, 0.95)(rng));
  std::vector<Triple> rows(static_cast<std::size_t>(size(rng)));
  for (auto& r : rows) r = {coin(rng) ? 1 : 0, coin(rng) ? 1 : 0, coin(rng) ? 1 : 0};
  rows[0].group = 0;
  rows[1].group = 1;
  return rows;
}

/// Agreement within `tol`, including agreement on being undefined.
inline bool agrees(Metric actual, Frac expected, double tol = 1e-12) {
  if (!actual || !expected) return !actual && !expected;
  return std::abs(static_cast<long double>(*actual) - *expected) <= tol;
}

/// Returns a description of the first mismatch between the library metrics
/// and the oracle, or an empty string.
inline std::string check_metrics(const std::vector<Triple>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXi y(n), yhat(n), s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    y[i] = r.label;
    yhat[i] = r.prediction;
    s[i] = r.group;
  }
  const GroupConfusion conf = confusion_by_group(y, yhat, s);
  const Tally t = tally(rows);
  const ConfusionCounts* c[2] = {&conf.unprivileged, &conf.privileged};
  for (int g = 0; g < 2; ++g)
    if (c[g]->tp != static_cast<double>(t[g][1][1]) || c[g]->fn != static_cast<double>(t[g][1][0]) ||
        c[g]->fp != static_cast<double>(t[g][0][1]) || c[g]->tn != static_cast<double>(t[g][0][0]))
      return "confusion counts differ";

  const FairnessReport f = fairness_report(conf);
  const PerformanceReport p = performance_report(conf.pooled());
  const Metrics m = metrics(rows);
  if (!agrees(f.spd, m.spd)) return "spd";
  if (!agrees(f.di, m.di)) return "di";
  if (!agrees(f.di_error, m.di_error)) return "di_error";
  if (!agrees(f.eod, m.eod)) return "eod";
  if (!agrees(f.aod, m.aod)) return "aod";
  if (!agrees(p.balanced_accuracy, m.balanced_accuracy)) return "balanced_accuracy";
  if (!agrees(p.f1, m.f1)) return "f1";
  return {};
}

/// Threshold maximizing validation balanced accuracy by a direct scan that
/// re-tallies every threshold (ties to the smallest threshold).
inline std::optional<double> best_threshold(const Vector& scores, const Eigen::VectorXi& labels,
                                            const std::vector<double>& grid) {
  std::optional<double> best;
  long double best_ba = -1;
  for (double t : grid) {
    long tp = 0, fn = 0, tn = 0, fp = 0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
      const bool pos = scores[i] > t;
      if (labels[i] == 1)
        (pos ? tp : fn) += 1;
      else
        (pos ? fp : tn) += 1;
    }
    if (tp + fn == 0 || tn + fp == 0) continue;
    const long double ba = (static_cast<long double>(tp) / (tp + fn) + static_cast<long double>(tn) / (tn + fp)) / 2;
    if (ba > best_ba + 1e-13L) {
      best_ba = ba;
      best = t;
    }
  }
  return best;
}

/// Reweighing weights from raw cell counts.
inline std::vector<long double> reweigh_weights(const Eigen::VectorXi& labels, const Eigen::VectorXi& groups) {
  long cell[2][2] = {{0, 0}, {0, 0}};
  for (Eigen::Index i = 0; i < labels.size(); ++i) ++cell[groups[i]][labels[i]];
  const long n = static_cast<long>(labels.size());
  std::vector<long double> w;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const int s = groups[i], y = labels[i];
    const long ns = cell[s][0] + cell[s][1], ny = cell[0][y] + cell[1][y];
    w.push_back(static_cast<long double>(ns) * ny / (static_cast<long double>(n) * cell[s][y]));
  }
  return w;
}

inline std::vector<Triple> triples(const Eigen::VectorXi& labels, const Eigen::VectorXi& predictions,
                                   const Eigen::VectorXi& groups) {
  std::vector<Triple> rows;
  for (Eigen::Index i = 0; i < labels.size(); ++i) rows.push_back({labels[i], predictions[i], groups[i]});
  return rows;
}

/// Checks one experiment against the evaluation protocol: disjoint grouped
/// folds, a grouped inner split of each development set, the threshold of
/// best validation balanced accuracy, mitigation weights fitted on the data
/// actually used and, for logistic regression, test metrics recomputed from a
/// refitted final model. Returns the first violation or an empty string.
inline std::string check_protocol(const LabeledDataset& ds, const ExperimentConfig& cfg, const ExperimentResult& r) {
  std::ostringstream why;
  const auto& groups = ds.group_ids();
  auto group_set = [&](const IndexVector& rows) {
    std::set<std::string> g;
    for (auto i : rows) g.insert(groups[static_cast<std::size_t>(i)]);
    return g;
  };
  auto disjoint = [](const std::set<std::string>& a, const std::set<std::string>& b) {
    return std::none_of(a.begin(), a.end(), [&](const std::string& g) { return b.count(g) > 0; });
  };
  auto sorted = [](IndexVector v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  auto merged = [&](const IndexVector& a, const IndexVector& b) {
    IndexVector m = a;
    m.insert(m.end(), b.begin(), b.end());
    return sorted(m);
  };

  if (r.traces.size() != r.folds.size()) return "trace count differs from fold count";
  IndexVector all(static_cast<std::size_t>(ds.n_rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Eigen::Index>(i);

  std::vector<std::set<std::string>> test_groups;
  for (std::size_t k = 0; k < r.traces.size(); ++k) {
    const FoldTrace& t = r.traces[k];
    const FoldResult& f = r.folds[k];
    why << "fold " << t.fold_index << ": ";
    if (f.fold_index != t.fold_index) return why.str() + "trace and result disagree";
    if (merged(t.development, t.test) != all) return why.str() + "development and test do not partition the rows";
    if (merged(t.train, t.validation) != sorted(t.development))
      return why.str() + "train and validation do not partition development";
    const auto tg = group_set(t.test);
    if (!disjoint(tg, group_set(t.development))) return why.str() + "a group is in both test and development";
    if (!disjoint(group_set(t.train), group_set(t.validation)))
      return why.str() + "a group is in both train and validation";
    for (const auto& other : test_groups)
      if (!disjoint(tg, other)) return why.str() + "test folds share a group";
    test_groups.push_back(tg);

    const LabeledDataset train = ds.subset(t.train), validation = ds.subset(t.validation),
                         development = ds.subset(t.development), test = ds.subset(t.test);
    const auto threshold = best_threshold(t.validation_scores, validation.labels(), cfg.threshold_grid);
    if (!threshold || *threshold != f.chosen_threshold) return why.str() + "threshold is not the validation optimum";

    const bool reweighed = cfg.mitigation.kind == Mitigation::Kind::reweigh;
    const std::vector<std::pair<const LabeledDataset*, const Vector*>> fits = {{&train, &t.train_weights},
                                                                              {&development, &t.development_weights}};
    for (const auto& [part, weights] : fits) {
      if (weights->size() != part->n_rows()) return why.str() + "weights do not cover the fitted rows";
      const auto expected = reweighed ? reweigh_weights(part->labels(), part->protected_attr())
                                      : std::vector<long double>(static_cast<std::size_t>(part->n_rows()), 1.0L);
      for (Eigen::Index i = 0; i < weights->size(); ++i)
        if (std::abs(static_cast<long double>((*weights)[i]) - expected[static_cast<std::size_t>(i)]) > 1e-12L)
          return why.str() + "weights differ from the mitigation of the fitted rows";
    }

    if (cfg.classifier == Classifier::logistic) {
      LogisticConfig lc = cfg.logistic;
      lc.eta = cfg.mitigation.kind == Mitigation::Kind::prejudice ? cfg.mitigation.eta : 0.0;
      const TrainedModel final_model = train_logistic(development.with_weights(t.development_weights), lc);
      const Vector scores = predict_scores(final_model, test.features());
      Eigen::VectorXi predictions(scores.size());
      for (Eigen::Index i = 0; i < scores.size(); ++i) predictions[i] = scores[i] > f.chosen_threshold ? 1 : 0;
      const Metrics m = metrics(triples(test.labels(), predictions, test.protected_attr()));
      if (!agrees(f.performance.balanced_accuracy, m.balanced_accuracy) || !agrees(f.performance.f1, m.f1) ||
          !agrees(f.fairness.spd, m.spd) || !agrees(f.fairness.di, m.di) || !agrees(f.fairness.eod, m.eod) ||
          !agrees(f.fairness.aod, m.aod) || !agrees(f.fairness.di_error, m.di_error))
        return why.str() + "test metrics differ from the refitted final model";
    }
    why.str("");
  }
  return {};
}

}  // namespace fairpsy::oracle

#endif  // FAIRPSY_TESTS_ORACLES_HPP
