#include "fairpsy/fairness.hpp"

#include <algorithm>

namespace fairpsy {

namespace {

Metric ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

Metric diff(Metric a, Metric b) {
  if (!a || !b) return std::nullopt;
  return *a - *b;
}

nlohmann::json metric_json(Metric m) { return m ? nlohmann::json(*m) : nlohmann::json(nullptr); }

}  // namespace

GroupConfusion confusion_by_group(const Eigen::VectorXi& labels, const Eigen::VectorXi& predictions,
                                  const Eigen::VectorXi& protected_attr, const Vector& weights) {
  const Eigen::Index n = labels.size();
  if (predictions.size() != n || protected_attr.size() != n || weights.size() != n)
    throw DataError("confusion_by_group: input lengths differ");
  GroupConfusion conf;
  std::array<Eigen::Index, 2> rows{0, 0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[i], yhat = predictions[i], s = protected_attr[i];
    if ((y != 0 && y != 1) || (yhat != 0 && yhat != 1) || (s != 0 && s != 1))
      throw DataError("confusion_by_group: labels, predictions and groups must be binary");
    ConfusionCounts& c = s == 1 ? conf.privileged : conf.unprivileged;
    const double w = weights[i];
    if (y == 1)
      (yhat == 1 ? c.tp : c.fn) += w;
    else
      (yhat == 1 ? c.fp : c.tn) += w;
    ++rows[static_cast<std::size_t>(s)];
  }
  if (rows[0] == 0 || rows[1] == 0) throw DataError("confusion_by_group: a protected group has no rows");
  return conf;
}

GroupConfusion confusion_by_group(const Eigen::VectorXi& labels, const Eigen::VectorXi& predictions,
                                  const Eigen::VectorXi& protected_attr) {
  return confusion_by_group(labels, predictions, protected_attr, Vector::Ones(labels.size()));
}

Metric disparate_impact_error(Metric di) {
  if (!di) return std::nullopt;
  if (*di <= 0.0) return 1.0;
  return 1.0 - std::min(*di, 1.0 / *di);
}

FairnessReport fairness_report(const GroupConfusion& conf) {
  const ConfusionCounts& p = conf.privileged;
  const ConfusionCounts& u = conf.unprivileged;
  const Metric sr_p = ratio(p.predicted_positive(), p.total());
  const Metric sr_u = ratio(u.predicted_positive(), u.total());
  const Metric tpr_p = ratio(p.tp, p.positives());
  const Metric tpr_u = ratio(u.tp, u.positives());
  const Metric fpr_p = ratio(p.fp, p.negatives());
  const Metric fpr_u = ratio(u.fp, u.negatives());

  FairnessReport r;
  r.spd = diff(sr_u, sr_p);
  if (sr_u && sr_p) r.di = ratio(*sr_u, *sr_p);
  r.di_error = disparate_impact_error(r.di);
  r.eod = diff(tpr_u, tpr_p);
  const Metric dfpr = diff(fpr_u, fpr_p);
  if (dfpr && r.eod) r.aod = 0.5 * (*dfpr + *r.eod);
  return r;
}

PerformanceReport performance_report(const ConfusionCounts& c) {
  PerformanceReport r;
  const Metric tpr = ratio(c.tp, c.positives());
  const Metric tnr = ratio(c.tn, c.negatives());
  if (tpr && tnr) r.balanced_accuracy = 0.5 * (*tpr + *tnr);
  r.f1 = ratio(2.0 * c.tp, 2.0 * c.tp + c.fp + c.fn);
  return r;
}

Metric metric_by_name(const PerformanceReport& perf, const FairnessReport& fair, std::string_view name) {
  if (name == "balanced_accuracy") return perf.balanced_accuracy;
  if (name == "f1") return perf.f1;
  if (name == "statistical_parity_difference") return fair.spd;
  if (name == "disparate_impact") return fair.di;
  if (name == "disparate_impact_error") return fair.di_error;
  if (name == "equal_opportunity_difference") return fair.eod;
  if (name == "average_odds_difference") return fair.aod;
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

Vector reweigh(const Eigen::VectorXi& labels, const Eigen::VectorXi& protected_attr) {
  const Eigen::Index n = labels.size();
  if (protected_attr.size() != n) throw DataError("reweigh: input lengths differ");
  double n_s[2] = {0, 0}, n_y[2] = {0, 0}, n_sy[2][2] = {{0, 0}, {0, 0}};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int s = protected_attr[i], y = labels[i];
    if ((s != 0 && s != 1) || (y != 0 && y != 1)) throw DataError("reweigh: labels and groups must be binary");
    n_s[s] += 1;
    n_y[y] += 1;
    n_sy[s][y] += 1;
  }
  double w[2][2];
  for (int s = 0; s < 2; ++s)
    for (int y = 0; y < 2; ++y) {
      if (n_sy[s][y] == 0)
        throw DataError("reweigh: empty (group=" + std::to_string(s) + ", label=" + std::to_string(y) + ") cell");
      w[s][y] = (n_s[s] * n_y[y]) / (static_cast<double>(n) * n_sy[s][y]);
    }
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = w[protected_attr[i]][labels[i]];
  return out;
}

Vector reweigh(const LabeledDataset& ds) { return reweigh(ds.labels(), ds.protected_attr()); }

nlohmann::json to_json(const FairnessReport& r) {
  return {{"statistical_parity_difference", metric_json(r.spd)},
          {"disparate_impact", metric_json(r.di)},
          {"disparate_impact_error", metric_json(r.di_error)},
          {"equal_opportunity_difference", metric_json(r.eod)},
          {"average_odds_difference", metric_json(r.aod)}};
}

nlohmann::json to_json(const PerformanceReport& r) {
  return {{"balanced_accuracy", metric_json(r.balanced_accuracy)}, {"f1", metric_json(r.f1)}};
}

}  // namespace fairpsy
