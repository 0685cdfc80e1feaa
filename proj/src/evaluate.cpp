#include "fairpsy/evaluate.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <future>

namespace fairpsy {

namespace {

// Confusion tally that tolerates an empty group (its rates come out undefined).
GroupConfusion tally(const Eigen::VectorXi& labels, const Eigen::VectorXi& predictions,
                     const Eigen::VectorXi& protected_attr) {
  GroupConfusion conf;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    ConfusionCounts& c = protected_attr[i] == 1 ? conf.privileged : conf.unprivileged;
    if (labels[i] == 1)
      (predictions[i] == 1 ? c.tp : c.fn) += 1.0;
    else
      (predictions[i] == 1 ? c.fp : c.tn) += 1.0;
  }
  return conf;
}

IndexVector gather(const IndexVector& base, const IndexVector& local) {
  IndexVector out;
  out.reserve(local.size());
  for (Eigen::Index i : local) out.push_back(base[static_cast<std::size_t>(i)]);
  return out;
}

struct FittedArm {
  TrainedModel model;
  Vector weights;
};

FittedArm fit_arm(const LabeledDataset& part, const ExperimentConfig& cfg, std::uint64_t forest_seed) {
  Vector weights = cfg.mitigation.kind == Mitigation::Kind::reweigh ? reweigh(part) : Vector::Ones(part.n_rows());
  const LabeledDataset weighted = part.with_weights(weights);
  if (cfg.classifier == Classifier::logistic) {
    LogisticConfig lc = cfg.logistic;
    lc.eta = cfg.mitigation.kind == Mitigation::Kind::prejudice ? cfg.mitigation.eta : 0.0;
    return {train_logistic(weighted, lc), std::move(weights)};
  }
  ForestConfig fc = cfg.forest;
  fc.seed = forest_seed;
  if (cfg.parallel) fc.n_threads = 1;
  return {train_forest(weighted, fc), std::move(weights)};
}

struct FoldOutcome {
  std::optional<FoldResult> result;
  SweepCurve curve;
  FoldTrace trace;
  std::vector<std::string> warnings;
};

FoldOutcome run_fold(const LabeledDataset& ds, const ExperimentConfig& cfg, const std::vector<IndexVector>& folds,
                     int fold) {
  FoldOutcome out;
  FoldTrace& trace = out.trace;
  trace.fold_index = fold;
  trace.test = folds[static_cast<std::size_t>(fold)];
  for (int f = 0; f < static_cast<int>(folds.size()); ++f)
    if (f != fold)
      trace.development.insert(trace.development.end(), folds[static_cast<std::size_t>(f)].begin(),
                               folds[static_cast<std::size_t>(f)].end());
  std::sort(trace.development.begin(), trace.development.end());

  try {
    const LabeledDataset development = ds.subset(trace.development);
    const auto inner = split_group_indices(
        development.group_ids(),
        SplitSpec{{cfg.inner_train_fraction, 1.0 - cfg.inner_train_fraction},
                  substream_seed(cfg.seed, static_cast<std::uint64_t>(fold))});
    trace.train = gather(trace.development, inner[0]);
    trace.validation = gather(trace.development, inner[1]);

    const std::uint64_t base_stream = 1000 + 2 * static_cast<std::uint64_t>(fold);
    FittedArm selection = fit_arm(ds.subset(trace.train), cfg, substream_seed(cfg.seed, base_stream));
    trace.train_weights = selection.weights;

    const LabeledDataset validation = ds.subset(trace.validation);
    trace.validation_scores = predict_scores(selection.model, validation.features());
    out.curve = sweep(trace.validation_scores, validation.labels(), validation.protected_attr(), cfg.threshold_grid);
    const double threshold = select_threshold(out.curve);

    FittedArm final_fit = fit_arm(development, cfg, substream_seed(cfg.seed, base_stream + 1));
    trace.development_weights = final_fit.weights;
    if (!selection.model.converged() || !final_fit.model.converged())
      out.warnings.push_back("fold " + std::to_string(fold) + ": logistic regression did not converge");

    const LabeledDataset test = ds.subset(trace.test);
    const Eigen::VectorXi predictions = classify(predict_scores(final_fit.model, test.features()), threshold);
    const GroupConfusion conf = tally(test.labels(), predictions, test.protected_attr());
    out.result = FoldResult{fold, threshold, performance_report(conf.pooled()), fairness_report(conf)};
  } catch (const DataError& e) {
    out.warnings.push_back("fold " + std::to_string(fold) + " skipped: " + e.what());
  }
  return out;
}

Metric sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return std::nullopt;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

nlohmann::json metric_json(Metric m) { return m ? nlohmann::json(*m) : nlohmann::json(nullptr); }

Cell metric_cell(Metric m) { return m ? Cell{*m} : Cell{}; }

Metric metric_from_cell(const Cell& c) { return cell_number(c); }

const char* mitigation_name(Mitigation::Kind k) {
  switch (k) {
    case Mitigation::Kind::none: return "none";
    case Mitigation::Kind::reweigh: return "reweigh";
    case Mitigation::Kind::prejudice: return "prejudice";
  }
  return "none";
}

}  // namespace

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 99; ++i) grid.push_back(static_cast<double>(i) / 100.0);
  return grid;
}

void ExperimentConfig::validate() const {
  if (k_folds < 2) throw ConfigError("k_folds must be at least 2");
  if (!(inner_train_fraction > 0.0 && inner_train_fraction < 1.0))
    throw ConfigError("inner_train_fraction must lie in (0, 1)");
  if (threshold_grid.empty()) throw ConfigError("threshold grid must not be empty");
  for (std::size_t i = 0; i < threshold_grid.size(); ++i) {
    if (!(threshold_grid[i] > 0.0 && threshold_grid[i] < 1.0))
      throw ConfigError("thresholds must lie in (0, 1)");
    if (i && !(threshold_grid[i] > threshold_grid[i - 1]))
      throw ConfigError("threshold grid must be strictly increasing");
  }
  if (mitigation.kind == Mitigation::Kind::prejudice) {
    if (classifier != Classifier::logistic) throw ConfigError("the prejudice remover applies to logistic regression");
    if (!(mitigation.eta >= 0.0) || !std::isfinite(mitigation.eta)) throw ConfigError("eta must be >= 0");
  }
  logistic.validate();
  forest.validate();
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    const auto clf = j.value("classifier", std::string("logistic"));
    if (clf == "logistic")
      cfg.classifier = Classifier::logistic;
    else if (clf == "forest")
      cfg.classifier = Classifier::forest;
    else
      throw ConfigError("classifier must be 'logistic' or 'forest'");

    const auto mit = j.value("mitigation", std::string("none"));
    if (mit == "none")
      cfg.mitigation = Mitigation::none();
    else if (mit == "reweigh")
      cfg.mitigation = Mitigation::reweigh();
    else if (mit == "prejudice")
      cfg.mitigation = Mitigation::prejudice(j.value("eta", 25.0));
    else
      throw ConfigError("mitigation must be 'none', 'reweigh' or 'prejudice'");

    cfg.k_folds = j.value("k_folds", cfg.k_folds);
    cfg.inner_train_fraction = j.value("inner_train_fraction", cfg.inner_train_fraction);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.parallel = j.value("parallel", cfg.parallel);
    if (j.contains("threshold_grid")) cfg.threshold_grid = j.at("threshold_grid").get<std::vector<double>>();
    if (j.contains("logistic")) {
      const auto& l = j.at("logistic");
      cfg.logistic.l2_lambda = l.value("l2_lambda", cfg.logistic.l2_lambda);
      cfg.logistic.max_iters = l.value("max_iters", cfg.logistic.max_iters);
      cfg.logistic.step_size = l.value("step_size", cfg.logistic.step_size);
      cfg.logistic.tol = l.value("tol", cfg.logistic.tol);
    }
    if (j.contains("forest")) {
      const auto& f = j.at("forest");
      cfg.forest.n_trees = f.value("n_trees", cfg.forest.n_trees);
      cfg.forest.min_samples_leaf = f.value("min_samples_leaf", cfg.forest.min_samples_leaf);
      cfg.forest.bootstrap = f.value("bootstrap", cfg.forest.bootstrap);
      const auto mf = f.value("max_features", std::string("sqrt"));
      if (mf != "sqrt" && mf != "all") throw ConfigError("max_features must be 'sqrt' or 'all'");
      cfg.forest.max_features = mf == "sqrt" ? MaxFeatures::sqrt : MaxFeatures::all;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["classifier"] = cfg.classifier == Classifier::logistic ? "logistic" : "forest";
  j["mitigation"] = mitigation_name(cfg.mitigation.kind);
  if (cfg.mitigation.kind == Mitigation::Kind::prejudice) j["eta"] = cfg.mitigation.eta;
  j["k_folds"] = cfg.k_folds;
  j["inner_train_fraction"] = cfg.inner_train_fraction;
  j["seed"] = cfg.seed;
  j["threshold_grid"] = cfg.threshold_grid;
  if (cfg.classifier == Classifier::logistic) {
    j["logistic"] = {{"l2_lambda", cfg.logistic.l2_lambda},
                     {"max_iters", cfg.logistic.max_iters},
                     {"step_size", cfg.logistic.step_size},
                     {"tol", cfg.logistic.tol}};
  } else {
    j["forest"] = {{"n_trees", cfg.forest.n_trees},
                   {"min_samples_leaf", cfg.forest.min_samples_leaf},
                   {"max_features", cfg.forest.max_features == MaxFeatures::sqrt ? "sqrt" : "all"},
                   {"bootstrap", cfg.forest.bootstrap}};
  }
  return j;
}

Eigen::VectorXi classify(const Vector& scores, double threshold) {
  return (scores.array() > threshold).cast<int>();
}

SweepCurve sweep(const Vector& scores, const Eigen::VectorXi& labels, const Eigen::VectorXi& protected_attr,
                 const std::vector<double>& grid) {
  if (labels.size() != scores.size() || protected_attr.size() != scores.size())
    throw DataError("sweep: input lengths differ");
  SweepCurve curve;
  curve.thresholds = grid;
  for (double t : grid) {
    const GroupConfusion conf = tally(labels, classify(scores, t), protected_attr);
    const FairnessReport fair = fairness_report(conf);
    curve.balanced_accuracy.push_back(performance_report(conf.pooled()).balanced_accuracy);
    curve.di_error.push_back(fair.di_error);
    curve.aod.push_back(fair.aod);
  }
  return curve;
}

double select_threshold(const SweepCurve& curve) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
    const Metric& ba = curve.balanced_accuracy[i];
    // Values equal up to rounding count as ties.
    if (ba && (!best || *ba > *curve.balanced_accuracy[*best] + 1e-13)) best = i;
  }
  if (!best) throw DataError("no threshold has a defined balanced accuracy");
  return curve.thresholds[*best];
}

ExperimentResult run_experiment(const LabeledDataset& ds, const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> fractions(static_cast<std::size_t>(cfg.k_folds), 1.0 / cfg.k_folds);
  const auto folds = split_group_indices(ds.group_ids(), SplitSpec{fractions, cfg.seed});

  std::vector<FoldOutcome> outcomes(folds.size());
  if (cfg.parallel) {
    std::vector<std::future<FoldOutcome>> pending;
    for (int f = 0; f < cfg.k_folds; ++f)
      pending.push_back(std::async(std::launch::async, run_fold, std::cref(ds), std::cref(cfg), std::cref(folds), f));
    for (std::size_t f = 0; f < pending.size(); ++f) outcomes[f] = pending[f].get();
  } else {
    for (int f = 0; f < cfg.k_folds; ++f) outcomes[static_cast<std::size_t>(f)] = run_fold(ds, cfg, folds, f);
  }

  ExperimentResult result;
  for (auto& o : outcomes) {
    result.warnings.insert(result.warnings.end(), o.warnings.begin(), o.warnings.end());
    if (!o.result) continue;
    result.folds.push_back(*o.result);
    result.curves.push_back(std::move(o.curve));
    result.traces.push_back(std::move(o.trace));
  }
  result.summary = summarize_folds(result.folds);
  return result;
}

CvSummary summarize_folds(const std::vector<FoldResult>& folds) {
  CvSummary s;
  s.n_folds = static_cast<int>(folds.size());
  for (auto name : kMetricNames) {
    std::vector<double> values;
    for (const auto& f : folds)
      if (auto m = metric_by_name(f.performance, f.fairness, name)) values.push_back(*m);
    MetricSummary ms;
    ms.n_defined = static_cast<int>(values.size());
    if (!values.empty()) {
      ms.mean = mean_of(values);
      ms.std = sample_std(values, *ms.mean);
    }
    s.metrics[std::string(name)] = ms;
  }
  return s;
}

double t_critical(int degrees_of_freedom, double alpha) {
  if (degrees_of_freedom < 1) throw DataError("t-test needs at least one degree of freedom");
  const boost::math::students_t dist(static_cast<double>(degrees_of_freedom));
  return boost::math::quantile(boost::math::complement(dist, alpha / 2.0));
}

DiffSummary compare(const std::vector<FoldResult>& base, const std::vector<FoldResult>& mitigated) {
  if (base.size() != mitigated.size()) throw DataError("compare: runs have different fold counts");
  for (std::size_t i = 0; i < base.size(); ++i)
    if (base[i].fold_index != mitigated[i].fold_index) throw DataError("compare: fold indices differ");

  DiffSummary out;
  out.n_folds = static_cast<int>(base.size());
  for (auto name : kMetricNames) {
    std::vector<double> diffs;
    for (std::size_t i = 0; i < base.size(); ++i) {
      const Metric b = metric_by_name(base[i].performance, base[i].fairness, name);
      const Metric m = metric_by_name(mitigated[i].performance, mitigated[i].fairness, name);
      if (b && m) diffs.push_back(*m - *b);
    }
    MetricDiff d;
    d.n = static_cast<int>(diffs.size());
    if (!diffs.empty()) {
      d.mean = mean_of(diffs);
      d.std = sample_std(diffs, *d.mean);
    }
    if (d.std) {
      if (*d.std > 0.0) {
        d.t_statistic = *d.mean / (*d.std / std::sqrt(static_cast<double>(d.n)));
        d.significant = std::abs(*d.t_statistic) > t_critical(d.n - 1);
      } else {
        // Every fold moved by exactly the same amount.
        d.significant = *d.mean != 0.0;
      }
    }
    out.metrics[std::string(name)] = d;
  }
  return out;
}

nlohmann::json to_json(const CvSummary& s) {
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [name, m] : s.metrics)
    metrics[name] = {{"mean", metric_json(m.mean)}, {"std", metric_json(m.std)}, {"n_defined", m.n_defined}};
  return {{"n_folds", s.n_folds}, {"metrics", metrics}};
}

nlohmann::json to_json(const DiffSummary& s) {
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [name, d] : s.metrics)
    metrics[name] = {{"mean", metric_json(d.mean)},
                     {"std", metric_json(d.std)},
                     {"t_statistic", metric_json(d.t_statistic)},
                     {"significant", d.significant},
                     {"n", d.n}};
  return {{"n_folds", s.n_folds}, {"metrics", metrics}};
}

Schema folds_schema() {
  Schema s = {{"fold", ColumnKind::integer}, {"threshold", ColumnKind::floating}};
  for (auto name : kMetricNames) s.push_back({std::string(name), ColumnKind::floating});
  return s;
}

Table folds_table(const std::vector<FoldResult>& folds) {
  Table t("folds", folds_schema());
  for (const auto& f : folds) {
    std::vector<Cell> row = {std::int64_t{f.fold_index}, f.chosen_threshold};
    for (auto name : kMetricNames) row.push_back(metric_cell(metric_by_name(f.performance, f.fairness, name)));
    t.add_row(std::move(row));
  }
  return t;
}

std::vector<FoldResult> folds_from_table(const Table& t) {
  std::vector<FoldResult> out;
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    FoldResult f;
    f.fold_index = static_cast<int>(*cell_int(t.at(r, t.column_index("fold"))));
    f.chosen_threshold = *cell_number(t.at(r, t.column_index("threshold")));
    auto m = [&](std::string_view name) { return metric_from_cell(t.at(r, t.column_index(name))); };
    f.performance = {m("balanced_accuracy"), m("f1")};
    f.fairness = {m("statistical_parity_difference"), m("disparate_impact"), m("disparate_impact_error"),
                  m("equal_opportunity_difference"), m("average_odds_difference")};
    out.push_back(f);
  }
  return out;
}

Schema curve_schema() {
  return {{"threshold", ColumnKind::floating},
          {"balanced_accuracy", ColumnKind::floating},
          {"disparate_impact_error", ColumnKind::floating},
          {"average_odds_difference", ColumnKind::floating}};
}

Table curve_table(const SweepCurve& c) {
  Table t("curve", curve_schema());
  for (std::size_t i = 0; i < c.thresholds.size(); ++i)
    t.add_row({c.thresholds[i], metric_cell(c.balanced_accuracy[i]), metric_cell(c.di_error[i]),
               metric_cell(c.aod[i])});
  return t;
}

SweepCurve curve_from_table(const Table& t) {
  SweepCurve c;
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    const auto th = cell_number(t.at(r, 0));
    if (!th) throw DataError("curve row " + std::to_string(r + 1) + " has no threshold");
    c.thresholds.push_back(*th);
    c.balanced_accuracy.push_back(metric_from_cell(t.at(r, 1)));
    c.di_error.push_back(metric_from_cell(t.at(r, 2)));
    c.aod.push_back(metric_from_cell(t.at(r, 3)));
  }
  return c;
}

}  // namespace fairpsy
