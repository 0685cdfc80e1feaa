// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails.

#include "fairpsy/cli.hpp"
#include "fairpsy/evaluate.hpp"
#include "fairpsy/featurize.hpp"
#include "fairpsy/logistic_objective.hpp"
#include "fairpsy/synth.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace fairpsy;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "failed: " << what << "; ";
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

LabeledDataset synthetic(std::uint64_t seed, int n_patients, double bias) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_patients = n_patients;
  cfg.bias_strength = bias;
  return experiment_dataset(assemble(generate(cfg), DoseTable()).features);
}

Eigen::VectorXi column(const std::vector<oracle::Triple>& rows, int oracle::Triple::*field) {
  Eigen::VectorXi v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) v[static_cast<Eigen::Index>(i)] = rows[i].*field;
  return v;
}

void criterion_1(Verdict& v) {
  const auto start = Clock::now();
  std::mt19937_64 rng(1);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string m = oracle::check_metrics(oracle::random_triples(rng, 64));
    if (!m.empty()) {
      if (mismatches == 0) v.detail << "trial " << trial << " differs on " << m << "; ";
      ++mismatches;
    }
  }
  const double t = seconds_since(start);
  v.require(mismatches == 0, std::to_string(mismatches) + " datasets disagree with the oracle");
  v.require(t < 10.0, "runtime under 10 s");
  v.detail << "1000 datasets, " << t << " s";
}

void criterion_2(Verdict& v) {
  std::mt19937_64 rng(2);
  long double worst_rate = 0, worst_sum = 0;
  int done = 0;
  while (done < 1000) {
    const auto rows = oracle::random_triples(rng, 200);
    const oracle::Tally t = oracle::tally(rows);
    bool empty = false;
    for (int g = 0; g < 2; ++g)
      for (int l = 0; l < 2; ++l) empty |= t[g][l][0] + t[g][l][1] == 0;
    if (empty) continue;
    ++done;
    const Eigen::VectorXi y = column(rows, &oracle::Triple::label), s = column(rows, &oracle::Triple::group);
    const Vector w = reweigh(y, s);
    long double pos[2] = {0, 0}, tot[2] = {0, 0}, sum = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      tot[s[i]] += w[i];
      if (y[i] == 1) pos[s[i]] += w[i];
      sum += w[i];
    }
    const long double overall = (pos[0] + pos[1]) / (tot[0] + tot[1]);
    for (int g = 0; g < 2; ++g) worst_rate = std::max(worst_rate, std::abs(pos[g] / tot[g] - overall));
    worst_sum = std::max(worst_sum, std::abs(sum - static_cast<long double>(y.size())));
  }
  v.require(worst_rate <= 1e-12L, "weighted P(Y=1|S=s) = P(Y=1) within 1e-12");
  v.require(worst_sum <= 1e-9L, "sum of weights = n within 1e-9");
  v.detail << "1000 datasets, max rate gap " << static_cast<double>(worst_rate) << ", max |sum w - n| "
           << static_cast<double>(worst_sum);
}

void criterion_3(Verdict& v) {
  const Eigen::VectorXi s{{1, 1, 1, 1, 1, 1, 0, 0, 0, 0}}, y{{1, 1, 1, 1, 0, 0, 1, 1, 0, 0}};
  const Vector w = reweigh(y, s);
  const double expected[10] = {0.9, 0.9, 0.9, 0.9, 1.2, 1.2, 1.2, 1.2, 0.8, 0.8};
  for (int i = 0; i < 10; ++i) v.require(std::abs(w[i] - expected[i]) < 1e-15, "reweighing weights 0.9/1.2/1.2/0.8");

  const Eigen::VectorXi fy{{1, 1, 0, 0, 1, 1, 0, 0}}, fyhat{{1, 0, 1, 0, 1, 0, 0, 0}},
      fs{{1, 1, 1, 1, 0, 0, 0, 0}};
  const FairnessReport r = fairness_report(confusion_by_group(fy, fyhat, fs));
  v.require(r.spd && *r.spd == -0.25, "8-row spd = -0.25");
  v.require(r.di && *r.di == 0.5, "8-row di = 0.5");
  v.require(r.aod && *r.aod == -0.25, "8-row aod = -0.25");
  const Metric e = disparate_impact_error(0.793);
  v.require(e && std::abs(*e - 0.207) < 1e-12, "di 0.793 gives di_error 0.207");
  v.detail << "weights " << w[0] << "/" << w[4] << "/" << w[6] << "/" << w[8] << ", spd " << *r.spd << ", di "
           << *r.di << ", aod " << *r.aod << ", di_error(0.793) " << *e;
}

void criterion_4(Verdict& v) {
  std::mt19937_64 rng(4);
  std::normal_distribution<long double> normal;
  std::uniform_real_distribution<long double> weight(0.3L, 2.0L);
  long double worst = 0;
  for (int problem = 0; problem < 20; ++problem) {
    const int n = 5 + static_cast<int>(rng() % 46), d = 1 + static_cast<int>(rng() % 8);
    MatrixX<long double> x(n, d);
    VectorX<long double> y(n), w(n);
    Eigen::VectorXi s(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) x(i, j) = normal(rng);
      y[i] = static_cast<long double>(rng() % 2);
      s[i] = i < 2 ? i : static_cast<int>(rng() % 2);
      w[i] = weight(rng);
    }
    for (long double eta : {0.0L, 5.0L, 25.0L}) {
      const LogisticObjective<long double> f(x, y, s, w, 1.0L, eta);
      for (int point = 0; point < 10; ++point) {
        VectorX<long double> theta(d + 1), grad, fd(d + 1);
        for (int j = 0; j <= d; ++j) theta[j] = normal(rng);
        f.value_and_gradient(theta, grad);
        const long double h = 1e-6L;
        for (int j = 0; j <= d; ++j) {
          VectorX<long double> up = theta, down = theta;
          up[j] += h;
          down[j] -= h;
          fd[j] = (f.value(up) - f.value(down)) / (2 * h);
        }
        worst = std::max(worst, (grad - fd).norm() / std::max(1e-12L, std::max(grad.norm(), fd.norm())));
      }
    }
  }
  v.require(worst < 1e-6L, "relative error below 1e-6");
  v.detail << "600 points, max relative error " << static_cast<double>(worst);
}

void criterion_5(Verdict& v) {
  const LabeledDataset ds = synthetic(5, 800, 0.5);
  ExperimentConfig base;
  base.seed = 5;
  ExperimentConfig zero = base;
  zero.mitigation = Mitigation::prejudice(0.0);
  const CvSummary a = run_experiment(ds, base).summary, b = run_experiment(ds, zero).summary;
  double worst = 0;
  for (const auto& [name, m] : a.metrics) {
    const MetricSummary& o = b.metrics.at(name);
    v.require(m.mean.has_value() == o.mean.has_value() && m.std.has_value() == o.std.has_value(),
              name + " defined in both runs");
    if (m.mean && o.mean) worst = std::max(worst, std::abs(*m.mean - *o.mean));
    if (m.std && o.std) worst = std::max(worst, std::abs(*m.std - *o.std));
  }
  v.require(worst <= 1e-6, "prejudice(0) summary within 1e-6 of the unmitigated one");

  std::vector<double> pis;
  for (double eta : {0.0, 1.0, 5.0, 25.0}) {
    LogisticConfig cfg;
    cfg.eta = eta;
    pis.push_back(prejudice_index(predict_scores(train_logistic(ds, cfg), ds.features()), ds.protected_attr(),
                                  ds.weights()));
  }
  for (std::size_t i = 1; i < pis.size(); ++i) v.require(pis[i] <= pis[i - 1], "training PI non-increasing in eta");
  v.detail << "max summary gap " << worst << "; PI at eta 0/1/5/25: " << pis[0] << " " << pis[1] << " " << pis[2]
           << " " << pis[3];
}

struct ArmMeans {
  double di = 0, spd = 0, aod = 0, ba = 0;
};

void criterion_6(Verdict& v) {
  const auto start = Clock::now();
  struct Arm {
    std::string name;
    Classifier classifier;
    Mitigation mitigation;
  };
  const std::vector<Arm> arms = {{"lr_none", Classifier::logistic, Mitigation::none()},
                                 {"lr_reweigh", Classifier::logistic, Mitigation::reweigh()},
                                 {"lr_prejudice", Classifier::logistic, Mitigation::prejudice(25.0)},
                                 {"rf_none", Classifier::forest, Mitigation::none()},
                                 {"rf_reweigh", Classifier::forest, Mitigation::reweigh()}};
  const int seeds = 5;
  std::map<std::string, ArmMeans> mean;
  for (int seed = 1; seed <= seeds; ++seed) {
    const LabeledDataset ds = synthetic(static_cast<std::uint64_t>(seed), 3000, 0.5);
    for (const Arm& arm : arms) {
      ExperimentConfig cfg;
      cfg.classifier = arm.classifier;
      cfg.mitigation = arm.mitigation;
      cfg.seed = static_cast<std::uint64_t>(seed);
      const CvSummary s = run_experiment(ds, cfg).summary;
      auto get = [&](const char* metric) {
        const Metric m = s.metrics.at(metric).mean;
        if (!m) throw DataError(arm.name + ": " + metric + " undefined");
        return *m / seeds;
      };
      ArmMeans& a = mean[arm.name];
      a.di += get("disparate_impact");
      a.spd += get("statistical_parity_difference");
      a.aod += get("average_odds_difference");
      a.ba += get("balanced_accuracy");
    }
  }
  const double t = seconds_since(start);

  for (const char* clf : {"lr", "rf"}) {
    const std::string c = clf;
    const ArmMeans& b = mean.at(c + "_none");
    const ArmMeans& r = mean.at(c + "_reweigh");
    v.require(b.di < 1.0, c + " baseline DI < 1");
    v.require(r.di - b.di > 0.0, c + " reweighing increases DI");
    v.require(std::abs(r.aod) < std::abs(b.aod), c + " reweighing decreases |AOD|");
    v.require(std::abs(r.spd) < std::abs(b.spd), c + " reweighing decreases |SPD|");
    v.require(std::abs(r.ba - b.ba) <= 0.02, c + " reweighed BA within 0.02");
    v.detail << c << ": DI " << b.di << " -> " << r.di << ", SPD " << b.spd << " -> " << r.spd << ", AOD " << b.aod
             << " -> " << r.aod << ", BA " << b.ba << " -> " << r.ba << "; ";
  }
  const ArmMeans& b = mean.at("lr_none");
  const ArmMeans& p = mean.at("lr_prejudice");
  v.require(std::abs(p.spd) < std::abs(b.spd), "prejudice remover reduces |SPD|");
  v.require(b.ba - p.ba >= 0.0, "prejudice remover BA cost >= 0");
  v.require(t < 600.0, "full run under 10 minutes");
  v.detail << "lr prejudice(25): SPD " << b.spd << " -> " << p.spd << ", BA " << b.ba << " -> " << p.ba << "; " << t
           << " s";
}

void criterion_7(Verdict& v) {
  int experiments = 0, folds = 0;
  for (int i = 0; i < 100; ++i) {
    const LabeledDataset ds = synthetic(static_cast<std::uint64_t>(1000 + i), 100 + 5 * (i % 10), 0.5);
    ExperimentConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(i);
    cfg.k_folds = 2 + i % 4;
    cfg.inner_train_fraction = 0.5 + 0.05 * (i % 5);
    switch (i % 4) {
      case 0: break;
      case 1: cfg.mitigation = Mitigation::reweigh(); break;
      case 2: cfg.mitigation = Mitigation::prejudice(5.0); break;
      default:
        cfg.classifier = Classifier::forest;
        cfg.mitigation = i % 8 == 3 ? Mitigation::none() : Mitigation::reweigh();
        cfg.forest.n_trees = 10;
    }
    const ExperimentResult r = run_experiment(ds, cfg);
    const std::string violation = oracle::check_protocol(ds, cfg, r);
    v.require(violation.empty(), "experiment " + std::to_string(i) + ": " + violation);
    for (const auto& f : r.folds)
      v.require(std::find(cfg.threshold_grid.begin(), cfg.threshold_grid.end(), f.chosen_threshold) !=
                    cfg.threshold_grid.end(),
                "threshold from the grid");
    ++experiments;
    folds += static_cast<int>(r.folds.size());
  }
  v.require(folds > 0, "at least one evaluated fold");
  v.detail << experiments << " experiments, " << folds << " folds checked";
}

void criterion_8(Verdict& v) {
  const std::vector<std::pair<std::string, double>> table = {
      {"Diazepam", 1.0},          {"Alprazolam", 10.0},  {"Bromazepam", 1.0},   {"Brotizolam", 40.0},
      {"Chlordiazepoxide", 0.5},  {"Clobazam", 0.5},     {"Clorazepate potassium", 0.75},
      {"Flunitrazepam", 0.1},     {"Flurazepam", 0.33},  {"Lorazepam", 5.0},    {"Lormetazepam", 10.0},
      {"Midazolam", 1.33},        {"Nitrazepam", 1.0},   {"Oxazepam", 0.33},    {"Temazepam", 1.0},
      {"Zolpidem", 1.0},          {"Zopiclone", 1.33}};
  const DoseTable doses;
  v.require(doses.size() == table.size(), "17 drugs in the table");
  for (const auto& [drug, m] : table)
    for (double mg : {0.0, 1.0, 2.5, 10.0})
      v.require(diazepam_equivalent(drug, mg, doses) == mg * m, drug + " converts exactly");
  bool raised = false;
  try {
    diazepam_equivalent("Quetiapine", 25.0, doses);
  } catch (const DataError& e) {
    raised = std::string(e.what()).find("unknown tranquilizer") != std::string::npos;
  }
  v.require(raised, "unknown drug raises DataError");
  v.detail << table.size() << " drugs checked, unknown drug rejected";
}

void criterion_9(Verdict& v) {
  test::TempDir dir;
  test::write_file(dir / "synth.json", R"({"seed": 9, "n_patients": 400, "bias_strength": 0.5})");
  std::ostringstream sink;
  auto cli = [&](const std::vector<std::string>& args) { return run_cli(args, sink, sink); };
  v.require(cli({"synth", "--config", (dir / "synth.json").string(), "--out", (dir / "ehr").string()}) == 0,
            "synth");
  v.require(cli({"featurize", "--in", (dir / "ehr").string(), "--out", (dir / "feat").string()}) == 0, "featurize");
  const std::string features = (dir / "feat" / "features.csv").string();

  const std::vector<std::pair<std::string, std::string>> configs = {
      {"lr", R"({"classifier": "logistic", "mitigation": "reweigh", "seed": 9})"},
      {"rf", R"({"classifier": "forest", "mitigation": "none", "seed": 9, "forest": {"n_trees": 50}})"}};
  int compared = 0;
  for (const auto& [name, text] : configs) {
    test::write_file(dir / (name + ".json"), text);
    std::vector<std::string> runs = {name + "_a", name + "_b", name + "_par"};
    for (const auto& run : runs) {
      std::vector<std::string> args = {"evaluate", "--features", features, "--config",
                                       (dir / (name + ".json")).string(), "--out", (dir / run).string()};
      if (run.ends_with("_par")) args.push_back("--parallel");
      v.require(cli(args) == 0, "evaluate " + run);
    }
    for (const char* file : {"folds.csv", "summary.json"})
      for (std::size_t r = 1; r < runs.size(); ++r) {
        v.require(test::read_file(dir / runs[0] / file) == test::read_file(dir / runs[r] / file),
                  runs[0] + " vs " + runs[r] + " " + file);
        ++compared;
      }
  }
  v.detail << compared << " file pairs byte-identical";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"metric oracle equivalence", criterion_1},
      {"reweighing independence", criterion_2},
      {"hand values", criterion_3},
      {"gradient correctness", criterion_4},
      {"eta continuity and monotonicity", criterion_5},
      {"directional reproduction", criterion_6},
      {"protocol integrity", criterion_7},
      {"dose conversion", criterion_8},
      {"determinism", criterion_9}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
              << "): " << v.detail.str() << std::endl;
    failures += v.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
