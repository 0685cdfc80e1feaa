#include "fairpsy/cli.hpp"

#include "fairpsy/evaluate.hpp"
#include "fairpsy/featurize.hpp"
#include "fairpsy/report.hpp"
#include "fairpsy/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

namespace fairpsy {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

Table load_features(const fs::path& path) {
  try {
    return load_csv(path, feature_schema(false));
  } catch (const DataError&) {
    // Tables written with --drop-duration lack one column.
    try {
      return load_csv(path, feature_schema(true));
    } catch (const DataError&) {
    }
    throw;
  }
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int cmd_synth(const fs::path& config_path, const fs::path& out_dir, std::ostream& out) {
  Stopwatch clock;
  const SynthConfig cfg = synth_config_from_json(read_config(config_path));
  const RawEhrBundle bundle = generate(cfg);
  fs::create_directories(out_dir);
  write_bundle(bundle, out_dir);
  write_text(out_dir / "config.json", to_json(cfg).dump(2) + "\n");
  out << to_json(summarize(bundle)).dump() << '\n';
  write_manifest({"synth", to_json(cfg), cfg.seed, {config_path}, clock.seconds()}, out_dir);
  return exit_ok;
}

int cmd_featurize(const fs::path& in_dir, const fs::path& out_dir, const FeaturizeOptions& options,
                  std::ostream& out) {
  Stopwatch clock;
  const RawEhrBundle bundle = read_bundle(in_dir);
  const FeatureSet fs_ = assemble(bundle, DoseTable(), options);
  fs::create_directories(out_dir);
  write_csv(fs_.features, out_dir / "features.csv");
  write_text(out_dir / "provenance.json", to_json(fs_.provenance).dump(2) + "\n");
  out << fs_.features.n_rows() << " admissions, " << fs_.features.columns().size() << " columns\n";

  std::vector<fs::path> inputs;
  for (auto file : kBundleFiles) inputs.push_back(in_dir / file);
  const nlohmann::json echo = {{"drop_duration", options.drop_duration},
                               {"primary_diagnosis_dates_only", options.primary_diagnosis_dates_only}};
  write_manifest({"featurize", echo, 0, inputs, clock.seconds()}, out_dir);
  return exit_ok;
}

int cmd_evaluate(const fs::path& features_path, const fs::path& config_path, const fs::path& out_dir,
                 bool force_parallel, std::ostream& out, std::ostream& err) {
  Stopwatch clock;
  const nlohmann::json raw = read_config(config_path);
  ExperimentConfig cfg = experiment_config_from_json(raw);
  if (force_parallel) cfg.parallel = true;
  bool gender_as_feature = true;
  try {
    gender_as_feature = raw.value("gender_as_feature", true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("gender_as_feature: ") + e.what());
  }

  const LabeledDataset ds = experiment_dataset(load_features(features_path), gender_as_feature);
  const ExperimentResult result = run_experiment(ds, cfg);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  if (result.folds.empty()) throw DataError("no fold could be evaluated");

  fs::create_directories(out_dir / "curves");
  write_csv(folds_table(result.folds), out_dir / "folds.csv");
  for (std::size_t i = 0; i < result.folds.size(); ++i)
    write_csv(curve_table(result.curves[i]),
              out_dir / "curves" / ("fold_" + std::to_string(result.folds[i].fold_index) + ".csv"));

  nlohmann::json echo = to_json(cfg);
  echo["gender_as_feature"] = gender_as_feature;
  const nlohmann::json summary = {{"config", echo},
                                  {"n_rows", ds.n_rows()},
                                  {"n_features", ds.n_features()},
                                  {"summary", to_json(result.summary)},
                                  {"warnings", result.warnings}};
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");

  for (auto name : kMetricNames) {
    const auto& m = result.summary.metrics.at(std::string(name));
    out << name << ": " << format_mean_std(m.mean, m.std) << '\n';
  }
  write_manifest({"evaluate", echo, cfg.seed, {features_path, config_path}, clock.seconds()}, out_dir);
  return exit_ok;
}

int cmd_compare(const fs::path& base_dir, const fs::path& mitigated_dir, const fs::path& out_dir,
                std::ostream& out) {
  Stopwatch clock;
  const fs::path base_folds = base_dir / "folds.csv", mitigated_folds = mitigated_dir / "folds.csv";
  const DiffSummary diff =
      compare(folds_from_table(load_csv(base_folds, folds_schema())),
              folds_from_table(load_csv(mitigated_folds, folds_schema())));
  fs::create_directories(out_dir);
  write_text(out_dir / "diffs.json", to_json(diff).dump(2) + "\n");
  for (auto name : kMetricNames) {
    const auto& d = diff.metrics.at(std::string(name));
    out << name << ": " << format_mean_std(d.mean, d.std) << (d.significant ? " (significant)" : "") << '\n';
  }
  const nlohmann::json echo = {{"base", base_dir.string()}, {"mitigated", mitigated_dir.string()}};
  write_manifest({"compare", echo, 0, {base_folds, mitigated_folds}, clock.seconds()}, out_dir);
  return exit_ok;
}

int cmd_report(const std::vector<std::string>& run_dirs, const fs::path& out_dir, std::ostream& out) {
  Stopwatch clock;
  std::vector<RunRecord> runs;
  std::vector<fs::path> inputs;
  for (const auto& d : run_dirs) {
    runs.push_back(load_run(d));
    inputs.push_back(fs::path(d) / "folds.csv");
    inputs.push_back(fs::path(d) / "summary.json");
  }
  const auto written = write_report(runs, out_dir);
  out << "wrote " << written.size() << " files to " << out_dir.string() << '\n';
  write_manifest({"report", nlohmann::json{{"runs", run_dirs}}, 0, inputs, clock.seconds()}, out_dir);
  return exit_ok;
}

}  // namespace

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("file not found: " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void write_manifest(const RunManifest& m, const fs::path& out_dir) {
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& p : m.inputs) inputs[p.string()] = file_digest(p);

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(out_dir))
    if (entry.is_regular_file()) {
      const fs::path rel = fs::relative(entry.path(), out_dir);
      if (rel != "manifest.json" && rel != "manifest.json.tmp") files.push_back(rel);
    }
  std::sort(files.begin(), files.end());
  nlohmann::json outputs = nlohmann::json::object();
  for (const auto& rel : files) outputs[rel.generic_string()] = file_digest(out_dir / rel);

  const nlohmann::json j = {{"tool", "fairpsy"},
                            {"version", kToolVersion},
                            {"command", m.command},
                            {"config", m.config},
                            {"seed", m.seed},
                            {"inputs", inputs},
                            {"outputs", outputs},
                            {"finished_at_unix", static_cast<std::int64_t>(std::time(nullptr))},
                            {"wall_clock_seconds", m.wall_clock_seconds}};
  const fs::path tmp = out_dir / "manifest.json.tmp";
  write_text(tmp, j.dump(2) + "\n");
  fs::rename(tmp, out_dir / "manifest.json");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fairness experiments for benzodiazepine prescription prediction", "fairpsy"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string config, out_dir, in_dir, features, base, mitigated;
  std::vector<std::string> runs;
  FeaturizeOptions featurize_options;
  bool parallel = false;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic EHR bundle");
  synth->add_option("--config", config, "Generator config (JSON)")->required();
  synth->add_option("--out", out_dir, "Output directory")->required();

  auto* featurize = app.add_subcommand("featurize", "Build the per-admission feature table");
  featurize->add_option("--in", in_dir, "Directory with the five EHR tables")->required();
  featurize->add_option("--out", out_dir, "Output directory")->required();
  featurize->add_flag("--drop-duration,--drop_duration", featurize_options.drop_duration,
                      "Leave out the admission duration");
  featurize->add_flag("--primary-dates-only", featurize_options.primary_diagnosis_dates_only,
                      "Ignore diagnoses without a recorded diagnosis date");

  auto* evaluate = app.add_subcommand("evaluate", "Run grouped cross-validation");
  evaluate->add_option("--features", features, "features.csv")->required();
  evaluate->add_option("--config", config, "Experiment config (JSON)")->required();
  evaluate->add_option("--out", out_dir, "Output directory")->required();
  evaluate->add_flag("--parallel", parallel, "Evaluate folds concurrently");

  auto* cmp = app.add_subcommand("compare", "Paired per-fold differences between two runs");
  cmp->add_option("--base", base, "Baseline run directory")->required();
  cmp->add_option("--mitigated", mitigated, "Mitigated run directory")->required();
  cmp->add_option("--out", out_dir, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Write report.md and threshold charts");
  report->add_option("runs", runs, "Run directories")->required();
  report->add_option("--out", out_dir, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_config;
  }

  try {
    if (synth->parsed()) return cmd_synth(config, out_dir, out);
    if (featurize->parsed()) return cmd_featurize(in_dir, out_dir, featurize_options, out);
    if (evaluate->parsed()) return cmd_evaluate(features, config, out_dir, parallel, out, err);
    if (cmp->parsed()) return cmd_compare(base, mitigated, out_dir, out);
    if (report->parsed()) return cmd_report(runs, out_dir, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return exit_data;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_failure;
  }
  return exit_config;
}

}  // namespace fairpsy
