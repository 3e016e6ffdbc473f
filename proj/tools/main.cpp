// osda: open-set domain adaptation experiments from the command line.
//
// Subcommands: adapt, baseline, sweep, split, synth, check. Every run writes
// a manifest of its fully resolved configuration; re-running from a manifest
// reproduces the outputs byte for byte.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "osda/ati.hpp"
#include "osda/common.hpp"
#include "osda/dataset.hpp"
#include "osda/eval.hpp"
#include "osda/oracle.hpp"
#include "osda/svm.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace osda;

namespace {

constexpr const char* kVersion = "osda 0.1.0";

// ---------------------------------------------------------------------------
// configuration: flat key=value files with CLI overrides
// ---------------------------------------------------------------------------

using KeyValues = std::map<std::string, std::string>;

KeyValues load_config_file(const std::string& path) {
  KeyValues kv;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto pos = line.find('=');
    if (pos == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    kv[line.substr(0, pos)] = line.substr(pos + 1);
  }
  return kv;
}

struct RunConfig {
  // inputs: either feature files or the synthetic generator
  std::string source_path;
  std::string target_path;
  std::string ground_truth_path;
  std::string labeled_targets_path;
  bool synth = false;
  SynthParams synth_params;
  double synth_translation = 0.0;  // magnitude along (1,...,1)/sqrt(D)

  std::string variant = "ati-lambda";
  double rho = 0.5;
  double epsilon = 0.01;
  int max_iter = 10;
  bool coverage = true;
  bool cover_unknown = true;
  std::string backend = "auto";
  double svm_c = 0.001;
  std::string protocol = "os";
  std::string train_on = "auto";  // baseline: s | t | st
  std::uint64_t seed = 42;
  int jobs = 1;
  std::string out_dir;
  bool dump_instances = false;
  bool plot_data = false;
};

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ConfigError("config key '" + key + "': expected 0/1, got '" + v + "'");
}

RunConfig config_from_keys(const KeyValues& kv) {
  RunConfig c;
  for (const auto& [key, value] : kv) {
    try {
      if (key == "source") c.source_path = value;
      else if (key == "target") c.target_path = value;
      else if (key == "ground_truth") c.ground_truth_path = value;
      else if (key == "labeled_targets") c.labeled_targets_path = value;
      else if (key == "synth") c.synth = parse_bool(value, key);
      else if (key == "synth_classes") c.synth_params.n_classes = std::stoi(value);
      else if (key == "synth_per_class") c.synth_params.n_per_class = std::stoi(value);
      else if (key == "synth_dim") c.synth_params.dim = std::stoi(value);
      else if (key == "synth_rotation_deg") c.synth_params.shift.rotation_deg = parse_double(value);
      else if (key == "synth_scale") c.synth_params.shift.scale = parse_double(value);
      else if (key == "synth_translation") c.synth_translation = parse_double(value);
      else if (key == "synth_unknown_ratio") c.synth_params.unknown_ratio = parse_double(value);
      else if (key == "synth_separation") c.synth_params.class_separation = parse_double(value);
      else if (key == "synth_feature_scale") c.synth_params.feature_scale = parse_double(value);
      else if (key == "variant") c.variant = value;
      else if (key == "rho") c.rho = parse_double(value);
      else if (key == "epsilon") c.epsilon = parse_double(value);
      else if (key == "max_iter") c.max_iter = std::stoi(value);
      else if (key == "coverage") c.coverage = parse_bool(value, key);
      else if (key == "cover_unknown") c.cover_unknown = parse_bool(value, key);
      else if (key == "backend") c.backend = value;
      else if (key == "svm_c") c.svm_c = parse_double(value);
      else if (key == "protocol") c.protocol = value;
      else if (key == "train_on") c.train_on = value;
      else if (key == "seed") c.seed = std::stoull(value);
      else if (key == "jobs") c.jobs = std::stoi(value);
      else if (key == "out_dir") c.out_dir = value;
      else if (key == "dump_instances") c.dump_instances = parse_bool(value, key);
      else if (key == "plot_data") c.plot_data = parse_bool(value, key);
      else if (key == "version") { /* informational */ }
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ConfigError("config key '" + key + "': bad value '" + value + "'");
    } catch (const std::out_of_range&) {
      throw ConfigError("config key '" + key + "': value out of range");
    } catch (const FormatError&) {
      throw ConfigError("config key '" + key + "': bad value '" + value + "'");
    }
  }
  return c;
}

KeyValues keys_from_config(const RunConfig& c) {
  KeyValues kv;
  kv["version"] = kVersion;
  if (!c.source_path.empty()) kv["source"] = c.source_path;
  if (!c.target_path.empty()) kv["target"] = c.target_path;
  if (!c.ground_truth_path.empty()) kv["ground_truth"] = c.ground_truth_path;
  if (!c.labeled_targets_path.empty()) kv["labeled_targets"] = c.labeled_targets_path;
  kv["synth"] = c.synth ? "1" : "0";
  if (c.synth) {
    kv["synth_classes"] = std::to_string(c.synth_params.n_classes);
    kv["synth_per_class"] = std::to_string(c.synth_params.n_per_class);
    kv["synth_dim"] = std::to_string(c.synth_params.dim);
    kv["synth_rotation_deg"] = format_double(c.synth_params.shift.rotation_deg);
    kv["synth_scale"] = format_double(c.synth_params.shift.scale);
    kv["synth_translation"] = format_double(c.synth_translation);
    kv["synth_unknown_ratio"] = format_double(c.synth_params.unknown_ratio);
    kv["synth_separation"] = format_double(c.synth_params.class_separation);
    kv["synth_feature_scale"] = format_double(c.synth_params.feature_scale);
  }
  kv["variant"] = c.variant;
  kv["rho"] = format_double(c.rho);
  kv["epsilon"] = format_double(c.epsilon);
  kv["max_iter"] = std::to_string(c.max_iter);
  kv["coverage"] = c.coverage ? "1" : "0";
  kv["cover_unknown"] = c.cover_unknown ? "1" : "0";
  kv["backend"] = c.backend;
  kv["svm_c"] = format_double(c.svm_c);
  kv["protocol"] = c.protocol;
  kv["train_on"] = c.train_on;
  kv["seed"] = std::to_string(c.seed);
  kv["jobs"] = std::to_string(c.jobs);
  kv["out_dir"] = c.out_dir;
  kv["dump_instances"] = c.dump_instances ? "1" : "0";
  kv["plot_data"] = c.plot_data ? "1" : "0";
  return kv;
}

std::string manifest_text(const RunConfig& c) {
  std::string out;
  for (const auto& [k, v] : keys_from_config(c)) out += k + "=" + v + "\n";
  return out;
}

SolveBackend parse_backend(const std::string& name) {
  if (name == "exact") return SolveBackend::Exact;
  if (name == "heuristic") return SolveBackend::Heuristic;
  if (name == "auto") return SolveBackend::Auto;
  throw ConfigError("unknown backend '" + name + "'");
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

struct LoadedData {
  Dataset source;
  Dataset target;
  std::optional<GroundTruth> truth;
  ClassCatalog catalog;
  std::vector<std::string> class_names;                  // active classes
  std::vector<std::pair<int, int>> semi_labels;          // (target idx, class idx)
  std::vector<std::pair<std::size_t, std::string>> labeled_targets;  // (idx, label)
};

LoadedData load_inputs(const RunConfig& cfg) {
  LoadedData data;
  if (cfg.synth) {
    SynthParams p = cfg.synth_params;
    if (cfg.synth_translation != 0.0) {
      Eigen::VectorXd ones = Eigen::VectorXd::Ones(p.dim);
      p.shift.translation = cfg.synth_translation * ones / ones.norm();
    }
    OpenSetSplit split = synth_shift(p, cfg.seed);
    data.source = std::move(split.source);
    data.target = std::move(split.target);
    data.truth = std::move(split.truth);
  } else {
    if (cfg.source_path.empty() || cfg.target_path.empty())
      throw ConfigError("source and target feature files are required (or synth=1)");
    data.source = load_features(cfg.source_path, Role::Source);
    data.target = load_features(cfg.target_path, Role::Target);
    if (!cfg.ground_truth_path.empty())
      data.truth = load_ground_truth(cfg.ground_truth_path);
  }
  data.catalog = ClassCatalog::from_labels(data.source.labels);
  data.class_names = active_classes(data.source, data.catalog);

  // labeled target subset: rows labeled in the file plus the sidecar
  for (std::size_t i = 0; i < data.target.size(); ++i)
    if (data.target.is_labeled(i)) data.labeled_targets.emplace_back(i, data.target.labels[i]);
  if (!cfg.labeled_targets_path.empty()) {
    GroundTruth sidecar = load_ground_truth(cfg.labeled_targets_path);
    std::map<std::string, std::size_t> index_of_id;
    for (std::size_t i = 0; i < data.target.size(); ++i) index_of_id[data.target.ids[i]] = i;
    for (std::size_t i = 0; i < sidecar.ids.size(); ++i) {
      auto it = index_of_id.find(sidecar.ids[i]);
      if (it == index_of_id.end())
        throw DataError("labeled target id '" + sidecar.ids[i] + "' not in target set");
      data.labeled_targets.emplace_back(it->second, sidecar.labels[i]);
    }
  }
  for (const auto& [idx, label] : data.labeled_targets) {
    auto pos = std::find(data.class_names.begin(), data.class_names.end(), label);
    if (pos == data.class_names.end())
      throw LabelError("labeled target class '" + label + "' not among source classes");
    data.semi_labels.emplace_back(static_cast<int>(idx),
                                  static_cast<int>(pos - data.class_names.begin()));
  }
  return data;
}

Dataset training_set(const Dataset& base, const LoadedData& data, bool include_base,
                     bool include_labeled_targets) {
  Dataset train;
  train.role = Role::Source;
  std::size_t n = (include_base ? base.size() : 0) +
                  (include_labeled_targets ? data.labeled_targets.size() : 0);
  if (n == 0) throw DataError("empty training set");
  const Eigen::Index dim = include_base ? base.dim() : data.target.dim();
  train.features.resize(dim, static_cast<Eigen::Index>(n));
  std::size_t col = 0;
  if (include_base)
    for (std::size_t i = 0; i < base.size(); ++i) {
      train.features.col(static_cast<Eigen::Index>(col)) =
          base.features.col(static_cast<Eigen::Index>(i));
      train.ids.push_back(base.ids[i]);
      train.labels.push_back(base.labels[i]);
      ++col;
    }
  if (include_labeled_targets)
    for (const auto& [idx, label] : data.labeled_targets) {
      train.features.col(static_cast<Eigen::Index>(col)) =
          data.target.features.col(static_cast<Eigen::Index>(idx));
      train.ids.push_back(data.target.ids[idx]);
      train.labels.push_back(label);
      ++col;
    }
  return train;
}

struct RunOutput {
  std::optional<AtiResult> ati;
  OvoModel model;
  std::vector<std::string> predictions;
  std::optional<EvalReport> report;
  double reject_fraction = 0.0;  // iteration-1 outlier fraction
};

// One experiment: optionally adapt, then train, predict and score. When
// `adapt_targets` is given, the adaptation runs on that subset while
// prediction and scoring still cover the full target set.
RunOutput run_pipeline(const RunConfig& cfg, const LoadedData& data, bool adapt,
                       const Dataset* adapt_targets = nullptr) {
  RunOutput out;
  const Dataset& ati_target = adapt_targets ? *adapt_targets : data.target;

  Dataset classifier_base = data.source;
  if (adapt) {
    AtiConfig ati_cfg;
    auto [variant, k] = parse_variant(cfg.variant);
    ati_cfg.variant = variant;
    ati_cfg.neighbor_k = k;
    ati_cfg.rho = cfg.rho;
    ati_cfg.epsilon = cfg.epsilon;
    ati_cfg.max_iterations = cfg.max_iter;
    ati_cfg.coverage = cfg.coverage;
    ati_cfg.cover_unknown = cfg.cover_unknown;
    ati_cfg.backend = parse_backend(cfg.backend);
    if (!adapt_targets) ati_cfg.semi_supervised_labels = data.semi_labels;
    if (data.truth)
      ati_cfg.ground_truth_labels = data.truth->catalog_labels(ati_target, data.catalog);
    if (cfg.dump_instances && !cfg.out_dir.empty()) {
      fs::create_directories(cfg.out_dir);
      ati_cfg.instance_dump_dir = cfg.out_dir;
    }
    AtiResult result = run_ati(data.source, ati_target, data.catalog, ati_cfg);
    classifier_base = result.adapted_source;
    if (!result.history.empty())
      out.reject_fraction = static_cast<double>(result.history.front().n_outliers) /
                            static_cast<double>(ati_target.size());
    out.ati = std::move(result);
  }

  bool with_source = true, with_targets = !data.labeled_targets.empty();
  if (!adapt) {
    std::string mode = cfg.train_on;
    if (mode == "auto") mode = data.labeled_targets.empty() ? "s" : "st";
    if (mode == "s") with_targets = false;
    else if (mode == "t") with_source = false;
    else if (mode != "st") throw ConfigError("train_on must be s, t, st or auto");
  }
  Dataset train = training_set(classifier_base, data, with_source, with_targets);

  SvmConfig svm_cfg;
  svm_cfg.c_param = cfg.svm_c;
  out.model = train_ovo(train, data.catalog, svm_cfg);
  out.predictions = predict(out.model, data.target);

  if (data.truth) {
    auto truth_labels = data.truth->catalog_labels(data.target, data.catalog);
    out.report = score(out.predictions, truth_labels, data.catalog,
                       parse_protocol(cfg.protocol));
  }
  return out;
}

std::string predictions_to_csv(const Dataset& target, const std::vector<std::string>& pred) {
  std::string out;
  for (std::size_t i = 0; i < pred.size(); ++i) out += target.ids[i] + "," + pred[i] + "\n";
  return out;
}

void write_run_artifacts(const RunConfig& cfg, const LoadedData& data, const RunOutput& out) {
  fs::create_directories(cfg.out_dir);
  auto path = [&](const char* name) { return (fs::path(cfg.out_dir) / name).string(); };
  write_file(path("manifest.txt"), manifest_text(cfg));
  if (out.ati) {
    save_features(out.ati->adapted_source, path("adapted_source.csv"));
    write_file(path("transform.json"), transform_to_json(out.ati->transform));
    write_file(path("history.csv"), history_to_csv(out.ati->history));
  }
  write_file(path("model.json"), model_to_json(out.model));
  write_file(path("predictions.csv"), predictions_to_csv(data.target, out.predictions));
  if (out.report) {
    write_file(path("report.json"), report_to_json(*out.report));
    write_file(path("confusion.csv"), confusion_to_csv(*out.report));
    if (cfg.plot_data) write_file(path("confusion.plot"), confusion_to_plot_data(*out.report));
  }
}

int cmd_adapt_or_baseline(const RunConfig& cfg, bool adapt) {
  if (cfg.out_dir.empty()) throw ConfigError("out_dir is required");
  LoadedData data = load_inputs(cfg);
  RunOutput out = run_pipeline(cfg, data, adapt);
  write_run_artifacts(cfg, data, out);
  if (out.report)
    std::cout << protocol_name(out.report->protocol)
              << " overall_accuracy=" << format_double(out.report->overall_accuracy)
              << " mean_class_accuracy=" << format_double(out.report->mean_class_accuracy)
              << "\n";
  else
    std::cout << "predictions written (no ground truth, no report)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepPoint {
  std::string value;
  std::vector<double> accuracies;
  std::vector<double> reject_fractions;
};

int cmd_sweep(const RunConfig& base_cfg, const std::string& var,
              const std::vector<std::string>& values, int n_seeds) {
  if (base_cfg.out_dir.empty()) throw ConfigError("out_dir is required");
  if (values.empty()) throw ConfigError("sweep needs at least one grid value");
  if (var != "rho" && var != "n_targets" && var != "unknown_ratio" && var != "seed")
    throw ConfigError("sweep variable must be rho, n_targets, unknown_ratio or seed");
  if (var == "unknown_ratio" && !base_cfg.synth)
    throw ConfigError("unknown_ratio sweeps require synth=1");

  struct Job {
    std::size_t point;
    int rep;
  };
  std::vector<Job> jobs;
  const int reps = var == "seed" ? 1 : n_seeds;
  for (std::size_t p = 0; p < values.size(); ++p)
    for (int r = 0; r < reps; ++r) jobs.push_back({p, r});

  std::vector<SweepPoint> points(values.size());
  for (std::size_t p = 0; p < values.size(); ++p) points[p].value = values[p];
  std::vector<double> acc(jobs.size()), rej(jobs.size());
  std::vector<std::string> errors(jobs.size());

  auto run_job = [&](std::size_t j) {
    const Job& job = jobs[j];
    RunConfig cfg = base_cfg;
    const std::string& value = values[job.point];
    try {
      std::optional<std::size_t> n_targets;
      if (var == "rho") cfg.rho = parse_double(value);
      else if (var == "unknown_ratio") cfg.synth_params.unknown_ratio = parse_double(value);
      else if (var == "seed") cfg.seed = std::stoull(value);
      else n_targets = static_cast<std::size_t>(std::stoull(value));
      if (var != "seed")
        cfg.seed = Rng::stream(base_cfg.seed, "sweep/" + var + "/" + value + "/rep" +
                                                  std::to_string(job.rep))
                       .next_u64();
      LoadedData data = load_inputs(cfg);
      if (!data.truth) throw ConfigError("sweeps need ground truth for scoring");
      std::optional<Dataset> subset;
      if (n_targets)
        subset = subsample_total(data.target, *n_targets,
                                 Rng::stream(cfg.seed, "sample").next_u64());
      RunOutput out = run_pipeline(cfg, data, /*adapt=*/true, subset ? &*subset : nullptr);
      acc[j] = out.report->overall_accuracy;
      rej[j] = out.reject_fraction;
    } catch (const Error& e) {
      errors[j] = e.what();
    }
  };

  const int n_workers = std::max(1, std::min(base_cfg.jobs, static_cast<int>(jobs.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (int w = 0; w < n_workers; ++w)
    workers.emplace_back([&]() {
      for (std::size_t j = next.fetch_add(1); j < jobs.size(); j = next.fetch_add(1)) run_job(j);
    });
  for (auto& t : workers) t.join();
  for (std::size_t j = 0; j < jobs.size(); ++j)
    if (!errors[j].empty()) throw Error("sweep point " + values[jobs[j].point] + ": " + errors[j]);

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    points[jobs[j].point].accuracies.push_back(acc[j]);
    points[jobs[j].point].reject_fractions.push_back(rej[j]);
  }

  std::string csv = "variable,value,n_runs,acc_mean,acc_std,acc_min,acc_max,reject_pct_mean\n";
  json jout = json::array();
  for (const auto& pt : points) {
    double mean = 0, lo = kInfinity, hi = -kInfinity, rj = 0;
    for (double a : pt.accuracies) {
      mean += a;
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
    mean /= static_cast<double>(pt.accuracies.size());
    double var_sum = 0;
    for (double a : pt.accuracies) var_sum += (a - mean) * (a - mean);
    double sd = pt.accuracies.size() > 1
                    ? std::sqrt(var_sum / static_cast<double>(pt.accuracies.size() - 1))
                    : 0.0;
    for (double r : pt.reject_fractions) rj += r;
    rj = 100.0 * rj / static_cast<double>(pt.reject_fractions.size());
    csv += var + "," + pt.value + "," + std::to_string(pt.accuracies.size()) + "," +
           format_double(mean) + "," + format_double(sd) + "," + format_double(lo) + "," +
           format_double(hi) + "," + format_double(rj) + "\n";
    jout.push_back({{"variable", var},
                    {"value", pt.value},
                    {"acc_mean", mean},
                    {"acc_std", sd},
                    {"acc_min", lo},
                    {"acc_max", hi},
                    {"reject_pct_mean", rj},
                    {"accuracies", pt.accuracies}});
  }
  fs::create_directories(base_cfg.out_dir);
  write_file((fs::path(base_cfg.out_dir) / "manifest.txt").string(), manifest_text(base_cfg));
  write_file((fs::path(base_cfg.out_dir) / "sweep.csv").string(), csv);
  write_file((fs::path(base_cfg.out_dir) / "sweep.json").string(), jout.dump(2));
  std::cout << csv;
  return 0;
}

// ---------------------------------------------------------------------------
// split / synth / check
// ---------------------------------------------------------------------------

ClassRange parse_range(const std::string& text) {
  if (text.empty()) return ClassRange::none();
  auto pos = text.find(':');
  if (pos == std::string::npos) throw ConfigError("range must be lo:hi, got '" + text + "'");
  ClassRange r;
  r.lo = std::stoi(text.substr(0, pos));
  r.hi = std::stoi(text.substr(pos + 1));
  return r;
}

int cmd_split(const std::string& pool_path, int n_shared, const std::string& src_range,
              const std::string& tgt_range, std::uint64_t seed, int per_class,
              const std::string& out_dir) {
  Dataset pool = load_features(pool_path, Role::Source);
  // subsampling happens on the pool, per fine-grained class, before the
  // unknown ranges are collapsed into one label
  if (per_class > 0)
    pool = subsample_per_class(pool, static_cast<std::size_t>(per_class),
                               Rng::stream(seed, "split/per-class").next_u64());
  OpenSetSplit split =
      make_open_set_split(pool, n_shared, parse_range(src_range), parse_range(tgt_range), seed);
  fs::create_directories(out_dir);
  save_features(split.source, (fs::path(out_dir) / "source.csv").string());
  save_features(split.target, (fs::path(out_dir) / "target.csv").string());
  save_ground_truth(split.truth, (fs::path(out_dir) / "ground_truth.csv").string());
  std::cout << "source: " << split.source.size() << " samples, target: " << split.target.size()
            << " samples\n";
  return 0;
}

int cmd_synth(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw ConfigError("out_dir is required");
  RunConfig c = cfg;
  c.synth = true;
  LoadedData data = load_inputs(c);
  fs::create_directories(cfg.out_dir);
  save_features(data.source, (fs::path(cfg.out_dir) / "source.csv").string());
  save_features(data.target, (fs::path(cfg.out_dir) / "target.csv").string());
  save_ground_truth(*data.truth, (fs::path(cfg.out_dir) / "ground_truth.csv").string());
  write_file((fs::path(cfg.out_dir) / "manifest.txt").string(), manifest_text(c));
  std::cout << "source: " << data.source.size() << " samples, target: " << data.target.size()
            << " samples\n";
  return 0;
}

int cmd_check(const std::string& instance_path) {
  json j = json::parse(read_file(instance_path), nullptr, false);
  if (j.is_discarded()) throw FormatError("invalid instance JSON: " + instance_path);

  const auto& rows = j.at("costs");
  const auto C = static_cast<Eigen::Index>(rows.size());
  if (C == 0) throw FormatError("empty cost matrix");
  const auto T = static_cast<Eigen::Index>(rows[0].size());
  CostMatrix d(C, T);
  for (Eigen::Index c = 0; c < C; ++c) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(c)].size()) != T)
      throw FormatError("ragged cost matrix");
    for (Eigen::Index t = 0; t < T; ++t)
      d(c, t) = rows[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)].get<double>();
  }
  SolveConfig cfg;
  if (j.contains("lambda")) {
    if (j["lambda"].is_string())
      cfg.lambda = parse_double(j["lambda"].get<std::string>());
    else
      cfg.lambda = j["lambda"].get<double>();
  }
  if (j.contains("coverage")) cfg.coverage = j["coverage"].get<bool>();
  if (j.contains("uncovered_class")) cfg.uncovered_class = j["uncovered_class"].get<int>();
  if (j.contains("fixed"))
    for (const auto& f : j["fixed"])
      cfg.fixed_labels.emplace_back(f[0].get<int>(), f[1].get<int>());

  std::optional<ClassDistanceMatrix> dcc;
  std::optional<NeighborGraph> nbrs;
  if (j.contains("class_distances")) {
    const auto& m = j["class_distances"];
    dcc = ClassDistanceMatrix(C, C);
    for (Eigen::Index a = 0; a < C; ++a)
      for (Eigen::Index b = 0; b < C; ++b)
        (*dcc)(a, b) = m[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].get<double>();
  }
  if (j.contains("neighbors")) {
    nbrs = NeighborGraph{};
    nbrs->neighbors = j["neighbors"].get<std::vector<std::vector<int>>>();
    nbrs->k = j.value("neighbor_k", 0);
  }

  Assignment best = oracle::brute_force_assignment(d, dcc ? &*dcc : nullptr,
                                                   nbrs ? &*nbrs : nullptr, cfg);
  std::cout << "brute-force optimum: " << format_double(best.objective) << "\n";

  if (!j.contains("x")) return 0;
  if (!j.contains("o")) throw FormatError("solution has x but no o");
  const auto& x = j["x"];
  const auto& o = j["o"];
  std::vector<int> labels(static_cast<std::size_t>(T), kOutlier);
  for (Eigen::Index t = 0; t < T; ++t) {
    int chosen = -1;
    int ones = 0;
    for (Eigen::Index c = 0; c < C; ++c)
      if (x[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)].get<int>() == 1) {
        chosen = static_cast<int>(c);
        ++ones;
      }
    ones += o[static_cast<std::size_t>(t)].get<int>() == 1 ? 1 : 0;
    if (ones != 1) {
      std::cout << "INVALID: target " << t << " violates sum_c x_ct + o_t = 1\n";
      return 5;
    }
    labels[static_cast<std::size_t>(t)] = chosen;
  }
  double obj = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    int c = labels[static_cast<std::size_t>(t)];
    if (c < 0) {
      obj += cfg.lambda;
      continue;
    }
    obj += d(c, t);
    if (dcc && nbrs)
      for (int u : nbrs->neighbors[static_cast<std::size_t>(t)]) {
        int cu = labels[static_cast<std::size_t>(u)];
        if (cu >= 0) obj += (*dcc)(c, cu);
      }
  }
  std::cout << "solution objective: " << format_double(obj) << "\n";
  if (j.contains("objective")) {
    double claimed = j["objective"].get<double>();
    if (std::abs(claimed - obj) > 1e-9 * std::max(1.0, std::abs(obj))) {
      std::cout << "INVALID: claimed objective " << format_double(claimed)
                << " does not match the labeling\n";
      return 5;
    }
  }
  if (obj <= best.objective + 1e-9 * std::max(1.0, std::abs(best.objective))) {
    std::cout << "OPTIMAL\n";
    return 0;
  }
  std::cout << "SUBOPTIMAL: gap " << format_double(obj - best.objective) << "\n";
  return 5;
}

// ---------------------------------------------------------------------------

void attach_overrides(CLI::App* sub, KeyValues& overrides, std::string& config_path) {
  sub->add_option("--config", config_path, "key=value config file");
  static const std::vector<std::pair<std::string, std::string>> opts = {
      {"--source", "source"},
      {"--target", "target"},
      {"--ground-truth", "ground_truth"},
      {"--labeled-targets", "labeled_targets"},
      {"--synth", "synth"},
      {"--synth-classes", "synth_classes"},
      {"--synth-per-class", "synth_per_class"},
      {"--synth-dim", "synth_dim"},
      {"--synth-rotation-deg", "synth_rotation_deg"},
      {"--synth-scale", "synth_scale"},
      {"--synth-translation", "synth_translation"},
      {"--synth-unknown-ratio", "synth_unknown_ratio"},
      {"--synth-separation", "synth_separation"},
      {"--synth-feature-scale", "synth_feature_scale"},
      {"--variant", "variant"},
      {"--rho", "rho"},
      {"--epsilon", "epsilon"},
      {"--max-iter", "max_iter"},
      {"--coverage", "coverage"},
      {"--cover-unknown", "cover_unknown"},
      {"--backend", "backend"},
      {"--svm-c", "svm_c"},
      {"--protocol", "protocol"},
      {"--train-on", "train_on"},
      {"--seed", "seed"},
      {"--jobs", "jobs"},
      {"--out-dir", "out_dir"},
      {"--dump-instances", "dump_instances"},
      {"--plot-data", "plot_data"},
  };
  for (const auto& [flag, key] : opts) {
    auto* opt = sub->add_option(flag);
    opt->description("override config key " + key);
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    opt->each([&overrides, key = key](const std::string& v) { overrides[key] = v; });
  }
}

RunConfig resolve_config(const std::string& config_path, const KeyValues& overrides) {
  KeyValues kv;
  if (!config_path.empty()) kv = load_config_file(config_path);
  for (const auto& [k, v] : overrides) kv[k] = v;
  return config_from_keys(kv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"open-set domain adaptation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  KeyValues overrides;

  auto* adapt = app.add_subcommand("adapt", "run the iterative adaptation end to end");
  attach_overrides(adapt, overrides, config_path);
  auto* baseline = app.add_subcommand("baseline", "linear SVMs without adaptation");
  attach_overrides(baseline, overrides, config_path);

  auto* sweep = app.add_subcommand("sweep", "grid sweeps over rho/n_targets/unknown_ratio/seed");
  attach_overrides(sweep, overrides, config_path);
  std::string sweep_var;
  std::string sweep_values;
  int sweep_seeds = 5;
  sweep->add_option("--var", sweep_var, "sweep variable")->required();
  sweep->add_option("--values", sweep_values, "comma-separated grid values")->required();
  sweep->add_option("--seeds", sweep_seeds, "runs per grid point");

  auto* split = app.add_subcommand("split", "open-set split of a labeled pool");
  std::string pool_path, src_range, tgt_range, split_out;
  int n_shared = 10;
  int split_per_class = 0;
  std::uint64_t split_seed = 42;
  split->add_option("--pool", pool_path, "pool feature CSV")->required();
  split->add_option("--n-shared", n_shared, "number of shared classes");
  split->add_option("--src-unknown", src_range, "source unknown class range lo:hi");
  split->add_option("--tgt-unknown", tgt_range, "target unknown class range lo:hi");
  split->add_option("--seed", split_seed, "split seed");
  split->add_option("--per-class", split_per_class,
                    "subsample the pool to this many samples per fine-grained class");
  split->add_option("--out-dir", split_out, "output directory")->required();

  auto* synth = app.add_subcommand("synth", "generate a synthetic shifted dataset");
  attach_overrides(synth, overrides, config_path);

  auto* check = app.add_subcommand("check", "verify an assignment dump against brute force");
  std::string instance_path;
  check->add_option("instance", instance_path, "instance JSON dump")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (adapt->parsed()) return cmd_adapt_or_baseline(resolve_config(config_path, overrides), true);
    if (baseline->parsed())
      return cmd_adapt_or_baseline(resolve_config(config_path, overrides), false);
    if (sweep->parsed()) {
      std::vector<std::string> values;
      for (const auto& tok : split_csv_line(sweep_values))
        if (!tok.empty()) values.push_back(tok);
      return cmd_sweep(resolve_config(config_path, overrides), sweep_var, values, sweep_seeds);
    }
    if (split->parsed())
      return cmd_split(pool_path, n_shared, src_range, tgt_range, split_seed, split_per_class,
                       split_out);
    if (synth->parsed()) return cmd_synth(resolve_config(config_path, overrides));
    if (check->parsed()) return cmd_check(instance_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return 1;
  } catch (const SamplingError& e) {
    std::cerr << "sampling error: " << e.what() << "\n";
    return 1;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const CoverageError& e) {
    std::cerr << "coverage error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
