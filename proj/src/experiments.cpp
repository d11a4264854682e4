// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lorpman/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lorpman/errors.hpp"
#include "lorpman/io.hpp"
#include "lorpman/source_hash.hpp"

namespace lorpman {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// JSON reading
// ---------------------------------------------------------------------------

const std::vector<std::string> kToyKeys = {"seed",      "steps", "window_b",     "dirichlet_p",
                                           "optimizer", "lr",    "freeze_epoch", "record_every",
                                           "grid_resolution"};

const std::vector<std::string> kSynthKeys = {
    "seed",        "m",         "u",           "hidden",        "teacher_width", "conflict",
    "rows",        "noise",     "task",        "classes",       "train_fraction", "epochs",
    "freeze_epoch", "window_b", "batch_q",     "dirichlet_p",   "lambda_p",      "lambda_o",
    "scale_s",     "rank",      "mode",        "optimizer",     "lr",            "hinge",
    "freeze_heads", "validate_every", "front_size", "mc_samples", "ref_offset",  "orth_threshold",
    "orth_subset", "export_dataset"};

const std::vector<std::string> kAblationExtra = {"param", "values", "repeats"};

json parse_object(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (j.is_null()) return json::object();
  if (!j.is_object()) throw ParameterError("configuration must be a JSON object");
  // A run manifest can be fed back as a configuration.
  if (j.contains("config") && j.contains("kind") && j["config"].is_object()) return j["config"];
  return j;
}

void reject_unknown(const json& j, const std::vector<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParameterError("unknown configuration key '" + key + "'");
    }
  }
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0 && std::floor(d) == d && d < 1e15) return static_cast<std::size_t>(d);
  }
  throw ParameterError(std::string("'") + key + "' must be a non-negative integer");
}

std::uint64_t get_seed(const json& j, std::uint64_t fallback) {
  if (!j.contains("seed")) return fallback;
  if (!j["seed"].is_number_unsigned()) throw ParameterError("'seed' must be a non-negative integer");
  return j["seed"].get<std::uint64_t>();
}

double get_real(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ParameterError(std::string("'") + key + "' must be a number");
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) throw ParameterError(std::string("'") + key + "' must be finite");
  return v;
}

bool get_bool(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ParameterError(std::string("'") + key + "' must be true or false");
  return j[key].get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ParameterError(std::string("'") + key + "' must be a string");
  return j[key].get<std::string>();
}

Vector get_reals(const json& j, const char* key) {
  Vector out;
  if (!j.contains(key)) return out;
  const json& v = j[key];
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ParameterError(std::string("'") + key + "' must be a number or array");
  for (const auto& e : v) {
    if (!e.is_number()) throw ParameterError(std::string("'") + key + "' entries must be numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

OptimizerSpec get_optimizer(const json& j, OptimizerSpec fallback) {
  const std::string name =
      get_string(j, "optimizer", fallback.kind == OptimizerSpec::Kind::kAdam ? "adam" : "sgd");
  const double lr = get_real(j, "lr", fallback.lr);
  if (!(lr > 0.0)) throw ParameterError("'lr' must be positive");
  if (name == "adam") return OptimizerSpec::adam(lr);
  if (name == "sgd") return OptimizerSpec::sgd(lr);
  throw ParameterError("'optimizer' must be 'adam' or 'sgd', got '" + name + "'");
}

std::string mode_name(Mode m) { return m == Mode::kLorpman ? "lorpman" : "pamal"; }

Mode parse_mode(const std::string& s) {
  if (s == "lorpman") return Mode::kLorpman;
  if (s == "pamal") return Mode::kPamal;
  throw ParameterError("'mode' must be 'lorpman' or 'pamal', got '" + s + "'");
}

std::string hinge_name(HingeOrientation h) {
  return h == HingeOrientation::kPenalizeWrongOrdering ? "penalize_wrong_ordering" : "verbatim";
}

HingeOrientation parse_hinge(const std::string& s) {
  if (s == "penalize_wrong_ordering") return HingeOrientation::kPenalizeWrongOrdering;
  if (s == "verbatim") return HingeOrientation::kVerbatimSign;
  throw ParameterError("'hinge' must be 'penalize_wrong_ordering' or 'verbatim', got '" + s + "'");
}

json optimizer_json(const OptimizerSpec& o) {
  return {{"optimizer", o.kind == OptimizerSpec::Kind::kAdam ? "adam" : "sgd"}, {"lr", o.lr}};
}

SynthExperimentConfig synth_from(const json& j) {
  SynthExperimentConfig c;
  const std::uint64_t seed = get_seed(j, 0);
  c.data.seed = seed;
  c.data.tasks = get_count(j, "m", c.data.tasks);
  c.data.input_dim = get_count(j, "u", c.data.input_dim);
  c.data.teacher_width = get_count(j, "teacher_width", c.data.teacher_width);
  c.data.conflict = get_real(j, "conflict", c.data.conflict);
  c.data.rows = get_count(j, "rows", c.data.rows);
  c.data.noise = get_real(j, "noise", c.data.noise);
  const std::string task = get_string(j, "task", "regression");
  if (task == "regression") {
    c.data.kind = TaskKind::kRegression;
  } else if (task == "classification") {
    c.data.kind = TaskKind::kClassification;
  } else {
    throw ParameterError("'task' must be 'regression' or 'classification', got '" + task + "'");
  }
  c.data.classes = get_count(j, "classes", c.data.classes);
  c.data.train_fraction = get_real(j, "train_fraction", c.data.train_fraction);
  c.data.validate();

  if (j.contains("hidden")) {
    c.hidden.clear();
    for (double w : get_reals(j, "hidden")) {
      if (!(w >= 1.0) || std::floor(w) != w) throw ParameterError("'hidden' widths must be positive integers");
      c.hidden.push_back(static_cast<std::size_t>(w));
    }
    if (c.hidden.empty()) throw ParameterError("'hidden' needs at least one width");
  }

  TrainConfig& t = c.train;
  t.seed = seed;
  t.epochs = get_count(j, "epochs", 20);
  t.freeze_epoch = get_count(j, "freeze_epoch", t.epochs);
  t.window_b = get_count(j, "window_b", t.window_b);
  t.batch_q = get_count(j, "batch_q", t.batch_q);
  t.dirichlet_p = get_reals(j, "dirichlet_p");
  if (t.dirichlet_p.size() == 1) t.dirichlet_p.assign(c.data.tasks, t.dirichlet_p.front());
  t.lambda_p = get_real(j, "lambda_p", t.lambda_p);
  t.lambda_o = get_real(j, "lambda_o", t.lambda_o);
  t.scale_s = get_real(j, "scale_s", t.scale_s);
  t.rank_r = get_count(j, "rank", t.rank_r);
  t.mode = parse_mode(get_string(j, "mode", "lorpman"));
  t.optimizer = get_optimizer(j, t.optimizer);
  t.hinge = parse_hinge(get_string(j, "hinge", hinge_name(t.hinge)));
  t.freeze_heads = get_bool(j, "freeze_heads", t.freeze_heads);
  t.validate_every = get_count(j, "validate_every", t.validate_every);
  t.hv.front_size = get_count(j, "front_size", t.hv.front_size);
  t.hv.mc_samples = get_count(j, "mc_samples", t.hv.mc_samples);
  t.hv.ref_offset = get_reals(j, "ref_offset");
  t.orth.stochastic_threshold = get_count(j, "orth_threshold", t.orth.stochastic_threshold);
  t.orth.subset_size = get_count(j, "orth_subset", t.orth.subset_size);
  t.orth.lambda_o = t.lambda_o;
  if (t.rank_r < 1) throw ParameterError("'rank' must be at least 1");
  if (!(t.scale_s > 0.0)) throw ParameterError("'scale_s' must be positive");
  if (t.hv.mc_samples == 0) throw ParameterError("'mc_samples' must be positive");
  t.validate(c.data.tasks);
  c.export_dataset = get_bool(j, "export_dataset", false);
  return c;
}

json synth_json(const SynthExperimentConfig& c) {
  const TrainConfig& t = c.train;
  json j = {
      {"seed", t.seed},
      {"m", c.data.tasks},
      {"u", c.data.input_dim},
      {"hidden", c.hidden},
      {"teacher_width", c.data.teacher_width},
      {"conflict", c.data.conflict},
      {"rows", c.data.rows},
      {"noise", c.data.noise},
      {"task", c.data.kind == TaskKind::kRegression ? "regression" : "classification"},
      {"classes", c.data.classes},
      {"train_fraction", c.data.train_fraction},
      {"epochs", t.epochs},
      {"freeze_epoch", t.freeze_epoch},
      {"window_b", t.window_b},
      {"batch_q", t.batch_q},
      {"dirichlet_p", t.concentration(c.data.tasks)},
      {"lambda_p", t.lambda_p},
      {"lambda_o", t.lambda_o},
      {"scale_s", t.scale_s},
      {"rank", t.rank_r},
      {"mode", mode_name(t.mode)},
      {"hinge", hinge_name(t.hinge)},
      {"freeze_heads", t.freeze_heads},
      {"validate_every", t.validate_every},
      {"front_size", t.hv.front_size},
      {"mc_samples", t.hv.mc_samples},
      {"ref_offset", t.hv.ref_offset},
      {"orth_threshold", t.orth.stochastic_threshold},
      {"orth_subset", t.orth.subset_size},
      {"export_dataset", c.export_dataset},
  };
  j.update(optimizer_json(t.optimizer));
  return j;
}

json toy_json(const ToyExperimentConfig& c) {
  json j = {{"seed", c.seed},
            {"steps", c.steps},
            {"window_b", c.window_b},
            {"dirichlet_p", {c.dirichlet_p[0], c.dirichlet_p[1]}},
            {"freeze_epoch", c.freeze_epoch ? json(*c.freeze_epoch) : json(nullptr)},
            {"record_every", c.record_every},
            {"grid_resolution", c.grid_resolution}};
  j.update(optimizer_json(c.optimizer));
  return j;
}

json ablation_json(const AblationConfig& c) {
  json j = synth_json(c.base);
  j["param"] = c.parameter;
  j["values"] = c.values;
  j["repeats"] = c.repeats;
  return j;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json provenance(const char* kind) {
  return {{"kind", kind}, {"version", kVersion}, {"source_hash", kSourceHash}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// Public configuration API
// ---------------------------------------------------------------------------

const std::vector<std::string>& ablation_parameters() {
  static const std::vector<std::string> names = {"rank",     "freeze_epoch", "scale_s",
                                                 "lambda_o", "lambda_p",     "window_b",
                                                 "batch_q",  "lr",           "conflict",
                                                 "dirichlet_p"};
  return names;
}

ToyExperimentConfig toy_config_from_json(std::string_view text) {
  const json j = parse_object(text);
  reject_unknown(j, kToyKeys);
  ToyExperimentConfig c;
  c.seed = get_seed(j, c.seed);
  c.steps = get_count(j, "steps", c.steps);
  c.window_b = get_count(j, "window_b", c.window_b);
  const Vector p = get_reals(j, "dirichlet_p");
  if (p.size() == 1) c.dirichlet_p = {p[0], p[0]};
  else if (p.size() == 2) c.dirichlet_p = {p[0], p[1]};
  else if (!p.empty()) throw ParameterError("'dirichlet_p' for the toy problem needs 1 or 2 entries");
  if (!(c.dirichlet_p[0] > 0.0 && c.dirichlet_p[1] > 0.0)) {
    throw ParameterError("'dirichlet_p' entries must be positive");
  }
  c.optimizer = get_optimizer(j, c.optimizer);
  if (j.contains("freeze_epoch") && !j["freeze_epoch"].is_null()) {
    c.freeze_epoch = get_count(j, "freeze_epoch", 0);
  }
  c.record_every = get_count(j, "record_every", c.record_every);
  c.grid_resolution = get_real(j, "grid_resolution", c.grid_resolution);
  if (c.window_b < 1) throw ParameterError("'window_b' must be at least 1");
  if (c.record_every < 1) throw ParameterError("'record_every' must be at least 1");
  if (!(c.grid_resolution > 0.0)) throw ParameterError("'grid_resolution' must be positive");
  return c;
}

SynthExperimentConfig synth_config_from_json(std::string_view text) {
  const json j = parse_object(text);
  reject_unknown(j, kSynthKeys);
  return synth_from(j);
}

AblationConfig ablation_config_from_json(std::string_view text) {
  json j = parse_object(text);
  std::vector<std::string> allowed = kSynthKeys;
  allowed.insert(allowed.end(), kAblationExtra.begin(), kAblationExtra.end());
  reject_unknown(j, allowed);
  AblationConfig c;
  c.parameter = get_string(j, "param", "");
  const auto& names = ablation_parameters();
  if (std::find(names.begin(), names.end(), c.parameter) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw ParameterError("unknown ablation parameter '" + c.parameter + "' (expected one of " +
                         list + ")");
  }
  c.values = get_reals(j, "values");
  if (c.values.empty()) throw ParameterError("ablation needs at least one value");
  c.repeats = get_count(j, "repeats", c.repeats);
  if (c.repeats < 1) throw ParameterError("'repeats' must be at least 1");
  for (const auto& k : kAblationExtra) j.erase(k);
  c.base = synth_from(j);
  return c;
}

std::string to_json(const ToyExperimentConfig& c) { return toy_json(c).dump(); }
std::string to_json(const SynthExperimentConfig& c) { return synth_json(c).dump(); }
std::string to_json(const AblationConfig& c) { return ablation_json(c).dump(); }

const Artifact* ExperimentOutput::find(std::string_view name) const {
  for (const auto& a : artifacts)
    if (a.name == name) return &a;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Synthetic runs
// ---------------------------------------------------------------------------

ParameterCount model_parameter_count(std::size_t input_dim, std::span<const std::size_t> hidden,
                                     std::size_t tasks, std::size_t rank) {
  ParameterCount total;
  std::size_t fan_in = input_dim;
  for (std::size_t width : hidden) {
    const ParameterCount c = parameter_count(width, fan_in, tasks, rank);
    total.lorpman += c.lorpman;
    total.pamal += c.pamal;
    fan_in = width;
  }
  return total;
}

double model_adapter_correlation(const ManifoldModel& model, bool absolute) {
  if (model.mode != Mode::kLorpman) throw UnsupportedMode("adapter correlation needs a lorpman model");
  double total = 0.0;
  for (const auto& layer : model.lowrank) total += mean_pairwise_correlation(layer.adapters, absolute);
  return total / static_cast<double>(model.lowrank.size());
}

SynthRunResult run_synth(const SynthExperimentConfig& config) {
  const SyntheticProblem problem = make_synthetic(config.data);
  const ModelShape shape{config.data.input_dim, config.hidden, problem.tasks};
  ModelOptions options;
  options.mode = config.train.mode;
  options.rank = config.train.rank_r;
  options.scale = config.train.scale_s;
  SeededRng rng(config.train.seed);
  SynthRunResult out{{}, make_model(shape, options, rng), {}, {}, {}, {}};
  out.record = train(out.model, problem.data, config.train);
  const std::size_t m = config.data.tasks;
  const std::size_t n = config.train.hv.front_size ? config.train.hv.front_size : default_front_size(m);
  out.front = sample_front(out.model, problem.data.validation, n, default_scheme(m, config.train.seed));
  out.parameters = model_parameter_count(config.data.input_dim, config.hidden, m, config.train.rank_r);
  if (out.model.mode == Mode::kLorpman) {
    try {
      out.mean_abs_correlation = model_adapter_correlation(out.model, true);
      out.mean_signed_correlation = model_adapter_correlation(out.model, false);
    } catch (const DegenerateInput&) {
      // Untrained adapters have B = 0, so the products have no direction.
    }
  }
  return out;
}

std::string dataset_csv(const SyntheticProblem& problem) {
  CsvTable table;
  const std::size_t u = problem.spec.input_dim, m = problem.spec.tasks;
  for (std::size_t k = 0; k < u; ++k) table.header.push_back("x_" + std::to_string(k));
  for (std::size_t i = 0; i < m; ++i) table.header.push_back("y_" + std::to_string(i));
  for (const Batch* b : {&problem.data.train, &problem.data.validation}) {
    for (std::size_t r = 0; r < b->rows(); ++r) {
      std::vector<std::string> row;
      for (double v : b->inputs.row(r)) row.push_back(format_real(v));
      for (double v : b->targets.row(r)) row.push_back(format_real(v));
      table.rows.push_back(std::move(row));
    }
  }
  return to_csv(table);
}

namespace {

std::string front_csv(const FrontEvaluation& front) {
  const std::size_t m = front.preferences.empty() ? 0 : front.preferences.front().size();
  CsvTable table;
  for (std::size_t i = 0; i < m; ++i) table.header.push_back("pref_" + std::to_string(i));
  for (std::size_t i = 0; i < m; ++i) table.header.push_back("obj_" + std::to_string(i));
  for (std::size_t r = 0; r < front.preferences.size(); ++r) {
    std::vector<std::string> row;
    for (double v : front.preferences[r].values()) row.push_back(format_real(v));
    for (double v : front.losses.points[r]) row.push_back(format_real(v));
    table.rows.push_back(std::move(row));
  }
  return to_csv(table);
}

std::string front_svg(const FrontEvaluation& front, const std::string& title) {
  SvgPlot plot{title, "obj_0 (validation loss)", "obj_1 (validation loss)", {}};
  SvgSeries s{"front", "#1f77b4", {}, SvgSeries::Style::kMarkers};
  for (const auto& p : front.losses.points) s.points.push_back({p[0], p[1]});
  plot.series.push_back(std::move(s));
  return render_svg(plot);
}

std::string hv_line(const HypervolumePoint& hv) {
  std::string line = "hv " + format_real(hv.value, 12);
  if (hv.stderr_estimate) {
    line += " stderr " + format_real(*hv.stderr_estimate, 12) + " (monte carlo)";
  } else {
    line += " (exact)";
  }
  return line + "\n";
}

}  // namespace

ExperimentOutput run_synth_experiment(const SynthExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const SynthRunResult run = run_synth(config);
  const HypervolumePoint& hv = run.record.final_hv();

  ExperimentOutput out;
  out.artifacts.push_back({"front.csv", front_csv(run.front)});
  out.artifacts.push_back(
      {"front.svg", front_svg(run.front, mode_name(config.train.mode) + " validation front")});
  json artifacts = {{"manifest", "manifest.json"}, {"front_csv", "front.csv"}, {"front_svg", "front.svg"}};
  if (config.export_dataset) {
    out.artifacts.push_back({"dataset.csv", dataset_csv(make_synthetic(config.data))});
    artifacts["dataset_csv"] = "dataset.csv";
  }

  SynthExperimentConfig echo = config;
  echo.train.hv.ref_offset = run.record.config.hv.ref_offset;
  json validation = json::array();
  for (const auto& p : run.record.validation_hv) {
    validation.push_back({{"epoch", p.epoch}, {"value", p.value}, {"stderr", optional_json(p.stderr_estimate)}});
  }
  json manifest = provenance("synth");
  manifest["seed"] = config.train.seed;
  manifest["config"] = synth_json(echo);
  manifest["teacher_nonlinearity"] = "tanh";
  manifest["metrics"] = {
      {"final_hv", hv.value},
      {"final_hv_stderr", optional_json(hv.stderr_estimate)},
      {"hv_method", hv.stderr_estimate ? "monte_carlo" : "exact"},
      {"hv_reference", Vector(config.data.tasks, 0.0)},
      {"mean_abs_adapter_correlation", optional_json(run.mean_abs_correlation)},
      {"mean_signed_adapter_correlation", optional_json(run.mean_signed_correlation)},
      {"parameter_count", {{"lorpman", run.parameters.lorpman}, {"pamal", run.parameters.pamal}}},
      {"iterations", run.record.iterations},
      {"epoch_loss", run.record.epoch_loss},
      {"validation_hv", validation},
  };
  manifest["artifacts"] = artifacts;
  out.manifest = dump(manifest);
  out.artifacts.push_back({"manifest.json", out.manifest});

  std::ostringstream s;
  s << hv_line(hv);
  s << "mode " << mode_name(config.train.mode) << ", parameters lorpman "
    << run.parameters.lorpman << " pamal " << run.parameters.pamal << "\n";
  if (run.mean_abs_correlation) {
    s << "mean adapter correlation " << format_real(*run.mean_abs_correlation, 6) << " (absolute), "
      << format_real(*run.mean_signed_correlation, 6) << " (signed)\n";
  }
  if (!run.record.epoch_loss.empty()) {
    s << "final training loss " << format_real(run.record.epoch_loss.back(), 8) << "\n";
  }
  s << "wall time " << format_real(seconds_since(started), 3) << " s\n";
  out.summary = s.str();
  return out;
}

// ---------------------------------------------------------------------------
// Toy run
// ---------------------------------------------------------------------------

ExperimentOutput run_toy_experiment(const ToyExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  ToyTrainConfig tc;
  tc.iterations = config.steps;
  tc.window_b = config.window_b;
  tc.dirichlet_p = config.dirichlet_p;
  tc.optimizer = config.optimizer;
  if (config.freeze_epoch) tc.freeze_iteration = *config.freeze_epoch * 10;
  tc.record_every = config.record_every;
  tc.seed = config.seed;
  const ToyRun run = train_toy(tc);
  const FrontSample oracle = toy_grid_front(config.grid_resolution);

  static const char* kLabels[] = {"1_0", "0_1", "0.5_0.5"};
  CsvTable traj{{"step", "alpha_label", "theta1", "theta2", "f1", "f2"}, {}};
  for (const auto& p : run.trajectory) {
    traj.rows.push_back({std::to_string(p.step), kLabels[p.preference], format_real(p.theta[0]),
                         format_real(p.theta[1]), format_real(p.values.f1), format_real(p.values.f2)});
  }
  CsvTable front{{"obj_0", "obj_1"}, {}};
  for (const auto& p : oracle.points) front.rows.push_back({format_real(p[0]), format_real(p[1])});

  SvgPlot plot{"toy problem: trajectories over the grid front", "f1", "f2", {}};
  SvgSeries front_series{"grid front", "#999999", {}, SvgSeries::Style::kMarkers};
  for (const auto& p : oracle.points) front_series.points.push_back({p[0], p[1]});
  plot.series.push_back(std::move(front_series));
  static const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c"};
  SvgSeries finals{"final solutions", "black", {}, SvgSeries::Style::kSquares};
  json solutions = json::array();
  std::ostringstream s;
  for (std::size_t k = 0; k < run.preferences.size(); ++k) {
    SvgSeries path{std::string("alpha ") + kLabels[k], kColors[k], {}, SvgSeries::Style::kPath};
    for (const auto& p : run.trajectory)
      if (p.preference == k) path.points.push_back({p.values.f1, p.values.f2});
    plot.series.push_back(std::move(path));
    const Vec2 theta = run.final_state.at(run.preferences[k]);
    const ToyValues f = toy_objectives(theta);
    finals.points.push_back({f.f1, f.f2});
    const double point[2] = {f.f1, f.f2};
    const double distance = distance_to_front_2d(oracle, point);
    solutions.push_back({{"alpha_label", kLabels[k]},
                         {"alpha", Vector(run.preferences[k].values().begin(), run.preferences[k].values().end())},
                         {"theta", {theta[0], theta[1]}},
                         {"objectives", {f.f1, f.f2}},
                         {"distance_to_front", distance}});
    s << "alpha " << kLabels[k] << ": f = (" << format_real(f.f1, 8) << ", " << format_real(f.f2, 8)
      << "), distance to front " << format_real(distance, 4) << "\n";
  }
  plot.series.push_back(std::move(finals));

  ExperimentOutput out;
  out.artifacts.push_back({"trajectory.csv", to_csv(traj)});
  out.artifacts.push_back({"front.csv", to_csv(front)});
  out.artifacts.push_back({"toy.svg", render_svg(plot)});
  json manifest = provenance("toy");
  manifest["seed"] = config.seed;
  manifest["config"] = toy_json(config);
  manifest["metrics"] = {{"front_points", oracle.points.size()}, {"solutions", solutions}};
  manifest["artifacts"] = {{"manifest", "manifest.json"},
                           {"trajectory_csv", "trajectory.csv"},
                           {"front_csv", "front.csv"},
                           {"svg", "toy.svg"}};
  out.manifest = dump(manifest);
  out.artifacts.push_back({"manifest.json", out.manifest});
  s << "wall time " << format_real(seconds_since(started), 3) << " s\n";
  out.summary = s.str();
  return out;
}

// ---------------------------------------------------------------------------
// Ablation sweep
// ---------------------------------------------------------------------------

namespace {

std::size_t as_count(const std::string& name, double v, std::size_t minimum) {
  if (!(v >= static_cast<double>(minimum)) || std::floor(v) != v) {
    throw ParameterError("ablation value " + format_real(v, 6) + " for '" + name +
                         "' must be an integer >= " + std::to_string(minimum));
  }
  return static_cast<std::size_t>(v);
}

SynthExperimentConfig apply(const AblationConfig& sweep, double v, std::size_t repeat) {
  SynthExperimentConfig c = sweep.base;
  const std::string& p = sweep.parameter;
  TrainConfig& t = c.train;
  if (p == "rank") t.rank_r = as_count(p, v, 1);
  else if (p == "freeze_epoch") t.freeze_epoch = as_count(p, v, 0);
  else if (p == "scale_s") t.scale_s = v;
  else if (p == "lambda_o") t.lambda_o = t.orth.lambda_o = v;
  else if (p == "lambda_p") t.lambda_p = v;
  else if (p == "window_b") t.window_b = as_count(p, v, 1);
  else if (p == "batch_q") t.batch_q = as_count(p, v, 1);
  else if (p == "lr") t.optimizer.lr = v;
  else if (p == "conflict") c.data.conflict = v;
  else if (p == "dirichlet_p") t.dirichlet_p.assign(c.data.tasks, v);
  else throw ParameterError("unknown ablation parameter '" + p + "'");
  t.seed = c.data.seed = sweep.base.train.seed + repeat;
  if (!(t.scale_s > 0.0)) throw ParameterError("'scale_s' must be positive");
  if (!(t.optimizer.lr > 0.0)) throw ParameterError("'lr' must be positive");
  c.data.validate();
  t.validate(c.data.tasks);
  return c;
}

}  // namespace

ExperimentOutput run_ablation(const AblationConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  // Validate every cell before spending time on any run.
  for (double v : config.values) apply(config, v, 0);

  CsvTable table{{"value", "mean_hv", "std_hv", "mean_correlation", "parameters_lorpman",
                  "parameters_pamal", "runs"},
                 {}};
  json cells = json::array();
  std::ostringstream s;
  for (double v : config.values) {
    Vector hvs;
    Vector corr;
    json runs = json::array();
    ParameterCount params;
    for (std::size_t r = 0; r < config.repeats; ++r) {
      const SynthExperimentConfig c = apply(config, v, r);
      const SynthRunResult run = run_synth(c);
      hvs.push_back(run.record.final_hv().value);
      if (run.mean_abs_correlation) corr.push_back(*run.mean_abs_correlation);
      params = run.parameters;
      runs.push_back({{"seed", c.train.seed},
                      {"final_hv", run.record.final_hv().value},
                      {"final_hv_stderr", optional_json(run.record.final_hv().stderr_estimate)},
                      {"mean_abs_adapter_correlation", optional_json(run.mean_abs_correlation)}});
    }
    const double n = static_cast<double>(hvs.size());
    double mean = 0.0;
    for (double h : hvs) mean += h;
    mean /= n;
    double var = 0.0;
    for (double h : hvs) var += (h - mean) * (h - mean);
    const double sd = hvs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    double mc = std::numeric_limits<double>::quiet_NaN();
    if (!corr.empty()) {
      mc = 0.0;
      for (double x : corr) mc += x;
      mc /= static_cast<double>(corr.size());
    }
    table.rows.push_back({format_real(v), format_real(mean), format_real(sd), format_real(mc),
                          std::to_string(params.lorpman), std::to_string(params.pamal),
                          std::to_string(hvs.size())});
    cells.push_back({{"value", v},
                     {"mean_hv", mean},
                     {"std_hv", sd},
                     {"mean_correlation", corr.empty() ? json(nullptr) : json(mc)},
                     {"parameter_count", {{"lorpman", params.lorpman}, {"pamal", params.pamal}}},
                     {"runs", runs}});
    s << config.parameter << " = " << format_real(v, 6) << ": mean hv " << format_real(mean, 8)
      << " (std " << format_real(sd, 4) << ")";
    if (!corr.empty()) s << ", mean correlation " << format_real(mc, 4);
    s << "\n";
  }

  ExperimentOutput out;
  out.artifacts.push_back({"ablation.csv", to_csv(table)});
  json manifest = provenance("ablate");
  manifest["seed"] = config.base.train.seed;
  manifest["config"] = ablation_json(config);
  manifest["teacher_nonlinearity"] = "tanh";
  manifest["metrics"] = {{"cells", cells}};
  manifest["artifacts"] = {{"manifest", "manifest.json"}, {"table_csv", "ablation.csv"}};
  out.manifest = dump(manifest);
  out.artifacts.push_back({"manifest.json", out.manifest});
  s << "wall time " << format_real(seconds_since(started), 3) << " s\n";
  out.summary = s.str();
  return out;
}

void write_artifacts(const ExperimentOutput& output, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  for (const auto& a : output.artifacts) write_file(out_dir / a.name, a.contents);
}

}  // namespace lorpman
