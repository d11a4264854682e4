// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0
//
// lorpman command-line tool. Talks to the library only through lorpman.h.
//
// Exit codes: 0 success, 1 runtime failure (numeric, I/O, failed check),
// 2 usage error (bad flag, bad configuration, malformed input).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lorpman/lorpman.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Kind { kCount, kReal, kString, kList, kFlag };

struct FlagSpec {
  const char* flag;
  const char* key;
  Kind kind;
  const char* help;
};

// Flags shared by synth and ablate.
const std::vector<FlagSpec> kSynthFlags = {
    {"--seed", "seed", Kind::kCount, "random seed"},
    {"--epochs", "epochs", Kind::kCount, "training epochs"},
    {"--freeze-epoch", "freeze_epoch", Kind::kCount, "epoch from which main weights stop updating"},
    {"--window-b", "window_b", Kind::kCount, "preferences sampled per iteration"},
    {"--batch-q", "batch_q", Kind::kCount, "minibatch size"},
    {"--dirichlet-p", "dirichlet_p", Kind::kList, "Dirichlet concentration (one value or one per task)"},
    {"--lambda-p", "lambda_p", Kind::kReal, "multi-forward regularisation weight"},
    {"--lambda-o", "lambda_o", Kind::kReal, "orthogonal regularisation weight"},
    {"--scale-s", "scale_s", Kind::kReal, "adapter scaling factor"},
    {"--rank", "rank", Kind::kCount, "adapter rank"},
    {"--mode", "mode", Kind::kString, "lorpman or pamal"},
    {"--optimizer", "optimizer", Kind::kString, "adam or sgd"},
    {"--lr", "lr", Kind::kReal, "learning rate"},
    {"--m", "m", Kind::kCount, "number of tasks"},
    {"--u", "u", Kind::kCount, "input dimension"},
    {"--hidden", "hidden", Kind::kList, "bottom layer widths, comma separated"},
    {"--teacher-width", "teacher_width", Kind::kCount, "hidden width of the data teacher"},
    {"--conflict", "conflict", Kind::kReal, "task conflict gamma in [0, 1]"},
    {"--rows", "rows", Kind::kCount, "dataset rows"},
    {"--noise", "noise", Kind::kReal, "target noise level"},
    {"--task", "task", Kind::kString, "regression or classification"},
    {"--classes", "classes", Kind::kCount, "classes per task (classification)"},
    {"--hinge", "hinge", Kind::kString, "penalize_wrong_ordering or verbatim"},
    {"--validate-every", "validate_every", Kind::kCount, "epochs between validation HV (0: final only)"},
    {"--front-size", "front_size", Kind::kCount, "preferences on the evaluated front (0: default)"},
    {"--mc-samples", "mc_samples", Kind::kCount, "Monte Carlo samples for HV with more than 3 tasks"},
    {"--ref-offset", "ref_offset", Kind::kList, "per-task loss offsets defining the HV reference"},
    {"--freeze-heads", "freeze_heads", Kind::kFlag, "keep task heads at their initial values"},
    {"--export-dataset", "export_dataset", Kind::kFlag, "also write dataset.csv"},
};

const std::vector<FlagSpec> kToyFlags = {
    {"--seed", "seed", Kind::kCount, "random seed"},
    {"--steps", "steps", Kind::kCount, "training iterations"},
    {"--window-b", "window_b", Kind::kCount, "preferences sampled per iteration"},
    {"--dirichlet-p", "dirichlet_p", Kind::kList, "Dirichlet concentration"},
    {"--optimizer", "optimizer", Kind::kString, "adam or sgd"},
    {"--lr", "lr", Kind::kReal, "learning rate"},
    {"--freeze-epoch", "freeze_epoch", Kind::kCount, "freeze point in epochs of 10 iterations"},
    {"--record-every", "record_every", Kind::kCount, "iterations between trajectory records"},
    {"--grid-resolution", "grid_resolution", Kind::kReal, "resolution of the oracle front grid"},
};

const std::vector<FlagSpec> kAblateExtra = {
    {"--param", "param", Kind::kString, "parameter to sweep"},
    {"--values", "values", Kind::kList, "values to sweep, comma separated"},
    {"--repeats", "repeats", Kind::kCount, "seeds per value"},
};

// CLI11 keeps references into `values`, so it is sized once and never grows.
struct BoundFlags {
  std::vector<FlagSpec> specs;
  std::vector<std::string> values;
  std::vector<CLI::Option*> options;
};

void bind(CLI::App* app, std::vector<FlagSpec> specs, BoundFlags& bound) {
  bound.specs = std::move(specs);
  bound.values.assign(bound.specs.size(), std::string());
  bound.options.assign(bound.specs.size(), nullptr);
  for (std::size_t i = 0; i < bound.specs.size(); ++i) {
    const FlagSpec& s = bound.specs[i];
    bound.options[i] = s.kind == Kind::kFlag ? app->add_flag(s.flag, s.help)
                                             : app->add_option(s.flag, bound.values[i], s.help);
  }
}

double to_real(const std::string& flag, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) throw UsageError(flag + ": not a number: '" + text + "'");
  return v;
}

std::uint64_t to_count(const std::string& flag, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw UsageError(flag + ": expected a non-negative integer, got '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw UsageError(flag + ": integer out of range: '" + text + "'");
  }
}

json to_list(const std::string& flag, const std::string& text) {
  json out = json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_real(flag, item));
  if (out.empty()) throw UsageError(flag + ": expected a comma-separated list");
  return out;
}

// Flags override values from --config.
json merge(const BoundFlags& bound, json config) {
  for (std::size_t i = 0; i < bound.specs.size(); ++i) {
    const FlagSpec& s = bound.specs[i];
    if (bound.options[i]->count() == 0) continue;
    const std::string& v = bound.values[i];
    switch (s.kind) {
      case Kind::kCount: config[s.key] = to_count(s.flag, v); break;
      case Kind::kReal: config[s.key] = to_real(s.flag, v); break;
      case Kind::kString: config[s.key] = v; break;
      case Kind::kList: config[s.key] = to_list(s.flag, v); break;
      case Kind::kFlag: config[s.key] = true; break;
    }
  }
  return config;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError(path + ": configuration must be a JSON object");
  if (j.contains("kind") && j.contains("config") && j["config"].is_object()) return j["config"];
  return j;
}

struct Failure {
  int code;
  std::string message;
};

Failure failure(lpm_status status) {
  const bool usage = status == LPM_ERR_INVALID_ARGUMENT || status == LPM_ERR_PARSE ||
                     status == LPM_ERR_CONTRACT || status == LPM_ERR_UNSUPPORTED;
  return {usage ? kExitUsage : kExitFailure,
          std::string(lpm_status_name(status)) + ": " + lpm_last_error()};
}

void check(lpm_status status) {
  if (status != LPM_OK) throw failure(status);
}

struct StringDeleter {
  void operator()(char* s) const { lpm_string_free(s); }
};
using CString = std::unique_ptr<char, StringDeleter>;

struct ExperimentDeleter {
  void operator()(lpm_experiment* e) const { lpm_experiment_destroy(e); }
};
struct FrontDeleter {
  void operator()(lpm_front* f) const { lpm_front_destroy(f); }
};

int run_experiment(lpm_experiment_kind kind, const json& config, const std::string& out_dir) {
  lpm_experiment* raw = nullptr;
  check(lpm_experiment_create(kind, config.dump().c_str(), &raw));
  std::unique_ptr<lpm_experiment, ExperimentDeleter> exp(raw);
  check(lpm_experiment_run(exp.get()));
  check(lpm_experiment_write(exp.get(), out_dir.c_str()));
  char* summary = nullptr;
  check(lpm_experiment_summary(exp.get(), &summary));
  CString owned(summary);
  std::cout << summary << "artifacts written to " << out_dir << "\n";
  return kExitOk;
}

std::vector<double> parse_vector(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  for (const auto& v : to_list(flag, text)) out.push_back(v.get<double>());
  return out;
}

std::string format12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int run_hv(const std::string& input, const std::string& ref_text, const std::string& orientation,
           const std::string& method, std::uint64_t samples, std::uint64_t seed) {
  lpm_orientation o;
  if (orientation == "maximize") {
    o = LPM_MAXIMIZE;
  } else if (orientation == "minimize") {
    o = LPM_MINIMIZE;
  } else {
    throw UsageError("--orientation must be maximize or minimize");
  }
  lpm_hv_method m{0, samples, seed};
  if (method == "mc" || method == "monte-carlo") {
    m.monte_carlo = 1;
  } else if (method != "exact") {
    throw UsageError("--method must be exact or mc");
  }
  const std::string text = read_text(input);
  lpm_front* raw = nullptr;
  check(lpm_front_from_csv(text.data(), text.size(), o, &raw));
  std::unique_ptr<lpm_front, FrontDeleter> front(raw);

  std::vector<double> ref;
  if (!ref_text.empty()) ref = parse_vector("--ref", ref_text);
  if (ref.empty()) {
    if (lpm_front_size(front.get()) == 0) {
      std::cout << "0\n";
      return kExitOk;
    }
    ref.assign(lpm_front_dim(front.get()), 0.0);
  }
  double value = 0.0, se = 0.0;
  check(lpm_front_hypervolume(front.get(), ref.data(), ref.size(), &m, &value, &se));
  std::cout << format12(value);
  if (m.monte_carlo) std::cout << " stderr " << format12(se);
  std::cout << "\n";
  return kExitOk;
}

int run_checks(std::uint64_t seed) {
  char* report = nullptr;
  int ok = 0;
  check(lpm_run_checks(seed, &report, &ok));
  CString owned(report);
  std::cout << report;
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lorpman: Pareto manifold learning with low-rank adapters"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lpm_version()) + " (" + lpm_source_hash() + ")");

  std::string config_path, out_dir;

  auto* toy = app.add_subcommand("toy", "train the two-objective toy manifold");
  BoundFlags toy_flags;
  bind(toy, kToyFlags, toy_flags);
  toy->add_option("--config", config_path, "JSON configuration file (flags override it)");
  toy->add_option("--out-dir", out_dir, "output directory (default lorpman-toy)");

  auto* synth = app.add_subcommand("synth", "train on a synthetic multi-task problem");
  BoundFlags synth_flags;
  bind(synth, kSynthFlags, synth_flags);
  synth->add_option("--config", config_path, "JSON configuration file (flags override it)");
  synth->add_option("--out-dir", out_dir, "output directory (default lorpman-synth)");

  auto* ablate = app.add_subcommand("ablate", "sweep one parameter across seeds");
  BoundFlags ablate_flags;
  std::vector<FlagSpec> ablate_specs = kSynthFlags;
  ablate_specs.insert(ablate_specs.end(), kAblateExtra.begin(), kAblateExtra.end());
  bind(ablate, ablate_specs, ablate_flags);
  ablate->add_option("--config", config_path, "JSON configuration file (flags override it)");
  ablate->add_option("--out-dir", out_dir, "output directory (default lorpman-ablate)");

  auto* hv = app.add_subcommand("hv", "hypervolume of the points in a CSV file");
  std::string hv_input, hv_ref, hv_orientation = "maximize", hv_method = "exact";
  std::uint64_t hv_samples = 1000000, hv_seed = 0;
  hv->add_option("input", hv_input, "CSV file of objective points")->required();
  hv->add_option("--ref", hv_ref, "reference point, comma separated (default: origin)");
  hv->add_option("--orientation", hv_orientation, "maximize or minimize");
  hv->add_option("--method", hv_method, "exact or mc");
  hv->add_option("--samples", hv_samples, "Monte Carlo samples");
  hv->add_option("--seed", hv_seed, "Monte Carlo seed");

  auto* checks = app.add_subcommand("checks", "run the construction checks");
  std::uint64_t checks_seed = 0;
  checks->add_option("--seed", checks_seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (toy->parsed()) {
      return run_experiment(LPM_EXPERIMENT_TOY, merge(toy_flags, load_config(config_path)),
                            out_dir.empty() ? "lorpman-toy" : out_dir);
    }
    if (synth->parsed()) {
      return run_experiment(LPM_EXPERIMENT_SYNTH, merge(synth_flags, load_config(config_path)),
                            out_dir.empty() ? "lorpman-synth" : out_dir);
    }
    if (ablate->parsed()) {
      return run_experiment(LPM_EXPERIMENT_ABLATE, merge(ablate_flags, load_config(config_path)),
                            out_dir.empty() ? "lorpman-ablate" : out_dir);
    }
    if (hv->parsed()) return run_hv(hv_input, hv_ref, hv_orientation, hv_method, hv_samples, hv_seed);
    if (checks->parsed()) return run_checks(checks_seed);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
