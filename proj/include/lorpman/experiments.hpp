// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end experiments behind the command-line tool. Each run produces its
// artifacts in memory (file name plus contents) and a short stdout summary;
// write_artifacts() puts the files on disk.
//
// Configuration travels as JSON objects with a flat key space (see
// README.md). Unknown keys are rejected so a typo cannot silently fall back
// to a default.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lorpman/lowrank.hpp"
#include "lorpman/problems.hpp"
#include "lorpman/trainer.hpp"

namespace lorpman {

struct ToyExperimentConfig {
  std::size_t steps = 40000;
  std::size_t window_b = 4;
  Vec2 dirichlet_p{1.0, 1.0};
  OptimizerSpec optimizer = OptimizerSpec::adam(1e-3);
  // In toy epochs of 10 iterations; nullopt never freezes.
  std::optional<std::size_t> freeze_epoch;
  std::size_t record_every = 100;
  double grid_resolution = 0.02;
  std::uint64_t seed = 0;
};

struct SynthExperimentConfig {
  SyntheticSpec data;
  std::vector<std::size_t> hidden{32, 32};
  TrainConfig train;
  bool export_dataset = false;
};

struct AblationConfig {
  SynthExperimentConfig base;
  std::string parameter;
  std::vector<double> values;
  std::size_t repeats = 3;
};

/// Parameters an ablation may sweep.
const std::vector<std::string>& ablation_parameters();

ToyExperimentConfig toy_config_from_json(std::string_view json);
SynthExperimentConfig synth_config_from_json(std::string_view json);
AblationConfig ablation_config_from_json(std::string_view json);

std::string to_json(const ToyExperimentConfig& config);
std::string to_json(const SynthExperimentConfig& config);
std::string to_json(const AblationConfig& config);

struct Artifact {
  std::string name;  // relative to the output directory
  std::string contents;
};

struct ExperimentOutput {
  std::vector<Artifact> artifacts;
  std::string summary;  // lines for standard output; may include wall time
  std::string manifest;

  const Artifact* find(std::string_view name) const;
};

struct SynthRunResult {
  RunRecord record;
  ManifoldModel model;
  FrontEvaluation front;
  ParameterCount parameters;                  // bottom layers, both modes
  std::optional<double> mean_abs_correlation;  // lorpman mode only
  std::optional<double> mean_signed_correlation;
};

/// Builds the problem and model from `config` and trains. No I/O.
SynthRunResult run_synth(const SynthExperimentConfig& config);

/// Bottom-layer weight counts summed over layers.
ParameterCount model_parameter_count(std::size_t input_dim, std::span<const std::size_t> hidden,
                                     std::size_t tasks, std::size_t rank);

/// Mean over bottom layers of the mean pairwise adapter correlation.
double model_adapter_correlation(const ManifoldModel& model, bool absolute);

/// x_0..x_{u-1}, y_0..y_{m-1}; training rows first, then validation rows.
std::string dataset_csv(const SyntheticProblem& problem);

ExperimentOutput run_toy_experiment(const ToyExperimentConfig& config);
ExperimentOutput run_synth_experiment(const SynthExperimentConfig& config);
ExperimentOutput run_ablation(const AblationConfig& config);

void write_artifacts(const ExperimentOutput& output, const std::filesystem::path& out_dir);

}  // namespace lorpman
