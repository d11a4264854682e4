// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>

#include "lorpman/errors.hpp"
#include "lorpman/experiments.hpp"
#include "lorpman/io.hpp"

namespace lorpman {
namespace {

using nlohmann::json;

const char* kSmallSynth = R"({"m": 3, "u": 6, "hidden": [8], "rows": 200, "epochs": 3, "rank": 2,
                              "lr": 0.01, "validate_every": 0})";

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

TEST(Config, ToyDefaultsAndRoundTrip) {
  const ToyExperimentConfig c = toy_config_from_json("{}");
  EXPECT_EQ(c.steps, 40000u);
  EXPECT_EQ(c.window_b, 4u);
  EXPECT_EQ(c.optimizer.lr, 1e-3);
  EXPECT_FALSE(c.freeze_epoch.has_value());
  const ToyExperimentConfig d = toy_config_from_json(R"({"steps": 10, "seed": 3, "freeze_epoch": 1})");
  EXPECT_EQ(d.steps, 10u);
  EXPECT_EQ(d.seed, 3u);
  EXPECT_EQ(d.freeze_epoch, 1u);
  EXPECT_EQ(to_json(toy_config_from_json(to_json(d))), to_json(d));
}

TEST(Config, SynthKeysAndRoundTrip) {
  const SynthExperimentConfig c = synth_config_from_json(
      R"({"m": 4, "u": 5, "hidden": [7, 3], "conflict": 0.25, "epochs": 6, "freeze_epoch": 2,
          "mode": "pamal", "optimizer": "sgd", "lr": 0.5, "hinge": "verbatim", "ref_offset": [1, 2, 3, 4]})");
  EXPECT_EQ(c.data.tasks, 4u);
  EXPECT_EQ(c.data.input_dim, 5u);
  EXPECT_EQ(c.hidden, (std::vector<std::size_t>{7, 3}));
  EXPECT_EQ(c.data.conflict, 0.25);
  EXPECT_EQ(c.train.freeze_epoch, 2u);
  EXPECT_EQ(c.train.mode, Mode::kPamal);
  EXPECT_EQ(c.train.optimizer.kind, OptimizerSpec::Kind::kSgd);
  EXPECT_EQ(c.train.hinge, HingeOrientation::kVerbatimSign);
  EXPECT_EQ(c.train.hv.ref_offset, (Vector{1, 2, 3, 4}));
  EXPECT_EQ(to_json(synth_config_from_json(to_json(c))), to_json(c));
  // freeze_epoch follows epochs unless given.
  EXPECT_EQ(synth_config_from_json(R"({"epochs": 7})").train.freeze_epoch, 7u);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(toy_config_from_json("{not json"), ParseError);
  EXPECT_THROW(toy_config_from_json("[1]"), ParameterError);
  EXPECT_THROW(toy_config_from_json(R"({"stepz": 3})"), ParameterError);
  EXPECT_THROW(synth_config_from_json(R"({"m": -1})"), ParameterError);
  EXPECT_THROW(synth_config_from_json(R"({"lr": 0})"), ParameterError);
  EXPECT_THROW(synth_config_from_json(R"({"mode": "lora"})"), ParameterError);
  EXPECT_THROW(synth_config_from_json(R"({"epochs": 2, "freeze_epoch": 3})"), ParameterError);
  EXPECT_THROW(synth_config_from_json(R"({"hidden": []})"), ParameterError);
  EXPECT_THROW(ablation_config_from_json(R"({"param": "depth", "values": [1]})"), ParameterError);
  EXPECT_THROW(ablation_config_from_json(R"({"param": "rank", "values": []})"), ParameterError);
}

TEST(Config, AblationParameterList) {
  const auto& names = ablation_parameters();
  for (const char* n : {"rank", "freeze_epoch", "scale_s", "lambda_o", "lambda_p", "window_b", "lr"})
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
}

TEST(Toy, ZeroStepsGivesInitialPointsOnly) {
  ToyExperimentConfig c;
  c.steps = 0;
  c.grid_resolution = 0.2;
  const ExperimentOutput out = run_toy_experiment(c);
  const Artifact* traj = out.find("trajectory.csv");
  ASSERT_NE(traj, nullptr);
  const NumericTable t = to_numeric([&] {
    CsvTable raw = parse_csv(traj->contents);
    // alpha_label is text; drop it before numeric conversion.
    for (auto& row : raw.rows) row.erase(row.begin() + 1);
    raw.header.erase(raw.header.begin() + 1);
    return raw;
  }());
  ASSERT_EQ(t.rows.size(), 3u);
  for (const Vector& row : t.rows) EXPECT_EQ(row[0], 0.0);
  EXPECT_NE(out.find("front.csv"), nullptr);
  EXPECT_NE(out.find("toy.svg"), nullptr);
  EXPECT_NE(out.find("manifest.json"), nullptr);
}

TEST(Toy, LabelsAndDeterminism) {
  ToyExperimentConfig c;
  c.steps = 300;
  c.grid_resolution = 0.2;
  c.seed = 7;
  const ExperimentOutput a = run_toy_experiment(c), b = run_toy_experiment(c);
  ASSERT_EQ(a.artifacts.size(), b.artifacts.size());
  for (std::size_t i = 0; i < a.artifacts.size(); ++i) EXPECT_EQ(a.artifacts[i].contents, b.artifacts[i].contents);
  const std::string& traj = a.find("trajectory.csv")->contents;
  for (const char* label : {",1_0,", ",0_1,", ",0.5_0.5,"}) EXPECT_NE(traj.find(label), std::string::npos);
}

TEST(Synth, ArtifactsAreConsistent) {
  SynthExperimentConfig c = synth_config_from_json(kSmallSynth);
  c.export_dataset = true;
  const ExperimentOutput out = run_synth_experiment(c);
  const Artifact* front = out.find("front.csv");
  const Artifact* svg = out.find("front.svg");
  const Artifact* data = out.find("dataset.csv");
  ASSERT_TRUE(front && svg && data);
  const NumericTable f = to_numeric(parse_csv(front->contents));
  EXPECT_EQ(f.rows.size(), 66u);
  EXPECT_EQ(f.header, (std::vector<std::string>{"pref_0", "pref_1", "pref_2", "obj_0", "obj_1", "obj_2"}));
  EXPECT_EQ(to_csv(from_numeric(f)), front->contents);
  EXPECT_EQ(count(svg->contents, "<circle"), 66u);
  const CsvTable d = parse_csv(data->contents);
  EXPECT_EQ(d.header.front(), "x_0");
  EXPECT_EQ(d.header.back(), "y_2");
  EXPECT_EQ(d.rows.size(), 200u);

  const json manifest = json::parse(out.manifest);
  EXPECT_EQ(manifest["kind"], "synth");
  EXPECT_EQ(manifest["teacher_nonlinearity"], "tanh");
  EXPECT_TRUE(manifest["metrics"]["final_hv"].is_number());
  EXPECT_EQ(manifest["metrics"]["hv_method"], "exact");
  EXPECT_EQ(manifest["metrics"]["parameter_count"]["lorpman"],
            model_parameter_count(6, std::vector<std::size_t>{8}, 3, 2).lorpman);
  EXPECT_EQ(manifest.dump().find("elapsed"), std::string::npos);
  // The manifest's config reproduces the run.
  const ExperimentOutput again = run_synth_experiment(synth_config_from_json(manifest["config"].dump()));
  EXPECT_EQ(again.find("front.csv")->contents, front->contents);
}

TEST(Synth, ZeroEpochsStillReportsHypervolume) {
  SynthExperimentConfig c = synth_config_from_json(kSmallSynth);
  c.train.epochs = 0;
  c.train.freeze_epoch = 0;
  const SynthRunResult r = run_synth(c);
  ASSERT_EQ(r.record.validation_hv.size(), 1u);
  EXPECT_TRUE(std::isfinite(r.record.final_hv().value));
  EXPECT_FALSE(r.mean_abs_correlation.has_value());
}

TEST(Synth, ParameterCountsFollowFormula) {
  const std::vector<std::size_t> hidden{32, 32};
  const ParameterCount c = model_parameter_count(8, hidden, 8, 4);
  const ParameterCount a = parameter_count(32, 8, 8, 4), b = parameter_count(32, 32, 8, 4);
  EXPECT_EQ(c.lorpman, a.lorpman + b.lorpman);
  EXPECT_EQ(c.pamal, a.pamal + b.pamal);
}

TEST(Ablation, RankSweepParameterCountsAreMonotone) {
  AblationConfig c = ablation_config_from_json(
      R"({"param": "rank", "values": [1, 2, 4, 8], "repeats": 1, "m": 3, "u": 8, "hidden": [16],
          "rows": 200, "epochs": 1, "lr": 0.01, "validate_every": 0})");
  const ExperimentOutput out = run_ablation(c);
  const NumericTable t = to_numeric(parse_csv(out.find("ablation.csv")->contents));
  ASSERT_EQ(t.rows.size(), 4u);
  const std::size_t col = t.column("parameters_lorpman");
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_GT(t.rows[i][col], t.rows[i - 1][col]);
}

TEST(Ablation, ScaleSweepStaysFinite) {
  AblationConfig c = ablation_config_from_json(std::string(kSmallSynth).insert(1, R"("param": "scale_s", "values": [0.1, 0.5, 1], "repeats": 2, )"));
  const NumericTable t = to_numeric(parse_csv(run_ablation(c).find("ablation.csv")->contents));
  for (const Vector& row : t.rows) EXPECT_TRUE(std::isfinite(row[t.column("mean_hv")]));
}

TEST(Ablation, SomeEarlyFreezeMatchesNeverFreezing) {
  AblationConfig c = ablation_config_from_json(
      // Small noisy dataset with a wide bottom: shared weights overfit if never frozen.
      R"({"param": "freeze_epoch", "values": [20, 50, 100, 150], "repeats": 3, "epochs": 150, "rows": 200,
          "noise": 0.5, "hidden": [64, 64], "validate_every": 0, "ref_offset": [2, 2, 2]})");
  const NumericTable t = to_numeric(parse_csv(run_ablation(c).find("ablation.csv")->contents));
  const std::size_t hv = t.column("mean_hv");
  const double never = t.rows.back()[hv];
  double best_early = -1.0;
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) best_early = std::max(best_early, t.rows[i][hv]);
  EXPECT_GE(best_early, never);
}

TEST(Artifacts, WriteToDisk) {
  ExperimentOutput out;
  out.artifacts.push_back({"a/b.csv", "x\n1\n"});
  const auto dir = std::filesystem::temp_directory_path() / "lorpman-artifact-test";
  std::filesystem::remove_all(dir);
  write_artifacts(out, dir);
  EXPECT_EQ(read_file(dir / "a" / "b.csv"), "x\n1\n");
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace lorpman
