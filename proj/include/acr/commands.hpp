/*
 * acr: adaptive coordinate-based regression loss for face alignment
 *
 * Copyright 2026 The acr authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#ifndef ACR_COMMANDS_HPP
#define ACR_COMMANDS_HPP

#include "acr/config.hpp"
#include "acr/dataio.hpp"
#include "acr/metrics.hpp"
#include "acr/regressor.hpp"
#include "acr/shape_model.hpp"
#include "acr/trainer.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

// Experiment harness behind the `acr` command-line tool. Every command is a
// pure function of its configuration: identical inputs give byte-identical
// output files.
namespace acr::cli {

enum class DataSource { synthetic, manifest };

/// Desk-scale heteroscedastic landmark task.
struct SyntheticSource
{
    std::size_t base_samples = 400; ///< shapes used to build the generating shape model
    std::size_t train_samples = 500;
    std::size_t test_samples = 200;
    double hard_fraction = 0.2; ///< share of landmarks with large label noise
    double hard_noise = 0.02;
    double easy_noise = 0.002;
    double occlusion_fraction = 0.0;
    double feature_noise = 0.0;
    bool identity_mixing = false;
    std::uint64_t base_seed = 0;
    std::uint64_t data_seed = 0;
    std::uint64_t mixing_seed = 0;
};

struct ExperimentConfig
{
    std::string label = "experiment";
    TrainConfig train;
    std::uint64_t seed = 0; ///< master seed; sub-seeds derive from it unless given explicitly
    Architecture architecture = Architecture::mlp;
    Eigen::Index hidden_dim = 64;
    DataSource source = DataSource::synthetic;
    SyntheticSource synthetic;
    std::string manifest;
    bool write_svg = true;
};

/**
 * Builds a configuration from a key-value document. Every invalid or unknown
 * key is collected and reported in one ConfigError before any work starts.
 */
ExperimentConfig experiment_config_from(const KeyValueConfig& kv);

/// Command-line overrides; they win over the config file.
struct Overrides
{
    std::optional<std::uint64_t> seed;
    std::optional<LossKind> loss;
    std::optional<double> lambda;
};

ExperimentConfig load_experiment_config(const std::string& path, const Overrides& overrides);

/// Deterministic sub-seed for a named random stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

struct ExperimentData
{
    ShapeModel generator;
    Dataset train;
    Dataset test;
};

/// Generating shape model plus train/test splits sharing one mixing matrix.
ExperimentData build_synthetic_data(const ExperimentConfig& cfg);

/// Fits and writes a shape model; logs D, K and the top eigenvalues.
ShapeModel cmd_fit_model(const ExperimentConfig& cfg, const std::string& output_path, std::ostream& log);

struct TrainResult
{
    TrainTrace trace;
    EvalSummary train_summary;
    EvalSummary test_summary;
};

/// Trains on the train split and writes trace.csv, model.txt, summary.csv and ced.csv into out_dir.
TrainResult cmd_train(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);

struct AblationRow
{
    double lambda = 0.0;
    double train_nme = 0.0;
    double test_nme = 0.0;
};

/**
 * One ACR training run per distinct lambda (shared seed), each in its own
 * subdirectory; writes ablation.csv sorted by lambda.
 */
std::vector<AblationRow> cmd_ablate_lambda(const ExperimentConfig& cfg, std::vector<double> lambdas,
                                           const std::string& out_dir, std::ostream& log);

/// Evaluates a regressor snapshot on the configured test split; writes summary.csv, ced.csv and optionally ced.svg.
EvalSummary cmd_eval(const ExperimentConfig& cfg, const std::string& model_path, const std::string& out_dir,
                     std::ostream& log);

/// Evaluates predicted `.pts` files against ground truth, both given as manifests with matching image ids.
EvalSummary cmd_eval_predictions(const std::string& gt_manifest, const std::string& pred_manifest,
                                 const NormalizationConfig& norm, const std::string& out_dir, std::ostream& log);

std::string ablation_csv(const std::vector<AblationRow>& rows);

/// Minimal SVG line plot of a CED curve.
std::string ced_svg(const EvalSummary& summary, const std::string& title);

void write_text_file(const std::string& path, const std::string& content);

} // namespace acr::cli

#endif // ACR_COMMANDS_HPP
