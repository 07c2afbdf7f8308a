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

#ifndef ACR_TRAINER_HPP
#define ACR_TRAINER_HPP

#include "acr/hardness.hpp"
#include "acr/metrics.hpp"
#include "acr/regressor.hpp"
#include "acr/shape_model.hpp"

#include "Eigen/Core"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace acr {

/// Feature columns (F x N) and one target face per column.
struct Dataset
{
    Eigen::MatrixXd features;
    std::vector<ShapeSample> targets;

    std::size_t size() const { return targets.size(); }
};

struct TrainConfig
{
    long long epochs = 150;
    std::size_t batch_size = 32;
    AdamConfig optimizer;
    LossKind loss_kind = LossKind::acr;
    double lambda = 4.0;
    ContinuityConstant continuity = ContinuityConstant::continuous;
    EigFractionSchedule schedule = EigFractionSchedule::standard();
    HardnessGranularity granularity = HardnessGranularity::per_coordinate;
    NormalizationConfig normalization;
    std::uint64_t seed = 0;
};

/// Every invalid field, one message each; empty when the config is usable.
std::vector<std::string> config_problems(const TrainConfig& cfg);

/// Throws ConfigError listing config_problems().
void validate(const TrainConfig& cfg);

struct EpochRecord
{
    long long epoch = 0;
    double train_loss = 0.0;
    double eval_nme = 0.0;
    double active_fraction = 0.0; ///< 0 for L2, which has no smooth faces
};

struct TrainTrace
{
    std::vector<EpochRecord> epochs;
    RegressorModel final_model;
    std::size_t phi_recomputations = 0;
};

/**
 * Smooth faces and hardness weights for every target at one eigenvector
 * fraction. Hardness depends only on ground truth, never on predictions.
 */
std::vector<HardnessWeights> compute_hardness(const ShapeModel& shape_model, std::span<const ShapeSample> targets,
                                              double fraction, HardnessGranularity granularity);

/// NME of the model's predictions on a dataset.
EvalSummary evaluate_model(const RegressorModel& model, const Dataset& data, const NormalizationConfig& norm);

/**
 * Mini-batch Adam training. Each epoch resolves the eigenvector fraction from
 * the schedule and, whenever it changes, recomputes the hardness weights of
 * all training targets. Batches follow a seeded shuffle; the last short batch
 * is averaged over its true size. L2 training skips the hardness machinery.
 *
 * eval_nme is measured on eval_set if given, otherwise on the training set.
 * Throws NumericalError (with epoch and batch) if the loss becomes non-finite.
 */
TrainTrace train(const Dataset& train_set, const std::optional<Dataset>& eval_set, const RegressorModel& model_init,
                 const TrainConfig& cfg, const ShapeModel& shape_model);

/// `epoch,train_loss,eval_nme,active_fraction`
std::string trace_csv(const TrainTrace& trace);

} // namespace acr

#endif // ACR_TRAINER_HPP
