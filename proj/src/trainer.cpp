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
#include "acr/trainer.hpp"

#include "acr/errors.hpp"
#include "acr/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace acr {

std::vector<std::string> config_problems(const TrainConfig& cfg)
{
    std::vector<std::string> problems;
    if (cfg.epochs < 1) {
        problems.emplace_back("epochs must be >= 1");
    }
    if (cfg.batch_size < 1) {
        problems.emplace_back("batch_size must be >= 1");
    }
    if (!(cfg.optimizer.learning_rate >= 0.0) || !std::isfinite(cfg.optimizer.learning_rate)) {
        problems.emplace_back("learning_rate must be non-negative");
    }
    if (!(cfg.optimizer.beta1 >= 0.0 && cfg.optimizer.beta1 < 1.0)) {
        problems.emplace_back("beta1 must lie in [0, 1)");
    }
    if (!(cfg.optimizer.beta2 >= 0.0 && cfg.optimizer.beta2 < 1.0)) {
        problems.emplace_back("beta2 must lie in [0, 1)");
    }
    if (!(cfg.optimizer.epsilon > 0.0)) {
        problems.emplace_back("epsilon must be positive");
    }
    if (!(cfg.optimizer.decay >= 0.0)) {
        problems.emplace_back("decay must be non-negative");
    }
    if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) {
        problems.emplace_back("lambda must be positive");
    }
    if (cfg.loss_kind == LossKind::acr && cfg.schedule.empty()) {
        problems.emplace_back("schedule must not be empty for the ACR loss");
    }
    return problems;
}

void validate(const TrainConfig& cfg)
{
    const auto problems = config_problems(cfg);
    if (!problems.empty()) {
        std::string msg = "invalid training configuration:";
        for (const auto& p : problems) {
            msg += "\n  - " + p;
        }
        throw ConfigError(msg);
    }
}

std::vector<HardnessWeights> compute_hardness(const ShapeModel& shape_model, std::span<const ShapeSample> targets,
                                              double fraction, HardnessGranularity granularity)
{
    std::vector<HardnessWeights> out;
    out.reserve(targets.size());
    for (const auto& t : targets) {
        out.push_back(hardness_weights(t, smooth_face(shape_model, t, fraction), granularity));
    }
    return out;
}

EvalSummary evaluate_model(const RegressorModel& model, const Dataset& data, const NormalizationConfig& norm)
{
    const Eigen::MatrixXd preds = forward_batch(model, data.features);
    std::vector<double> errors;
    errors.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& gt = data.targets[i];
        errors.push_back(mean_point_error(gt, preds.col(static_cast<Eigen::Index>(i))) /
                         normalization_factor(gt, norm));
    }
    return summarize_errors(errors);
}

TrainTrace train(const Dataset& train_set, const std::optional<Dataset>& eval_set, const RegressorModel& model_init,
                 const TrainConfig& cfg, const ShapeModel& shape_model)
{
    validate(cfg);
    if (train_set.size() == 0) {
        throw InsufficientDataError("training set is empty");
    }
    if (static_cast<std::size_t>(train_set.features.cols()) != train_set.size()) {
        throw InvalidInputError("training features and targets differ in count");
    }
    if (cfg.loss_kind == LossKind::acr && shape_model.dimension() != model_init.output_dim()) {
        throw InvalidInputError("shape model dimension does not match the regressor output");
    }

    const LossSpec loss{cfg.loss_kind, AcrLossConfig{cfg.lambda, 1.0, cfg.continuity}};
    RegressorModel model = model_init;
    AdamState adam = AdamState::zeros(model.num_parameters());
    std::mt19937_64 rng(cfg.seed);

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainTrace trace;
    trace.epochs.reserve(static_cast<std::size_t>(cfg.epochs));
    std::vector<HardnessWeights> phis;
    std::optional<std::size_t> active_bucket;

    Eigen::MatrixXd batch_features;
    std::vector<ShapeSample> batch_targets;
    std::vector<HardnessWeights> batch_phis;

    for (long long epoch = 0; epoch < cfg.epochs; ++epoch) {
        double fraction = 0.0;
        if (cfg.loss_kind == LossKind::acr) {
            const std::size_t bucket = cfg.schedule.bucket_index(epoch);
            fraction = cfg.schedule.buckets()[bucket].fraction;
            if (bucket != active_bucket) {
                phis = compute_hardness(shape_model, train_set.targets, fraction, cfg.granularity);
                active_bucket = bucket;
                ++trace.phi_recomputations;
            }
        }

        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
            const std::size_t count = std::min(cfg.batch_size, order.size() - start);
            batch_features.resize(train_set.features.rows(), static_cast<Eigen::Index>(count));
            batch_targets.clear();
            batch_phis.clear();
            for (std::size_t j = 0; j < count; ++j) {
                const std::size_t idx = order[start + j];
                batch_features.col(static_cast<Eigen::Index>(j)) = train_set.features.col(static_cast<Eigen::Index>(idx));
                batch_targets.push_back(train_set.targets[idx]);
                if (cfg.loss_kind == LossKind::acr) {
                    batch_phis.push_back(phis[idx]);
                }
            }
            Gradients g;
            try {
                g = backward(model, batch_features, batch_targets, batch_phis, loss);
            } catch (const NumericalError& e) {
                throw NumericalError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index) +
                                     ": " + e.what());
            }
            loss_sum += g.loss * static_cast<double>(count);
            adam_step(model.parameters(), g.grad, adam, cfg.optimizer);
            if (!model.parameters().allFinite()) {
                throw NumericalError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index) +
                                     ": parameters became non-finite");
            }
        }

        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = loss_sum / static_cast<double>(train_set.size());
        record.eval_nme = evaluate_model(model, eval_set ? *eval_set : train_set, cfg.normalization).nme;
        record.active_fraction = fraction;
        trace.epochs.push_back(record);
    }
    trace.final_model = std::move(model);
    return trace;
}

std::string trace_csv(const TrainTrace& trace)
{
    std::string out = "epoch,train_loss,eval_nme,active_fraction\n";
    for (const auto& r : trace.epochs) {
        out += std::to_string(r.epoch) + ',' + numfmt::exact(r.train_loss) + ',' + numfmt::exact(r.eval_nme) + ',' +
               numfmt::exact(r.active_fraction) + '\n';
    }
    return out;
}

} // namespace acr
