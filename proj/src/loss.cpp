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
#include "acr/loss.hpp"

#include "acr/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace acr {

namespace {

// Below this, powers of d are taken as exactly 0.
constexpr double tiny_delta = 1e-300;

double pow_guarded(double d, double exponent)
{
    if (d <= tiny_delta) {
        return exponent == 0.0 ? 1.0 : 0.0;
    }
    return std::exp(exponent * std::log(d));
}

void check_elem_args(double d, double phi)
{
    if (!(d >= 0.0) || !std::isfinite(d)) {
        throw InvalidInputError("ACR loss: error magnitude must be finite and non-negative");
    }
    if (!(phi >= 0.0 && phi <= 1.0)) {
        throw InvalidInputError("ACR loss: hardness weight must lie in [0, 1]");
    }
}

double log_branch(double d, double phi, double lambda)
{
    return lambda * std::log1p(pow_guarded(d, 2.0 - phi));
}

double continuity_constant(double phi, const AcrLossConfig& cfg)
{
    if (cfg.constant == ContinuityConstant::phi_scaled) {
        return phi * std::numbers::ln2 - 1.0;
    }
    const double t = cfg.delta_threshold;
    return log_branch(t, phi, cfg.lambda) - t * t;
}

void check_batch_shapes(std::span<const ShapeSample> faces, std::span<const ShapeSample> preds)
{
    if (faces.size() != preds.size()) {
        throw InvalidInputError("loss: " + std::to_string(faces.size()) + " faces but " +
                                std::to_string(preds.size()) + " predictions");
    }
    if (faces.empty()) {
        throw InsufficientDataError("loss: empty batch");
    }
    const Eigen::Index dim = faces.front().size();
    for (std::size_t i = 0; i < faces.size(); ++i) {
        if (faces[i].size() != dim || preds[i].size() != dim) {
            throw InvalidInputError("loss: sample " + std::to_string(i) + " has inconsistent dimension");
        }
    }
}

double sign_of(double x)
{
    return static_cast<double>((x > 0.0) - (x < 0.0));
}

} // namespace

void validate(const AcrLossConfig& cfg)
{
    if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) {
        throw InvalidInputError("ACR loss: lambda must be positive");
    }
    if (!(cfg.delta_threshold > 0.0) || !std::isfinite(cfg.delta_threshold)) {
        throw InvalidInputError("ACR loss: delta threshold must be positive");
    }
}

Eigen::VectorXd delta(const ShapeSample& face, const ShapeSample& pred)
{
    if (face.size() != pred.size()) {
        throw InvalidInputError("delta: dimension mismatch (" + std::to_string(face.size()) + " vs " +
                                std::to_string(pred.size()) + ")");
    }
    return (face - pred).cwiseAbs();
}

double acr_loss_elem(double d, double phi, const AcrLossConfig& cfg)
{
    check_elem_args(d, phi);
    validate(cfg);
    if (d <= cfg.delta_threshold) {
        return log_branch(d, phi, cfg.lambda);
    }
    return d * d + continuity_constant(phi, cfg);
}

double acr_grad_elem(double d, double phi, const AcrLossConfig& cfg)
{
    check_elem_args(d, phi);
    validate(cfg);
    if (d > cfg.delta_threshold) {
        return 2.0 * d;
    }
    if (d <= tiny_delta) {
        return phi == 1.0 ? cfg.lambda : 0.0;
    }
    // lambda (2 - phi) d / (d^phi + d^2), rewritten to avoid 0/0 as d -> 0.
    return cfg.lambda * (2.0 - phi) * pow_guarded(d, 1.0 - phi) / (1.0 + pow_guarded(d, 2.0 - phi));
}

LossReport acr_loss_batch(std::span<const ShapeSample> faces, std::span<const ShapeSample> preds,
                          std::span<const HardnessWeights> phis, const AcrLossConfig& cfg)
{
    check_batch_shapes(faces, preds);
    if (phis.size() != faces.size()) {
        throw InvalidInputError("ACR loss: " + std::to_string(phis.size()) + " hardness vectors for " +
                                std::to_string(faces.size()) + " faces");
    }
    validate(cfg);

    const auto n = static_cast<Eigen::Index>(faces.size());
    const Eigen::Index dim = faces.front().size();
    const double scale = 1.0 / static_cast<double>(n * dim);

    LossReport report;
    report.per_element.resize(n * dim);
    report.branch_taken.resize(static_cast<std::size_t>(n * dim));
    report.grad_pred.resize(dim, n);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& face = faces[static_cast<std::size_t>(i)];
        const auto& pred = preds[static_cast<std::size_t>(i)];
        const auto& phi = phis[static_cast<std::size_t>(i)].phi;
        if (phi.size() != dim) {
            throw InvalidInputError("ACR loss: hardness vector " + std::to_string(i) + " has wrong dimension");
        }
        for (Eigen::Index m = 0; m < dim; ++m) {
            const double diff = pred(m) - face(m);
            const double d = std::abs(diff);
            const double value = acr_loss_elem(d, phi(m), cfg);
            const auto idx = i * dim + m;
            report.per_element(idx) = value;
            report.branch_taken[static_cast<std::size_t>(idx)] =
                d <= cfg.delta_threshold ? LossBranch::log : LossBranch::quad;
            report.grad_pred(m, i) = sign_of(diff) * acr_grad_elem(d, phi(m), cfg) * scale;
            sum += value;
        }
    }
    report.total = sum * scale;
    return report;
}

LossReport l2_loss_batch(std::span<const ShapeSample> faces, std::span<const ShapeSample> preds)
{
    check_batch_shapes(faces, preds);
    const auto n = static_cast<Eigen::Index>(faces.size());
    const Eigen::Index dim = faces.front().size();
    const double scale = 1.0 / static_cast<double>(n * dim);

    LossReport report;
    report.per_element.resize(n * dim);
    report.branch_taken.assign(static_cast<std::size_t>(n * dim), LossBranch::quad);
    report.grad_pred.resize(dim, n);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd diff = preds[static_cast<std::size_t>(i)] - faces[static_cast<std::size_t>(i)];
        report.per_element.segment(i * dim, dim) = diff.array().square().matrix();
        report.grad_pred.col(i) = 2.0 * scale * diff;
        sum += diff.squaredNorm();
    }
    report.total = sum * scale;
    return report;
}

} // namespace acr
