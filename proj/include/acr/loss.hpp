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

#ifndef ACR_LOSS_HPP
#define ACR_LOSS_HPP

#include "acr/hardness.hpp"
#include "acr/shape_model.hpp"

#include "Eigen/Core"

#include <cstdint>
#include <span>
#include <vector>

namespace acr {

/// How the constant joining the quadratic branch to the logarithmic branch is chosen.
enum class ContinuityConstant {
    continuous,   ///< C = lambda ln(1 + t^(2 - phi)) - t^2, i.e. lambda ln 2 - 1 at t = 1
    phi_scaled ///< C = phi ln 2 - 1; discontinuous at the branch point unless lambda = phi
};

struct AcrLossConfig
{
    double lambda = 4.0;          ///< curvature of the logarithmic branch, > 0
    double delta_threshold = 1.0; ///< errors above this use the quadratic branch
    ContinuityConstant constant = ContinuityConstant::continuous;
};

void validate(const AcrLossConfig& cfg);

enum class LossBranch : std::uint8_t { log, quad };

/**
 * Result of a batch loss evaluation. Element arrays are laid out sample-major:
 * entry i * D + m belongs to coordinate m of sample i.
 */
struct LossReport
{
    double total = 0.0;                  ///< mean of per_element
    Eigen::VectorXd per_element;         ///< N * D
    std::vector<LossBranch> branch_taken; ///< N * D
    Eigen::MatrixXd grad_pred;           ///< D x N, d(total)/d(pred)
};

/// |face - pred| element-wise.
Eigen::VectorXd delta(const ShapeSample& face, const ShapeSample& pred);

/// Loss of one coordinate with absolute error d and hardness phi.
double acr_loss_elem(double d, double phi, const AcrLossConfig& cfg);

/**
 * d(loss)/d(d), the non-negative magnitude. At d = 0 this is the analytic
 * limit: 0 for phi < 1 and lambda for phi = 1.
 */
double acr_grad_elem(double d, double phi, const AcrLossConfig& cfg);

/// Batch-mean ACR loss over all N * D coordinates, with the gradient w.r.t. the predictions.
LossReport acr_loss_batch(std::span<const ShapeSample> faces, std::span<const ShapeSample> preds,
                          std::span<const HardnessWeights> phis, const AcrLossConfig& cfg);

/// Mean squared coordinate error, gradient 2 (pred - face) / (N * D).
LossReport l2_loss_batch(std::span<const ShapeSample> faces, std::span<const ShapeSample> preds);

} // namespace acr

#endif // ACR_LOSS_HPP
