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

#ifndef ACR_HARDNESS_HPP
#define ACR_HARDNESS_HPP

#include "acr/shape_model.hpp"

#include "Eigen/Core"

namespace acr {

/// Per-element hardness weights in [0, 1]; 1 marks the hardest coordinate of a face.
struct HardnessWeights
{
    Eigen::VectorXd phi;
};

enum class HardnessGranularity {
    per_coordinate, ///< |smooth_m - face_m| for every flattened coordinate
    per_point       ///< Euclidean point distance, shared by the x and y entries
};

/// Differences below this are treated as "no hardness signal": all weights become 0.
inline constexpr double hardness_degenerate_threshold = 1e-12;

/**
 * Hardness of each coordinate of a ground-truth face relative to its smooth
 * face: the absolute difference divided by the largest one in the face.
 */
HardnessWeights hardness_weights(const ShapeSample& face, const ShapeSample& smooth,
                                 HardnessGranularity granularity = HardnessGranularity::per_coordinate);

} // namespace acr

#endif // ACR_HARDNESS_HPP
