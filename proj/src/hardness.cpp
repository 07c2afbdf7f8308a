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
#include "acr/hardness.hpp"

#include "acr/errors.hpp"

#include <cmath>
#include <string>

namespace acr {

HardnessWeights hardness_weights(const ShapeSample& face, const ShapeSample& smooth, HardnessGranularity granularity)
{
    if (face.size() != smooth.size()) {
        throw InvalidInputError("hardness: face and smooth face differ in dimension (" + std::to_string(face.size()) +
                                " vs " + std::to_string(smooth.size()) + ")");
    }
    if (!face.allFinite() || !smooth.allFinite()) {
        throw InvalidInputError("hardness: non-finite coordinates");
    }

    Eigen::VectorXd diff = (smooth - face).cwiseAbs();
    if (granularity == HardnessGranularity::per_point) {
        if (diff.size() % 2 != 0) {
            throw InvalidInputError("hardness: per-point mode needs an even dimension");
        }
        for (Eigen::Index p = 0; p < diff.size() / 2; ++p) {
            const double dist = std::hypot(diff(2 * p), diff(2 * p + 1));
            diff(2 * p) = dist;
            diff(2 * p + 1) = dist;
        }
    }

    HardnessWeights out;
    const double largest = diff.size() > 0 ? diff.maxCoeff() : 0.0;
    if (largest < hardness_degenerate_threshold) {
        out.phi = Eigen::VectorXd::Zero(diff.size());
        return out;
    }
    out.phi = diff / largest;
    return out;
}

} // namespace acr
