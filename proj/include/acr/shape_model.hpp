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

#ifndef ACR_SHAPE_MODEL_HPP
#define ACR_SHAPE_MODEL_HPP

#include "Eigen/Core"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace acr {

/**
 * One face: P landmark points flattened to D = 2P normalized coordinates,
 * interleaved as (x0, y0, x1, y1, ...). Coordinates are expected in [0, 1]
 * (pixel coordinates divided by the crop width/height).
 */
using ShapeSample = Eigen::VectorXd;

/// Throws InvalidInputError unless the sample is finite with even D >= 4.
void validate_sample(const ShapeSample& sample, const char* what = "shape sample");

/**
 * @brief Statistical shape model: mean face plus the eigenvectors of the
 * training-set covariance matrix.
 *
 * Eigenvectors are the columns of a D x K matrix, orthonormal and ordered by
 * descending eigenvalue. Each column is sign-normalised so that its
 * largest-magnitude entry is positive. K = min(D, N - 1); zero-variance
 * directions are kept with eigenvalue 0.
 *
 * A ShapeModel is immutable after fitting; every operation on it is a pure
 * function and safe to call concurrently.
 */
struct ShapeModel
{
    Eigen::VectorXd mean_face;
    Eigen::MatrixXd eigenvectors; ///< D x K
    Eigen::VectorXd eigenvalues;  ///< K, non-increasing, >= 0
    std::size_t num_training_samples = 0;

    Eigen::Index dimension() const { return mean_face.size(); }
    Eigen::Index num_eigenvectors() const { return eigenvalues.size(); }
};

/// Shape coefficients b of a face in the (truncated) eigenbasis.
struct ShapeParams
{
    Eigen::VectorXd b;
};

/**
 * Piecewise-constant schedule of the fraction of eigenvectors used to build
 * smooth faces, keyed by inclusive epoch upper bounds.
 */
class EigFractionSchedule
{
public:
    struct Bucket
    {
        long long last_epoch; ///< inclusive
        double fraction;      ///< in (0, 1]
    };

    EigFractionSchedule() = default;

    /// Bounds must be strictly increasing and fractions non-decreasing.
    explicit EigFractionSchedule(std::vector<Bucket> buckets);

    /// 80% up to epoch 15, 85% to 30, 90% to 70, 95% to 100, 97% to 150.
    static EigFractionSchedule standard();

    /// Parses "15:0.80,30:0.85,...".
    static EigFractionSchedule parse(const std::string& text);
    std::string to_string() const;

    const std::vector<Bucket>& buckets() const { return buckets_; }
    bool empty() const { return buckets_.empty(); }

    /// Index of the bucket covering the epoch; epochs past the end map to the last bucket.
    std::size_t bucket_index(long long epoch) const;

private:
    std::vector<Bucket> buckets_;
};

/**
 * Fits the model: element-wise mean and the eigendecomposition of the sample
 * covariance (N - 1 divisor).
 *
 * Throws InsufficientDataError for fewer than 2 samples, InvalidInputError on
 * dimension mismatch or non-finite input, NumericalError if the
 * eigendecomposition fails.
 */
ShapeModel fit_shape_model(std::span<const ShapeSample> samples);

/// b = V_L^T (face - mean) over the first num_eigs eigenvectors. No clamping.
ShapeParams project(const ShapeModel& model, const ShapeSample& face, Eigen::Index num_eigs);

/// mean + V_L b, with L = b.size().
ShapeSample reconstruct(const ShapeModel& model, const ShapeParams& params);

/// Clamps each b_i to [-3 sqrt(lambda_i), +3 sqrt(lambda_i)].
ShapeParams clamp_params(const ShapeParams& params, const Eigen::VectorXd& eigenvalues);

/// Number of eigenvectors used for a fraction: round(fraction * K).
Eigen::Index eigenvector_count(const ShapeModel& model, double fraction);

/**
 * Smooth face: the face projected onto the first round(fraction * K)
 * eigenvectors, coefficients clamped to +-3 sigma, reconstructed around the
 * mean. The result is not clipped to [0, 1].
 */
ShapeSample smooth_face(const ShapeModel& model, const ShapeSample& face, double fraction);

/// As smooth_face, optionally skipping the +-3 sigma clamp.
ShapeSample smooth_face(const ShapeModel& model, const ShapeSample& face, double fraction, bool clamp);

double fraction_for_epoch(const EigFractionSchedule& schedule, long long epoch);

/// Versioned JSON document with D, K, mean, eigenvalues and column-major eigenvectors.
std::string serialize_shape_model(const ShapeModel& model);
ShapeModel deserialize_shape_model(const std::string& text);

void save_shape_model(const ShapeModel& model, const std::string& path);
ShapeModel load_shape_model(const std::string& path);

} // namespace acr

#endif // ACR_SHAPE_MODEL_HPP
