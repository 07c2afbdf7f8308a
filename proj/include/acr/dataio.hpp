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

#ifndef ACR_DATAIO_HPP
#define ACR_DATAIO_HPP

#include "acr/shape_model.hpp"

#include "Eigen/Core"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace acr {

struct Point2
{
    double x = 0.0;
    double y = 0.0;
};

/**
 * Reads the 300W `.pts` format:
 *
 *     version: 1
 *     n_points: 68
 *     {
 *     x y
 *     ...
 *     }
 *
 * Whitespace and CRLF tolerant; trailing blank lines are ignored. Throws
 * ParseError carrying the offending 1-based line number.
 */
std::vector<Point2> parse_pts(std::string_view text);

/// Writes `.pts` text with 6 decimals per coordinate.
std::string serialize_pts(const std::vector<Point2>& points);

std::vector<Point2> read_pts_file(const std::string& path);
void write_pts_file(const std::string& path, const std::vector<Point2>& points);

struct AnnotatedFace
{
    std::string image_id;
    std::vector<Point2> raw_points; ///< pixels
    double image_width = 0.0;
    double image_height = 0.0;
};

struct NormalizedFace
{
    ShapeSample sample;
    std::size_t clipped = 0; ///< coordinates that fell outside [0, 1] and were clipped
};

/// x / width, y / height, clipped to [0, 1].
NormalizedFace normalize(const AnnotatedFace& face);

ShapeSample to_sample(const std::vector<Point2>& points);
std::vector<Point2> to_points(const ShapeSample& sample);

struct ManifestEntry
{
    std::string image_id;
    std::string pts_path;
    double width = 0.0;
    double height = 0.0;
};

/// Lines of `image_id,pts_path,width,height`; blank lines and '#' comments skipped.
std::vector<ManifestEntry> parse_manifest(std::string_view text);

/**
 * Loads every face of a manifest file. Relative `.pts` paths resolve against
 * the manifest's directory.
 */
std::vector<AnnotatedFace> load_manifest(const std::string& manifest_path);

/// A neutral 68-point face (300W/iBUG ordering) in the unit square.
ShapeSample template_face_68();

/**
 * Plausible face shapes around the template: similarity jitter, a few
 * expression-like deformation modes and small per-point noise. Used to seed
 * a shape model when no annotated data is at hand.
 */
std::vector<ShapeSample> generate_base_shapes(std::size_t count, std::uint64_t seed);

struct SyntheticDatasetSpec
{
    std::size_t num_samples = 0;
    std::vector<double> noise_scale_per_point; ///< Gaussian label-noise sigma per point, length P
    double occlusion_fraction = 0.0;           ///< per-point probability of being hidden from the features
    std::uint64_t seed = 0;
    double feature_noise = 0.0;            ///< Gaussian sigma added to every feature
    bool identity_mixing = false;          ///< features = clean shape (no mixing)
    std::uint64_t mixing_seed = 0x5eed;    ///< fixes the mixing matrix across splits
};

/// Feature columns (F x N) and target shapes.
struct SyntheticDataset
{
    Eigen::MatrixXd features;
    std::vector<ShapeSample> targets;
    std::vector<ShapeSample> clean;
};

/**
 * Draws clean faces mean + V b with b_i ~ U(-2 sqrt(lambda_i), 2 sqrt(lambda_i)),
 * adds per-point label noise to form the targets, and produces features as a
 * fixed random linear mixing of the clean face plus noise. Occluded points
 * are replaced by their mean position before mixing. Deterministic in
 * (model, spec).
 */
SyntheticDataset generate_synthetic(const ShapeModel& model, const SyntheticDatasetSpec& spec);

/// Noise scales with round(hard_fraction * P) seeded-random points at hard_scale, the rest at easy_scale.
std::vector<double> heteroscedastic_scales(std::size_t num_points, double hard_fraction, double hard_scale,
                                           double easy_scale, std::uint64_t seed);

} // namespace acr

#endif // ACR_DATAIO_HPP
