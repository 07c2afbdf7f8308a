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

#ifndef ACR_METRICS_HPP
#define ACR_METRICS_HPP

#include "acr/shape_model.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace acr {

/// Average Euclidean distance between corresponding (x, y) points.
double mean_point_error(const ShapeSample& gt, const ShapeSample& pred);

/// Distance between two landmark points (0-based point indices), e.g. the outer eye corners.
double normalization_factor(const ShapeSample& gt, std::size_t left_eye_outer_idx, std::size_t right_eye_outer_idx);

/// Distance between the centroids of two landmark subsets (pupil centres).
double inter_pupil_factor(const ShapeSample& gt, std::span<const std::size_t> left_eye,
                          std::span<const std::size_t> right_eye);

/**
 * Which landmarks define the per-image normalisation distance.
 *
 * The default is the 68-point 300W convention (outer eye corners are points
 * 36 and 45, 0-based). In inter-pupil mode the pupil centres are the means of
 * the two eye subsets.
 */
struct NormalizationConfig
{
    enum class Mode { inter_ocular, inter_pupil };

    Mode mode = Mode::inter_ocular;
    std::size_t left_outer = 36;
    std::size_t right_outer = 45;
    std::vector<std::size_t> left_eye = {36, 37, 38, 39, 40, 41};
    std::vector<std::size_t> right_eye = {42, 43, 44, 45, 46, 47};

    static NormalizationConfig ibug68_inter_ocular();
    static NormalizationConfig ibug68_inter_pupil();
    /// COFW 29-point annotation; points 16 and 17 are the pupils.
    static NormalizationConfig cofw29_inter_pupil();
};

double normalization_factor(const ShapeSample& gt, const NormalizationConfig& cfg);

struct EvalRecord
{
    ShapeSample gt;
    ShapeSample pred;
    double norm_factor = 1.0;
};

inline constexpr double failure_threshold = 0.1;
inline constexpr std::size_t ced_samples = 1000;

struct EvalSummary
{
    double nme = 0.0;
    double fr = 0.0;  ///< fraction of images with normalised error > 0.1
    double auc = 0.0; ///< area under the CED on [0, 0.1], divided by 0.1
    std::vector<std::pair<double, double>> ced; ///< (threshold, fraction), 1000 rows
    std::vector<double> per_image_error;
};

/// Summary from per-image normalised errors.
EvalSummary summarize_errors(std::span<const double> errors);

EvalSummary evaluate(std::span<const EvalRecord> records);

/// "threshold,fraction" rows.
std::string ced_csv(const EvalSummary& summary);
/// "nme,fr,auc" header plus one row.
std::string summary_csv(const EvalSummary& summary);

} // namespace acr

#endif // ACR_METRICS_HPP
