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
#include "acr/metrics.hpp"

#include "acr/errors.hpp"
#include "acr/numfmt.hpp"

#include <cmath>

namespace acr {

namespace {

constexpr double min_normalization = 1e-9;

void check_point_index(const ShapeSample& gt, std::size_t idx)
{
    if (gt.size() % 2 != 0 || static_cast<Eigen::Index>(2 * idx + 1) >= gt.size()) {
        throw InvalidInputError("landmark index " + std::to_string(idx) + " out of range for a face with " +
                                std::to_string(gt.size() / 2) + " points");
    }
}

Eigen::Vector2d point(const ShapeSample& s, std::size_t idx)
{
    const auto i = static_cast<Eigen::Index>(idx);
    return {s(2 * i), s(2 * i + 1)};
}

Eigen::Vector2d centroid(const ShapeSample& s, std::span<const std::size_t> idx)
{
    if (idx.empty()) {
        throw InvalidInputError("inter-pupil normalisation needs a non-empty eye landmark subset");
    }
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (const auto i : idx) {
        check_point_index(s, i);
        c += point(s, i);
    }
    return c / static_cast<double>(idx.size());
}

} // namespace

double mean_point_error(const ShapeSample& gt, const ShapeSample& pred)
{
    if (gt.size() != pred.size()) {
        throw InvalidInputError("mean point error: dimension mismatch (" + std::to_string(gt.size()) + " vs " +
                                std::to_string(pred.size()) + ")");
    }
    if (gt.size() == 0 || gt.size() % 2 != 0) {
        throw InvalidInputError("mean point error: dimension must be even and non-zero");
    }
    const Eigen::Index points = gt.size() / 2;
    double sum = 0.0;
    for (Eigen::Index p = 0; p < points; ++p) {
        sum += std::hypot(pred(2 * p) - gt(2 * p), pred(2 * p + 1) - gt(2 * p + 1));
    }
    return sum / static_cast<double>(points);
}

double normalization_factor(const ShapeSample& gt, std::size_t left_eye_outer_idx, std::size_t right_eye_outer_idx)
{
    if (left_eye_outer_idx == right_eye_outer_idx) {
        throw InvalidInputError("normalisation landmarks must be distinct");
    }
    check_point_index(gt, left_eye_outer_idx);
    check_point_index(gt, right_eye_outer_idx);
    const double dist = (point(gt, left_eye_outer_idx) - point(gt, right_eye_outer_idx)).norm();
    if (!(dist > min_normalization)) {
        throw DegenerateGeometryError("outer eye corners coincide; cannot normalise the error");
    }
    return dist;
}

double inter_pupil_factor(const ShapeSample& gt, std::span<const std::size_t> left_eye,
                          std::span<const std::size_t> right_eye)
{
    const double dist = (centroid(gt, left_eye) - centroid(gt, right_eye)).norm();
    if (!(dist > min_normalization)) {
        throw DegenerateGeometryError("pupil centres coincide; cannot normalise the error");
    }
    return dist;
}

NormalizationConfig NormalizationConfig::ibug68_inter_ocular()
{
    return {};
}

NormalizationConfig NormalizationConfig::ibug68_inter_pupil()
{
    NormalizationConfig cfg;
    cfg.mode = Mode::inter_pupil;
    return cfg;
}

NormalizationConfig NormalizationConfig::cofw29_inter_pupil()
{
    NormalizationConfig cfg;
    cfg.mode = Mode::inter_pupil;
    cfg.left_outer = 16;
    cfg.right_outer = 17;
    cfg.left_eye = {16};
    cfg.right_eye = {17};
    return cfg;
}

double normalization_factor(const ShapeSample& gt, const NormalizationConfig& cfg)
{
    if (cfg.mode == NormalizationConfig::Mode::inter_pupil) {
        return inter_pupil_factor(gt, cfg.left_eye, cfg.right_eye);
    }
    return normalization_factor(gt, cfg.left_outer, cfg.right_outer);
}

EvalSummary summarize_errors(std::span<const double> errors)
{
    if (errors.empty()) {
        throw InsufficientDataError("evaluation needs at least one image");
    }
    EvalSummary out;
    out.per_image_error.assign(errors.begin(), errors.end());
    const double n = static_cast<double>(errors.size());

    double sum = 0.0;
    for (const double e : errors) {
        if (!std::isfinite(e) || e < 0.0) {
            throw InvalidInputError("per-image errors must be finite and non-negative");
        }
        sum += e;
    }
    out.nme = sum / n;

    out.ced.reserve(ced_samples);
    for (std::size_t k = 0; k < ced_samples; ++k) {
        // Pin the last threshold to exactly 0.1.
        const double t = k + 1 == ced_samples
                             ? failure_threshold
                             : failure_threshold * static_cast<double>(k) / static_cast<double>(ced_samples - 1);
        std::size_t below = 0;
        for (const double e : errors) {
            below += e <= t ? 1 : 0;
        }
        out.ced.emplace_back(t, static_cast<double>(below) / n);
    }
    // Taken from the curve rather than counted separately so the two agree to the last bit.
    out.fr = 1.0 - out.ced.back().second;

    double area = 0.0;
    for (std::size_t k = 1; k < out.ced.size(); ++k) {
        const auto [t0, f0] = out.ced[k - 1];
        const auto [t1, f1] = out.ced[k];
        area += 0.5 * (f0 + f1) * (t1 - t0);
    }
    out.auc = area / failure_threshold;
    return out;
}

EvalSummary evaluate(std::span<const EvalRecord> records)
{
    if (records.empty()) {
        throw InsufficientDataError("evaluation needs at least one image");
    }
    std::vector<double> errors;
    errors.reserve(records.size());
    for (const auto& r : records) {
        if (!(r.norm_factor > 0.0) || !std::isfinite(r.norm_factor)) {
            throw InvalidInputError("normalisation factors must be positive");
        }
        errors.push_back(mean_point_error(r.gt, r.pred) / r.norm_factor);
    }
    return summarize_errors(errors);
}

std::string ced_csv(const EvalSummary& summary)
{
    std::string out = "threshold,fraction\n";
    for (const auto& [t, f] : summary.ced) {
        out += numfmt::exact(t) + ',' + numfmt::exact(f) + '\n';
    }
    return out;
}

std::string summary_csv(const EvalSummary& summary)
{
    return "nme,fr,auc\n" + numfmt::exact(summary.nme) + ',' + numfmt::exact(summary.fr) + ',' +
           numfmt::exact(summary.auc) + '\n';
}

} // namespace acr
