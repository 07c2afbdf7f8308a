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
#include "acr/shape_model.hpp"

#include "acr/errors.hpp"
#include "acr/numfmt.hpp"

#include "Eigen/Eigenvalues"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace acr {

namespace {

constexpr double negative_eigenvalue_tolerance = 1e-10;
constexpr int shape_model_format_version = 1;

void append_array(std::ostringstream& out, const double* data, Eigen::Index n)
{
    out << '[';
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i > 0) {
            out << ", ";
        }
        out << numfmt::exact(data[i]);
    }
    out << ']';
}

Eigen::VectorXd json_to_vector(const nlohmann::json& node, const char* key)
{
    const auto& arr = node.at(key);
    if (!arr.is_array()) {
        throw ParseError(0, std::string("shape model field '") + key + "' is not an array");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) {
            throw ParseError(0, std::string("shape model field '") + key + "' has a non-numeric entry");
        }
        v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    }
    return v;
}

} // namespace

void validate_sample(const ShapeSample& sample, const char* what)
{
    if (sample.size() < 4 || sample.size() % 2 != 0) {
        throw InvalidInputError(std::string(what) + ": dimension must be even and >= 4, got " +
                                std::to_string(sample.size()));
    }
    if (!sample.allFinite()) {
        throw InvalidInputError(std::string(what) + ": contains non-finite coordinates");
    }
}

EigFractionSchedule::EigFractionSchedule(std::vector<Bucket> buckets) : buckets_(std::move(buckets))
{
    for (std::size_t i = 0; i < buckets_.size(); ++i) {
        const auto& b = buckets_[i];
        if (!(b.fraction > 0.0 && b.fraction <= 1.0)) {
            throw InvalidInputError("schedule fraction must lie in (0, 1]");
        }
        if (b.last_epoch < 0) {
            throw InvalidInputError("schedule epoch bounds must be non-negative");
        }
        if (i > 0) {
            if (b.last_epoch <= buckets_[i - 1].last_epoch) {
                throw InvalidInputError("schedule epoch bounds must be strictly increasing");
            }
            if (b.fraction < buckets_[i - 1].fraction) {
                throw InvalidInputError("schedule fractions must be non-decreasing");
            }
        }
    }
}

EigFractionSchedule EigFractionSchedule::standard()
{
    return EigFractionSchedule({{15, 0.80}, {30, 0.85}, {70, 0.90}, {100, 0.95}, {150, 0.97}});
}

EigFractionSchedule EigFractionSchedule::parse(const std::string& text)
{
    std::vector<Bucket> buckets;
    std::string_view rest = text;
    while (!numfmt::trim(rest).empty()) {
        const auto comma = rest.find(',');
        const auto item = numfmt::trim(rest.substr(0, comma));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) {
            throw InvalidInputError("schedule entry '" + std::string(item) + "' is not of the form epoch:fraction");
        }
        const auto epoch = numfmt::parse_int(item.substr(0, colon));
        const auto fraction = numfmt::parse_double(item.substr(colon + 1));
        if (!epoch || !fraction) {
            throw InvalidInputError("schedule entry '" + std::string(item) + "' is not numeric");
        }
        buckets.push_back({*epoch, *fraction});
    }
    return EigFractionSchedule(std::move(buckets));
}

std::string EigFractionSchedule::to_string() const
{
    std::string out;
    for (const auto& b : buckets_) {
        if (!out.empty()) {
            out += ',';
        }
        out += std::to_string(b.last_epoch) + ':' + numfmt::exact(b.fraction);
    }
    return out;
}

std::size_t EigFractionSchedule::bucket_index(long long epoch) const
{
    if (buckets_.empty()) {
        throw InvalidInputError("eigenvector fraction schedule is empty");
    }
    if (epoch < 0) {
        throw InvalidInputError("epoch must be non-negative");
    }
    const auto it = std::find_if(buckets_.begin(), buckets_.end(),
                                 [epoch](const Bucket& b) { return b.last_epoch >= epoch; });
    if (it == buckets_.end()) {
        return buckets_.size() - 1;
    }
    return static_cast<std::size_t>(it - buckets_.begin());
}

double fraction_for_epoch(const EigFractionSchedule& schedule, long long epoch)
{
    return schedule.buckets()[schedule.bucket_index(epoch)].fraction;
}

ShapeModel fit_shape_model(std::span<const ShapeSample> samples)
{
    if (samples.size() < 2) {
        throw InsufficientDataError("fitting a shape model needs at least 2 samples, got " +
                                    std::to_string(samples.size()));
    }
    const Eigen::Index dim = samples.front().size();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].size() != dim) {
            throw InvalidInputError("sample " + std::to_string(i) + " has dimension " +
                                    std::to_string(samples[i].size()) + ", expected " + std::to_string(dim));
        }
        validate_sample(samples[i]);
    }

    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd data(dim, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        data.col(j) = samples[static_cast<std::size_t>(j)];
    }

    ShapeModel model;
    model.num_training_samples = samples.size();
    model.mean_face = data.rowwise().mean();
    const Eigen::MatrixXd centered = data.colwise() - model.mean_face;
    const Eigen::MatrixXd covariance = (centered * centered.transpose()) / static_cast<double>(n - 1);

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition of the shape covariance did not converge");
    }

    // Eigen returns ascending eigenvalues; keep the top K in descending order.
    const Eigen::Index k = std::min(dim, n - 1);
    model.eigenvalues.resize(k);
    model.eigenvectors.resize(dim, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::Index src = dim - 1 - i;
        double value = solver.eigenvalues()(src);
        if (value < 0.0) {
            if (value < -negative_eigenvalue_tolerance * std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff())) {
                throw NumericalError("covariance has a significantly negative eigenvalue");
            }
            value = 0.0;
        }
        model.eigenvalues(i) = value;
        Eigen::VectorXd column = solver.eigenvectors().col(src);
        Eigen::Index largest = 0;
        column.cwiseAbs().maxCoeff(&largest);
        if (column(largest) < 0.0) {
            column = -column;
        }
        model.eigenvectors.col(i) = column;
    }
    return model;
}

ShapeParams project(const ShapeModel& model, const ShapeSample& face, Eigen::Index num_eigs)
{
    if (num_eigs < 0 || num_eigs > model.num_eigenvectors()) {
        throw InvalidInputError("requested " + std::to_string(num_eigs) + " eigenvectors, model has " +
                                std::to_string(model.num_eigenvectors()));
    }
    if (face.size() != model.dimension()) {
        throw InvalidInputError("face dimension " + std::to_string(face.size()) + " does not match model dimension " +
                                std::to_string(model.dimension()));
    }
    return {model.eigenvectors.leftCols(num_eigs).transpose() * (face - model.mean_face)};
}

ShapeSample reconstruct(const ShapeModel& model, const ShapeParams& params)
{
    const Eigen::Index l = params.b.size();
    if (l > model.num_eigenvectors()) {
        throw InvalidInputError("shape params longer than the model's eigenbasis");
    }
    return model.mean_face + model.eigenvectors.leftCols(l) * params.b;
}

ShapeParams clamp_params(const ShapeParams& params, const Eigen::VectorXd& eigenvalues)
{
    if (params.b.size() != eigenvalues.size()) {
        throw InvalidInputError("shape params and eigenvalues differ in length (" + std::to_string(params.b.size()) +
                                " vs " + std::to_string(eigenvalues.size()) + ")");
    }
    ShapeParams out = params;
    for (Eigen::Index i = 0; i < out.b.size(); ++i) {
        const double limit = 3.0 * std::sqrt(std::max(eigenvalues(i), 0.0));
        out.b(i) = std::clamp(out.b(i), -limit, limit);
    }
    return out;
}

Eigen::Index eigenvector_count(const ShapeModel& model, double fraction)
{
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw InvalidInputError("eigenvector fraction must lie in [0, 1]");
    }
    const auto count = static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(model.num_eigenvectors())));
    return std::clamp<Eigen::Index>(count, 0, model.num_eigenvectors());
}

ShapeSample smooth_face(const ShapeModel& model, const ShapeSample& face, double fraction, bool clamp)
{
    const Eigen::Index l = eigenvector_count(model, fraction);
    ShapeParams params = project(model, face, l);
    if (clamp) {
        params = clamp_params(params, model.eigenvalues.head(l));
    }
    return reconstruct(model, params);
}

ShapeSample smooth_face(const ShapeModel& model, const ShapeSample& face, double fraction)
{
    return smooth_face(model, face, fraction, true);
}

std::string serialize_shape_model(const ShapeModel& model)
{
    std::ostringstream out;
    out << "{\n";
    out << "  \"format\": \"acr-shape-model\",\n";
    out << "  \"version\": " << shape_model_format_version << ",\n";
    out << "  \"D\": " << model.dimension() << ",\n";
    out << "  \"K\": " << model.num_eigenvectors() << ",\n";
    out << "  \"num_training_samples\": " << model.num_training_samples << ",\n";
    out << "  \"mean_face\": ";
    append_array(out, model.mean_face.data(), model.mean_face.size());
    out << ",\n  \"eigenvalues\": ";
    append_array(out, model.eigenvalues.data(), model.eigenvalues.size());
    out << ",\n  \"eigenvectors\": ";
    // Eigen's default storage is column-major, which is the documented layout.
    append_array(out, model.eigenvectors.data(), model.eigenvectors.size());
    out << "\n}\n";
    return out.str();
}

ShapeModel deserialize_shape_model(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, std::string("shape model document is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "acr-shape-model") {
            throw ParseError(0, "not an acr shape model document");
        }
        if (doc.at("version").get<int>() != shape_model_format_version) {
            throw ParseError(0, "unsupported shape model version " + doc.at("version").dump());
        }
        const auto d = doc.at("D").get<Eigen::Index>();
        const auto k = doc.at("K").get<Eigen::Index>();
        ShapeModel model;
        model.num_training_samples = doc.at("num_training_samples").get<std::size_t>();
        model.mean_face = json_to_vector(doc, "mean_face");
        model.eigenvalues = json_to_vector(doc, "eigenvalues");
        const Eigen::VectorXd flat = json_to_vector(doc, "eigenvectors");
        if (model.mean_face.size() != d || model.eigenvalues.size() != k || flat.size() != d * k) {
            throw ParseError(0, "shape model array lengths are inconsistent with D and K");
        }
        model.eigenvectors = Eigen::Map<const Eigen::MatrixXd>(flat.data(), d, k);
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("malformed shape model document: ") + e.what());
    }
}

void save_shape_model(const ShapeModel& model, const std::string& path)
{
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    file << serialize_shape_model(model);
    if (!file) {
        throw IoError("failed writing '" + path + "'");
    }
}

ShapeModel load_shape_model(const std::string& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw IoError("cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return deserialize_shape_model(buffer.str());
}

} // namespace acr
