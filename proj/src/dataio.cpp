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
#include "acr/dataio.hpp"

#include "acr/errors.hpp"
#include "acr/numfmt.hpp"

#include "Eigen/QR"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace acr {

namespace {

struct Line
{
    std::size_t number;
    std::string_view text; // trimmed
};

std::vector<Line> split_lines(std::string_view text)
{
    std::vector<Line> lines;
    std::size_t number = 1;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto raw = text.substr(0, nl);
        lines.push_back({number++, numfmt::trim(raw)});
        if (nl == std::string_view::npos) {
            break;
        }
        text.remove_prefix(nl + 1);
    }
    return lines;
}

std::string_view header_value(const Line& line, std::string_view key)
{
    if (!line.text.starts_with(key)) {
        throw ParseError(line.number, "expected '" + std::string(key) + "' header, got '" + std::string(line.text) + "'");
    }
    auto rest = line.text.substr(key.size());
    rest = numfmt::trim(rest);
    if (!rest.starts_with(':')) {
        throw ParseError(line.number, "expected ':' after '" + std::string(key) + "'");
    }
    return numfmt::trim(rest.substr(1));
}

std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        const auto start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        if (i > start) {
            out.push_back(s.substr(start, i - start));
        }
    }
    return out;
}

std::string read_file(const std::string& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw IoError("cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

} // namespace

std::vector<Point2> parse_pts(std::string_view text)
{
    auto lines = split_lines(text);
    while (!lines.empty() && lines.back().text.empty()) {
        lines.pop_back();
    }
    if (lines.size() < 3) {
        throw ParseError(lines.empty() ? 1 : lines.back().number, "truncated .pts header");
    }
    const auto version = header_value(lines[0], "version");
    if (!numfmt::parse_double(version)) {
        throw ParseError(lines[0].number, "non-numeric version '" + std::string(version) + "'");
    }
    const auto count_text = header_value(lines[1], "n_points");
    const auto count = numfmt::parse_int(count_text);
    if (!count || *count < 0) {
        throw ParseError(lines[1].number, "invalid n_points '" + std::string(count_text) + "'");
    }
    if (lines[2].text != "{") {
        throw ParseError(lines[2].number, "expected '{'");
    }

    std::vector<Point2> points;
    points.reserve(static_cast<std::size_t>(*count));
    std::size_t i = 3;
    for (; i < lines.size() && lines[i].text != "}"; ++i) {
        const auto& line = lines[i];
        if (line.text.empty()) {
            throw ParseError(line.number, "blank line inside the coordinate block");
        }
        const auto fields = split_ws(line.text);
        if (fields.size() != 2) {
            throw ParseError(line.number, "expected two coordinates, got " + std::to_string(fields.size()) + " fields");
        }
        const auto x = numfmt::parse_double(fields[0]);
        const auto y = numfmt::parse_double(fields[1]);
        if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) {
            throw ParseError(line.number, "non-numeric coordinate '" + std::string(line.text) + "'");
        }
        points.push_back({*x, *y});
    }
    if (i == lines.size()) {
        throw ParseError(lines.back().number, "missing closing '}'");
    }
    if (points.size() != static_cast<std::size_t>(*count)) {
        throw ParseError(lines[i].number, "point count mismatch: n_points is " + std::to_string(*count) + " but " +
                                              std::to_string(points.size()) + " coordinate lines were found");
    }
    if (i + 1 != lines.size()) {
        throw ParseError(lines[i + 1].number, "unexpected content after '}'");
    }
    return points;
}

std::string serialize_pts(const std::vector<Point2>& points)
{
    std::string out = "version: 1\nn_points: " + std::to_string(points.size()) + "\n{\n";
    for (const auto& p : points) {
        out += numfmt::fixed(p.x, 6) + ' ' + numfmt::fixed(p.y, 6) + '\n';
    }
    out += "}\n";
    return out;
}

std::vector<Point2> read_pts_file(const std::string& path)
{
    try {
        return parse_pts(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path + ": " + std::string(e.what()));
    }
}

void write_pts_file(const std::string& path, const std::vector<Point2>& points)
{
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    file << serialize_pts(points);
}

NormalizedFace normalize(const AnnotatedFace& face)
{
    if (!(face.image_width > 0.0) || !(face.image_height > 0.0)) {
        throw InvalidInputError("normalize: image '" + face.image_id + "' has non-positive dimensions");
    }
    if (face.raw_points.empty()) {
        throw InvalidInputError("normalize: image '" + face.image_id + "' has no landmarks");
    }
    NormalizedFace out;
    out.sample.resize(static_cast<Eigen::Index>(2 * face.raw_points.size()));
    auto put = [&](Eigen::Index idx, double value) {
        if (value < 0.0 || value > 1.0) {
            ++out.clipped;
            value = std::clamp(value, 0.0, 1.0);
        }
        out.sample(idx) = value;
    };
    for (std::size_t p = 0; p < face.raw_points.size(); ++p) {
        const auto i = static_cast<Eigen::Index>(p);
        put(2 * i, face.raw_points[p].x / face.image_width);
        put(2 * i + 1, face.raw_points[p].y / face.image_height);
    }
    return out;
}

ShapeSample to_sample(const std::vector<Point2>& points)
{
    ShapeSample s(static_cast<Eigen::Index>(2 * points.size()));
    for (std::size_t p = 0; p < points.size(); ++p) {
        s(static_cast<Eigen::Index>(2 * p)) = points[p].x;
        s(static_cast<Eigen::Index>(2 * p + 1)) = points[p].y;
    }
    return s;
}

std::vector<Point2> to_points(const ShapeSample& sample)
{
    if (sample.size() % 2 != 0) {
        throw InvalidInputError("sample dimension must be even");
    }
    std::vector<Point2> points(static_cast<std::size_t>(sample.size() / 2));
    for (std::size_t p = 0; p < points.size(); ++p) {
        points[p] = {sample(static_cast<Eigen::Index>(2 * p)), sample(static_cast<Eigen::Index>(2 * p + 1))};
    }
    return points;
}

std::vector<ManifestEntry> parse_manifest(std::string_view text)
{
    std::vector<ManifestEntry> entries;
    for (const auto& line : split_lines(text)) {
        if (line.text.empty() || line.text.starts_with('#')) {
            continue;
        }
        std::vector<std::string_view> fields;
        std::string_view rest = line.text;
        while (true) {
            const auto comma = rest.find(',');
            fields.push_back(numfmt::trim(rest.substr(0, comma)));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (fields.size() != 4) {
            throw ParseError(line.number, "manifest records need 4 fields (image_id,pts_path,width,height)");
        }
        const auto w = numfmt::parse_double(fields[2]);
        const auto h = numfmt::parse_double(fields[3]);
        if (!w || !h) {
            throw ParseError(line.number, "non-numeric image size");
        }
        entries.push_back({std::string(fields[0]), std::string(fields[1]), *w, *h});
    }
    return entries;
}

std::vector<AnnotatedFace> load_manifest(const std::string& manifest_path)
{
    std::vector<ManifestEntry> entries;
    try {
        entries = parse_manifest(read_file(manifest_path));
    } catch (const ParseError& e) {
        throw ParseError(e.line(), manifest_path + ": " + std::string(e.what()));
    }
    const auto base = std::filesystem::path(manifest_path).parent_path();
    std::vector<AnnotatedFace> faces;
    faces.reserve(entries.size());
    for (auto& entry : entries) {
        std::filesystem::path pts(entry.pts_path);
        if (pts.is_relative()) {
            pts = base / pts;
        }
        faces.push_back({entry.image_id, read_pts_file(pts.string()), entry.width, entry.height});
    }
    return faces;
}

ShapeSample template_face_68()
{
    using std::numbers::pi;
    std::vector<Point2> pts;
    pts.reserve(68);
    for (int i = 0; i <= 16; ++i) { // jaw, image-left to image-right through the chin
        const double t = pi * i / 16.0;
        pts.push_back({0.5 - 0.36 * std::cos(t), 0.40 + 0.46 * std::sin(t)});
    }
    for (int j = 0; j < 5; ++j) { // brows
        pts.push_back({0.20 + 0.06 * j, 0.30 - 0.04 * std::sin(pi * j / 4.0)});
    }
    for (int j = 0; j < 5; ++j) {
        pts.push_back({0.56 + 0.06 * j, 0.30 - 0.04 * std::sin(pi * j / 4.0)});
    }
    for (int j = 0; j < 4; ++j) { // nose bridge
        pts.push_back({0.5, 0.36 + 0.06 * j});
    }
    const double nostril_y[5] = {0.59, 0.605, 0.61, 0.605, 0.59};
    for (int j = 0; j < 5; ++j) {
        pts.push_back({0.42 + 0.04 * j, nostril_y[j]});
    }
    const Point2 right_eye[6] = {{0.26, 0.40}, {0.30, 0.375}, {0.36, 0.375}, {0.40, 0.40}, {0.36, 0.425}, {0.30, 0.425}};
    const Point2 left_eye[6] = {{0.60, 0.40}, {0.64, 0.375}, {0.70, 0.375}, {0.74, 0.40}, {0.70, 0.425}, {0.64, 0.425}};
    pts.insert(pts.end(), std::begin(right_eye), std::end(right_eye));
    pts.insert(pts.end(), std::begin(left_eye), std::end(left_eye));
    for (int j = 0; j < 12; ++j) { // outer lip
        const double a = pi - pi * j / 6.0;
        pts.push_back({0.5 + 0.13 * std::cos(a), 0.72 - 0.055 * std::sin(a)});
    }
    for (int j = 0; j < 8; ++j) { // inner lip
        const double a = pi - pi * j / 4.0;
        pts.push_back({0.5 + 0.09 * std::cos(a), 0.72 - 0.02 * std::sin(a)});
    }
    return to_sample(pts);
}

std::vector<ShapeSample> generate_base_shapes(std::size_t count, std::uint64_t seed)
{
    const ShapeSample tmpl = template_face_68();
    const Eigen::Index points = tmpl.size() / 2;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto in_range = [](Eigen::Index p, Eigen::Index lo, Eigen::Index hi) { return p >= lo && p <= hi; };

    std::vector<ShapeSample> shapes;
    shapes.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        const double scale = 1.0 + 0.04 * gauss(rng);
        const double angle = 0.06 * gauss(rng);
        const double tx = 0.015 * gauss(rng);
        const double ty = 0.015 * gauss(rng);
        const double mouth_open = 0.025 * gauss(rng);
        const double smile = 0.015 * gauss(rng);
        const double brow_raise = 0.015 * gauss(rng);
        const double yaw = 0.04 * gauss(rng);
        const double jaw_width = 0.03 * gauss(rng);

        ShapeSample s(tmpl.size());
        for (Eigen::Index p = 0; p < points; ++p) {
            double x = tmpl(2 * p);
            double y = tmpl(2 * p + 1);
            // Expression modes.
            if (in_range(p, 5, 11) || in_range(p, 55, 59) || in_range(p, 64, 67)) {
                y += mouth_open * (in_range(p, 5, 11) ? 0.7 : 1.0);
            }
            if (p == 48 || p == 54 || p == 60 || p == 64) {
                y -= smile;
                x += (x < 0.5 ? -1.0 : 1.0) * 0.5 * smile;
            }
            if (in_range(p, 17, 26)) {
                y -= brow_raise;
            }
            if (in_range(p, 0, 16)) {
                x += (x - 0.5) * jaw_width;
            }
            // Out-of-plane rotation approximated by a depth-weighted horizontal shift.
            const double depth = 1.0 - 4.0 * (x - 0.5) * (x - 0.5);
            x += yaw * depth;
            // Similarity transform about the crop centre.
            const double cx = x - 0.5;
            const double cy = y - 0.5;
            x = 0.5 + scale * (std::cos(angle) * cx - std::sin(angle) * cy) + tx;
            y = 0.5 + scale * (std::sin(angle) * cx + std::cos(angle) * cy) + ty;
            x += 0.003 * gauss(rng);
            y += 0.003 * gauss(rng);
            s(2 * p) = std::clamp(x, 0.0, 1.0);
            s(2 * p + 1) = std::clamp(y, 0.0, 1.0);
        }
        shapes.push_back(std::move(s));
    }
    return shapes;
}

std::vector<double> heteroscedastic_scales(std::size_t num_points, double hard_fraction, double hard_scale,
                                           double easy_scale, std::uint64_t seed)
{
    if (!(hard_fraction >= 0.0 && hard_fraction <= 1.0)) {
        throw InvalidInputError("hard point fraction must lie in [0, 1]");
    }
    if (!(hard_scale >= 0.0) || !(easy_scale >= 0.0)) {
        throw InvalidInputError("noise scales must be non-negative");
    }
    std::vector<std::size_t> order(num_points);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto hard = static_cast<std::size_t>(std::llround(hard_fraction * static_cast<double>(num_points)));
    std::vector<double> scales(num_points, easy_scale);
    for (std::size_t i = 0; i < hard; ++i) {
        scales[order[i]] = hard_scale;
    }
    return scales;
}

SyntheticDataset generate_synthetic(const ShapeModel& model, const SyntheticDatasetSpec& spec)
{
    const Eigen::Index dim = model.dimension();
    const Eigen::Index k = model.num_eigenvectors();
    if (dim == 0 || dim % 2 != 0) {
        throw InvalidInputError("synthetic data: shape model is not fitted");
    }
    const Eigen::Index points = dim / 2;
    if (static_cast<Eigen::Index>(spec.noise_scale_per_point.size()) != points) {
        throw InvalidInputError("synthetic data: " + std::to_string(spec.noise_scale_per_point.size()) +
                                " noise scales for a model with " + std::to_string(points) + " points");
    }
    if (std::any_of(spec.noise_scale_per_point.begin(), spec.noise_scale_per_point.end(),
                    [](double s) { return !(s >= 0.0) || !std::isfinite(s); })) {
        throw InvalidInputError("synthetic data: noise scales must be finite and non-negative");
    }
    if (!(spec.occlusion_fraction >= 0.0 && spec.occlusion_fraction < 1.0)) {
        throw InvalidInputError("synthetic data: occlusion fraction must lie in [0, 1)");
    }
    if (!(spec.feature_noise >= 0.0)) {
        throw InvalidInputError("synthetic data: feature noise must be non-negative");
    }

    Eigen::MatrixXd mixing;
    if (!spec.identity_mixing) {
        std::mt19937_64 mix_rng(spec.mixing_seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::MatrixXd gaussian(dim, dim);
        for (Eigen::Index c = 0; c < dim; ++c) {
            for (Eigen::Index r = 0; r < dim; ++r) {
                gaussian(r, c) = gauss(mix_rng);
            }
        }
        // Orthogonal factor of a Gaussian matrix: random, and perfectly conditioned.
        mixing = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian).householderQ();
    }

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::bernoulli_distribution occluded(spec.occlusion_fraction);

    SyntheticDataset out;
    out.features.resize(dim, static_cast<Eigen::Index>(spec.num_samples));
    out.targets.reserve(spec.num_samples);
    out.clean.reserve(spec.num_samples);
    for (std::size_t n = 0; n < spec.num_samples; ++n) {
        Eigen::VectorXd b(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            b(i) = 2.0 * std::sqrt(model.eigenvalues(i)) * unit(rng);
        }
        const ShapeSample clean = model.mean_face + model.eigenvectors * b;

        ShapeSample target = clean;
        for (Eigen::Index p = 0; p < points; ++p) {
            const double sigma = spec.noise_scale_per_point[static_cast<std::size_t>(p)];
            target(2 * p) += sigma * gauss(rng);
            target(2 * p + 1) += sigma * gauss(rng);
        }

        ShapeSample visible = target;
        if (spec.occlusion_fraction > 0.0) {
            for (Eigen::Index p = 0; p < points; ++p) {
                if (occluded(rng)) {
                    visible.segment<2>(2 * p) = model.mean_face.segment<2>(2 * p);
                }
            }
        }

        // Random mixing acts on the deviation from the mean so features stay centred.
        Eigen::VectorXd feat = spec.identity_mixing ? visible : Eigen::VectorXd(mixing * (visible - model.mean_face));
        if (spec.feature_noise > 0.0) {
            for (Eigen::Index i = 0; i < dim; ++i) {
                feat(i) += spec.feature_noise * gauss(rng);
            }
        }
        out.features.col(static_cast<Eigen::Index>(n)) = feat;
        out.targets.push_back(std::move(target));
        out.clean.push_back(clean);
    }
    return out;
}

} // namespace acr
