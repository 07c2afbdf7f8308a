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
#include "acr/hardness.hpp"
#include "acr/loss.hpp"
#include "acr/regressor.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace {

std::string fixture(const std::string& name)
{
    return std::string(ACR_FIXTURE_DIR) + "/" + name;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool same_points(const std::vector<acr::Point2>& a, const std::vector<acr::Point2>& b)
{
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].x != b[i].x || a[i].y != b[i].y) {
            return false;
        }
    }
    return true;
}

std::size_t parse_error_line(const std::string& text)
{
    try {
        acr::parse_pts(text);
    } catch (const acr::ParseError& e) {
        return e.line();
    }
    return 0;
}

} // namespace

TEST_CASE("parse a well-formed pts document")
{
    const auto pts = acr::parse_pts("version: 1\nn_points: 2\n{\n10.5 20.0\n30.0 40.5\n}");
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].x == 10.5);
    CHECK(pts[0].y == 20.0);
    CHECK(pts[1].x == 30.0);
    CHECK(pts[1].y == 40.5);
}

TEST_CASE("pts fixtures")
{
    const auto reference = acr::read_pts_file(fixture("well_formed.pts"));
    REQUIRE(reference.size() == 2);
    CHECK(same_points(acr::read_pts_file(fixture("crlf.pts")), reference));
    CHECK(same_points(acr::read_pts_file(fixture("trailing_whitespace.pts")), reference));
    try {
        acr::read_pts_file(fixture("count_mismatch.pts"));
        FAIL("count mismatch accepted");
    } catch (const acr::ParseError& e) {
        CHECK(std::string(e.what()).find("count mismatch") != std::string::npos);
        CHECK(e.line() == 71);
    }
    CHECK_THROWS_AS(acr::read_pts_file(fixture("does_not_exist.pts")), acr::IoError);
}

TEST_CASE("malformed pts documents name the offending line")
{
    CHECK(parse_error_line("version: 1\nn_points: 2\n{\n10.5 20.0\n30.0 abc\n}\n") == 5);
    CHECK(parse_error_line("version 1\nn_points: 2\n{\n1 2\n3 4\n}\n") == 1);
    CHECK(parse_error_line("version: 1\nn_points: two\n{\n1 2\n3 4\n}\n") == 2);
    CHECK(parse_error_line("version: 1\nn_points: 2\n[\n1 2\n3 4\n}\n") == 3);
    CHECK(parse_error_line("version: 1\nn_points: 2\n{\n1 2 3\n3 4\n}\n") == 4);
    CHECK(parse_error_line("version: 1\nn_points: 2\n{\n1 2\n3 4\n") == 5);
    CHECK(parse_error_line("version: 1\nn_points: 1\n{\n1 2\n3 4\n}\n") == 6);
    CHECK(parse_error_line("version: 1\nn_points: 1\n{\n1 2\n}\nextra\n") == 6);
    CHECK(parse_error_line("") == 1);
}

TEST_CASE("formatting perturbations do not change the parse")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coord(0.0, 500.0);
    std::uniform_int_distribution<int> pick(0, 3);
    const std::vector<std::string> pads = {"", " ", "\t", "  \t "};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<acr::Point2> points(1 + trial % 9);
        for (auto& p : points) {
            p = {coord(rng), coord(rng)};
        }
        const std::string lf = acr::serialize_pts(points);
        const auto expected = acr::parse_pts(lf);

        std::string perturbed;
        std::istringstream lines(lf);
        std::string line;
        const bool crlf = trial % 2 == 0;
        while (std::getline(lines, line)) {
            std::string body = line;
            const auto space = body.find(' ');
            if (space != std::string::npos && !body.starts_with("version") && !body.starts_with("n_points")) {
                body.replace(space, 1, " " + pads[static_cast<std::size_t>(pick(rng))]);
            }
            perturbed += pads[static_cast<std::size_t>(pick(rng))] + body + pads[static_cast<std::size_t>(pick(rng))];
            perturbed += crlf ? "\r\n" : "\n";
        }
        for (int k = 0; k < trial % 4; ++k) {
            perturbed += crlf ? "\r\n" : "\n";
        }
        CHECK(same_points(acr::parse_pts(perturbed), expected));
    }
}

TEST_CASE("serialize then parse round-trips at 6 decimals")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> coord(-50.0, 1000.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<acr::Point2> points(68);
        for (auto& p : points) {
            p = {std::round(coord(rng) * 1e6) / 1e6, std::round(coord(rng) * 1e6) / 1e6};
        }
        const auto text = acr::serialize_pts(points);
        const auto parsed = acr::parse_pts(text);
        REQUIRE(parsed.size() == points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            CHECK(std::abs(parsed[i].x - points[i].x) < 5e-7);
            CHECK(std::abs(parsed[i].y - points[i].y) < 5e-7);
        }
        CHECK(acr::serialize_pts(parsed) == text);
    }
    CHECK(acr::serialize_pts({{10.5, 20.0}}) == "version: 1\nn_points: 1\n{\n10.500000 20.000000\n}\n");
}

TEST_CASE("pts files are written byte-exactly")
{
    const auto dir = std::filesystem::temp_directory_path() / "acr_test_dataio";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "out.pts").string();
    acr::write_pts_file(path, {{1.0, 2.0}, {3.25, -0.0}});
    CHECK(slurp(path) == "version: 1\nn_points: 2\n{\n1.000000 2.000000\n3.250000 0.000000\n}\n");
    std::filesystem::remove_all(dir);
}

TEST_CASE("normalize to the unit square")
{
    acr::AnnotatedFace face{"img", {{112.0, 112.0}, {224.0, 0.0}}, 224.0, 224.0};
    auto n = acr::normalize(face);
    CHECK(n.sample(0) == 0.5);
    CHECK(n.sample(1) == 0.5);
    CHECK(n.sample(2) == 1.0);
    CHECK(n.sample(3) == 0.0);
    CHECK(n.clipped == 0);

    face.raw_points = {{230.0, -3.0}};
    n = acr::normalize(face);
    CHECK(n.sample(0) == 1.0);
    CHECK(n.sample(1) == 0.0);
    CHECK(n.clipped == 2);

    face.image_width = 0.0;
    CHECK_THROWS_AS(acr::normalize(face), acr::InvalidInputError);

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> wild(-400.0, 800.0);
    for (int t = 0; t < 100; ++t) {
        acr::AnnotatedFace f{"r", std::vector<acr::Point2>(10), 224.0, 180.0};
        for (auto& p : f.raw_points) {
            p = {wild(rng), wild(rng)};
        }
        const auto out = acr::normalize(f);
        CHECK(out.sample.minCoeff() >= 0.0);
        CHECK(out.sample.maxCoeff() <= 1.0);
    }
}

TEST_CASE("manifests")
{
    const auto entries = acr::parse_manifest("# comment\nimg1,a.pts,224,224\n\r\nimg2, b.pts ,640,480\r\n");
    REQUIRE(entries.size() == 2);
    CHECK(entries[1].image_id == "img2");
    CHECK(entries[1].pts_path == "b.pts");
    CHECK(entries[1].width == 640.0);
    CHECK(entries[1].height == 480.0);
    CHECK_THROWS_AS(acr::parse_manifest("img1,a.pts,224\n"), acr::ParseError);
    CHECK_THROWS_AS(acr::parse_manifest("img1,a.pts,224,wide\n"), acr::ParseError);

    const auto faces = acr::load_manifest(fixture("two_faces.csv"));
    REQUIRE(faces.size() == 2);
    CHECK(faces[0].image_id == "face_a");
    CHECK(faces[1].raw_points[1].x == 179.2);
    CHECK(acr::load_manifest(fixture("empty.csv")).empty());
}

TEST_CASE("template face")
{
    const auto face = acr::template_face_68();
    REQUIRE(face.size() == 136);
    CHECK(face.minCoeff() > 0.0);
    CHECK(face.maxCoeff() < 1.0);
    CHECK(face(72) < face(90)); // left outer eye corner left of the right one
}

TEST_CASE("synthetic generation")
{
    const auto model = acr::fit_shape_model(acr::generate_base_shapes(300, 11));
    acr::SyntheticDatasetSpec spec;
    spec.num_samples = 50;
    spec.noise_scale_per_point = acr::heteroscedastic_scales(68, 0.2, 0.02, 0.002, 5);
    spec.seed = 9;
    spec.feature_noise = 0.001;
    spec.occlusion_fraction = 0.1;

    SUBCASE("same seed gives bit-identical datasets")
    {
        const auto a = acr::generate_synthetic(model, spec);
        const auto b = acr::generate_synthetic(model, spec);
        CHECK(a.features == b.features);
        for (std::size_t i = 0; i < a.targets.size(); ++i) {
            CHECK(a.targets[i] == b.targets[i]);
            CHECK(a.clean[i] == b.clean[i]);
        }
        spec.seed = 10;
        const auto c = acr::generate_synthetic(model, spec);
        CHECK(c.features != a.features);
    }
    SUBCASE("noise-free identity mixing reproduces the targets")
    {
        spec.noise_scale_per_point.assign(68, 0.0);
        spec.feature_noise = 0.0;
        spec.occlusion_fraction = 0.0;
        spec.identity_mixing = true;
        const auto data = acr::generate_synthetic(model, spec);
        for (std::size_t i = 0; i < data.targets.size(); ++i) {
            CHECK(data.features.col(static_cast<Eigen::Index>(i)) == data.targets[i]);
            CHECK(data.targets[i] == data.clean[i]);
        }
        // The identity linear regressor is exact.
        acr::RegressorModel identity(acr::Architecture::linear, 136, 0, 136);
        identity.w2() = Eigen::MatrixXd::Identity(136, 136);
        const auto preds = acr::forward_batch(identity, data.features);
        std::vector<acr::ShapeSample> pred_vec;
        for (Eigen::Index c = 0; c < preds.cols(); ++c) {
            pred_vec.push_back(preds.col(c));
        }
        CHECK(acr::l2_loss_batch(data.targets, pred_vec).total == 0.0);
    }
    SUBCASE("samples stay within two standard deviations along each mode")
    {
        spec.noise_scale_per_point.assign(68, 0.0);
        const auto data = acr::generate_synthetic(model, spec);
        for (const auto& clean : data.clean) {
            const auto b = acr::project(model, clean, model.num_eigenvectors()).b;
            for (Eigen::Index i = 0; i < b.size(); ++i) {
                CHECK(std::abs(b(i)) <= 2.0 * std::sqrt(model.eigenvalues(i)) + 1e-9);
            }
        }
    }
    SUBCASE("errors")
    {
        spec.noise_scale_per_point.resize(10);
        CHECK_THROWS_AS(acr::generate_synthetic(model, spec), acr::InvalidInputError);
        spec.noise_scale_per_point.assign(68, 0.0);
        spec.occlusion_fraction = 1.0;
        CHECK_THROWS_AS(acr::generate_synthetic(model, spec), acr::InvalidInputError);
    }
}

TEST_CASE("noisy points receive higher hardness on average")
{
    const auto generator = acr::fit_shape_model(acr::generate_base_shapes(400, 21));
    acr::SyntheticDatasetSpec spec;
    spec.num_samples = 1000;
    spec.noise_scale_per_point = acr::heteroscedastic_scales(68, 0.2, 0.05, 0.005, 8);
    spec.seed = 33;
    const auto data = acr::generate_synthetic(generator, spec);
    const auto& model = generator;

    double hard_sum = 0.0;
    double easy_sum = 0.0;
    std::size_t hard_count = 0;
    std::size_t easy_count = 0;
    for (const auto& target : data.targets) {
        const auto phi = acr::hardness_weights(target, acr::smooth_face(model, target, 0.8)).phi;
        for (std::size_t p = 0; p < 68; ++p) {
            const double value = phi(static_cast<Eigen::Index>(2 * p)) + phi(static_cast<Eigen::Index>(2 * p + 1));
            if (spec.noise_scale_per_point[p] > 0.01) {
                hard_sum += value;
                hard_count += 2;
            } else {
                easy_sum += value;
                easy_count += 2;
            }
        }
    }
    CHECK(hard_count == 1000 * 2 * 14);
    const double hard_mean = hard_sum / static_cast<double>(hard_count);
    const double easy_mean = easy_sum / static_cast<double>(easy_count);
    MESSAGE("mean phi on noisy points " << hard_mean << ", on clean points " << easy_mean);
    CHECK(hard_mean > easy_mean);
}
