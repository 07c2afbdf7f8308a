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
#include "acr/commands.hpp"
#include "acr/config.hpp"
#include "acr/dataio.hpp"
#include "acr/errors.hpp"
#include "acr/numfmt.hpp"

#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using acr::cli::ExperimentConfig;

namespace {

std::string fixture(const std::string& name)
{
    return std::string(ACR_FIXTURE_DIR) + "/" + name;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Fresh scratch directory per test case.
fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("acr_test_commands_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// A quick desk-scale experiment.
const char* small_config = "label = small\n"
                           "seed = 3\n"
                           "epochs = 6\n"
                           "batch_size = 16\n"
                           "hidden_dim = 8\n"
                           "base_samples = 60\n"
                           "train_samples = 48\n"
                           "test_samples = 20\n";

ExperimentConfig small()
{
    return acr::cli::experiment_config_from(acr::KeyValueConfig::parse(small_config));
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string("\"") + ACR_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        out.push_back(line);
    }
    return out;
}

} // namespace

TEST_CASE("key-value config files")
{
    const auto kv = acr::KeyValueConfig::parse("# experiment\n  epochs = 12 \n\nloss=l2  # trailing\r\nlabel = a b\n");
    CHECK(kv.get("epochs") == "12");
    CHECK(kv.get("loss") == "l2");
    CHECK(kv.get("label") == "a b");
    CHECK_FALSE(kv.get("lambda").has_value());
    try {
        acr::KeyValueConfig::parse("epochs = 1\nnot a pair\n");
        FAIL("accepted a line without '='");
    } catch (const acr::ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(acr::KeyValueConfig::parse("a = 1\na = 2\n"), acr::ParseError);
    CHECK_THROWS_AS(acr::KeyValueConfig::load("/nonexistent/acr.cfg"), acr::IoError);
}

TEST_CASE("experiment configuration")
{
    SUBCASE("defaults")
    {
        const auto cfg = acr::cli::experiment_config_from({});
        CHECK(cfg.train.epochs == 150);
        CHECK(cfg.train.optimizer.learning_rate == 1e-3);
        CHECK(cfg.train.optimizer.beta1 == 0.9);
        CHECK(cfg.train.optimizer.beta2 == 0.999);
        CHECK(cfg.train.optimizer.decay == 1e-5);
        CHECK(cfg.train.lambda == 4.0);
        CHECK(cfg.train.loss_kind == acr::LossKind::acr);
        CHECK(cfg.train.schedule.to_string() == acr::EigFractionSchedule::standard().to_string());
        CHECK(cfg.synthetic.hard_fraction == 0.2);
        CHECK(cfg.synthetic.train_samples >= 500);
        CHECK(cfg.synthetic.test_samples >= 200);
    }
    SUBCASE("values are read")
    {
        const auto cfg = acr::cli::experiment_config_from(acr::KeyValueConfig::parse(
            "epochs = 7\nloss = l2\nlambda = 2.5\nschedule = 3:0.5,9:0.9\ndecay_mode = lr_exponential\n"
            "architecture = linear\ngranularity = per_point\nnormalization = inter_pupil\nwrite_svg = false\n"));
        CHECK(cfg.train.epochs == 7);
        CHECK(cfg.train.loss_kind == acr::LossKind::l2);
        CHECK(cfg.train.lambda == 2.5);
        CHECK(cfg.train.schedule.buckets().size() == 2);
        CHECK(cfg.train.optimizer.decay_mode == acr::DecayMode::lr_exponential);
        CHECK(cfg.architecture == acr::Architecture::linear);
        CHECK(cfg.train.granularity == acr::HardnessGranularity::per_point);
        CHECK(cfg.train.normalization.mode == acr::NormalizationConfig::Mode::inter_pupil);
        CHECK_FALSE(cfg.write_svg);
    }
    SUBCASE("every problem is reported before any work")
    {
        try {
            acr::cli::experiment_config_from(
                acr::KeyValueConfig::parse("epochs = 0\nlearning_rate = fast\ncolour = blue\nlambda = -1\n"));
            FAIL("invalid config accepted");
        } catch (const acr::ConfigError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("epochs") != std::string::npos);
            CHECK(msg.find("learning_rate") != std::string::npos);
            CHECK(msg.find("colour") != std::string::npos);
            CHECK(msg.find("lambda") != std::string::npos);
        }
    }
    SUBCASE("sub-seeds follow the master seed unless pinned")
    {
        const auto a = acr::cli::experiment_config_from(acr::KeyValueConfig::parse("seed = 1\n"));
        const auto b = acr::cli::experiment_config_from(acr::KeyValueConfig::parse("seed = 2\n"));
        CHECK(a.synthetic.data_seed != b.synthetic.data_seed);
        CHECK(a.train.seed != b.train.seed);
        const auto c = acr::cli::experiment_config_from(acr::KeyValueConfig::parse("seed = 2\ndata_seed = 5\n"));
        CHECK(c.synthetic.data_seed == 5);
        CHECK(acr::cli::derive_seed(1, 2) != acr::cli::derive_seed(1, 3));
        CHECK(acr::cli::derive_seed(1, 2) == acr::cli::derive_seed(1, 2));
    }
    SUBCASE("command-line overrides win")
    {
        const auto dir = scratch("overrides");
        acr::cli::write_text_file((dir / "exp.cfg").string(), "seed = 1\nloss = acr\nlambda = 4\n");
        acr::cli::Overrides o;
        o.seed = 9;
        o.loss = acr::LossKind::l2;
        o.lambda = 1.5;
        const auto cfg = acr::cli::load_experiment_config((dir / "exp.cfg").string(), o);
        CHECK(cfg.seed == 9);
        CHECK(cfg.train.loss_kind == acr::LossKind::l2);
        CHECK(cfg.train.lambda == 1.5);
        fs::remove_all(dir);
    }
}

TEST_CASE("fit-model")
{
    const auto dir = scratch("fit");
    std::ostringstream log;

    SUBCASE("two-sample manifest gives one non-zero eigenvalue")
    {
        auto cfg = acr::cli::experiment_config_from(
            acr::KeyValueConfig::parse("dataset = manifest\nmanifest = " + fixture("two_faces.csv") + "\n"));
        const auto model = acr::cli::cmd_fit_model(cfg, (dir / "m.json").string(), log);
        CHECK(model.dimension() == 4);
        REQUIRE(model.num_eigenvectors() == 1);
        CHECK(model.eigenvalues(0) > 0.0);
        CHECK(log.str().find("D = 4") != std::string::npos);
        CHECK(log.str().find("K = 1") != std::string::npos);
        CHECK(acr::load_shape_model((dir / "m.json").string()).eigenvalues == model.eigenvalues);
    }
    SUBCASE("empty manifest is insufficient data")
    {
        auto cfg = acr::cli::experiment_config_from(
            acr::KeyValueConfig::parse("dataset = manifest\nmanifest = " + fixture("empty.csv") + "\n"));
        CHECK_THROWS_AS(acr::cli::cmd_fit_model(cfg, (dir / "m.json").string(), log), acr::InsufficientDataError);
    }
    SUBCASE("synthetic shapes with seed 7 are byte-identical across runs")
    {
        auto cfg = acr::cli::experiment_config_from(acr::KeyValueConfig::parse("seed = 7\nbase_samples = 50\n"));
        acr::cli::cmd_fit_model(cfg, (dir / "a.json").string(), log);
        acr::cli::cmd_fit_model(cfg, (dir / "b.json").string(), log);
        CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
        CHECK(log.str().find("top eigenvalues:") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("train")
{
    const auto dir = scratch("train");
    std::ostringstream log;
    const auto cfg = small();
    const auto result = acr::cli::cmd_train(cfg, (dir / "a").string(), log);
    CHECK(result.trace.epochs.size() == 6);
    for (const char* name : {"trace.csv", "model.txt", "summary.csv", "ced.csv", "ced.svg"}) {
        CHECK(fs::exists(dir / "a" / name));
    }

    SUBCASE("reruns are byte-identical")
    {
        acr::cli::cmd_train(cfg, (dir / "b").string(), log);
        for (const char* name : {"trace.csv", "model.txt", "summary.csv", "ced.csv", "ced.svg"}) {
            CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
        }
    }
    SUBCASE("output files are well formed")
    {
        const auto trace = lines_of(slurp(dir / "a" / "trace.csv"));
        CHECK(trace.front() == "epoch,train_loss,eval_nme,active_fraction");
        CHECK(trace.size() == 7);
        const auto summary = lines_of(slurp(dir / "a" / "summary.csv"));
        REQUIRE(summary.size() == 2);
        CHECK(summary[0] == "nme,fr,auc");
        const auto ced = lines_of(slurp(dir / "a" / "ced.csv"));
        REQUIRE(ced.size() == 1001);
        CHECK(ced[0] == "threshold,fraction");
        double prev_t = -1.0;
        double prev_f = 0.0;
        for (std::size_t i = 1; i < ced.size(); ++i) {
            const auto comma = ced[i].find(',');
            const auto t = acr::numfmt::parse_double(ced[i].substr(0, comma));
            const auto f = acr::numfmt::parse_double(ced[i].substr(comma + 1));
            REQUIRE(t);
            REQUIRE(f);
            CHECK(*t > prev_t);
            CHECK(*f >= prev_f);
            prev_t = *t;
            prev_f = *f;
        }
        CHECK(acr::numfmt::parse_double(ced[1].substr(0, ced[1].find(','))) == 0.0);
        CHECK(prev_t == 0.1);
        CHECK(slurp(dir / "a" / "ced.svg").find("<svg") != std::string::npos);
    }
    SUBCASE("acr and l2 runs on the same seed are comparable")
    {
        auto l2 = cfg;
        l2.train.loss_kind = acr::LossKind::l2;
        const auto other = acr::cli::cmd_train(l2, (dir / "l2").string(), log);
        CHECK(std::isfinite(other.test_summary.nme));
        CHECK(lines_of(slurp(dir / "l2" / "summary.csv"))[0] == "nme,fr,auc");
        CHECK(other.trace.epochs.back().active_fraction == 0.0);
    }
    SUBCASE("manifest datasets cannot be trained on")
    {
        auto bad = cfg;
        bad.source = acr::cli::DataSource::manifest;
        bad.manifest = fixture("two_faces.csv");
        CHECK_THROWS_AS(acr::cli::cmd_train(bad, (dir / "c").string(), log), acr::ConfigError);
    }
    fs::remove_all(dir);
}

TEST_CASE("ablate-lambda")
{
    const auto dir = scratch("ablate");
    std::ostringstream log;
    auto cfg = small();
    cfg.train.epochs = 2;

    SUBCASE("sorted and deduplicated with a warning")
    {
        const auto rows = acr::cli::cmd_ablate_lambda(cfg, {4.0, 1.0, 4.0}, dir.string(), log);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].lambda == 1.0);
        CHECK(rows[1].lambda == 4.0);
        CHECK(log.str().find("warning: dropped 1 duplicate") != std::string::npos);
        const auto csv = lines_of(slurp(dir / "ablation.csv"));
        REQUIRE(csv.size() == 3);
        CHECK(csv[0] == "lambda,train_nme,test_nme");
        CHECK(csv[1].rfind("1,", 0) == 0);
        CHECK(fs::exists(dir / "lambda_4" / "trace.csv"));
    }
    SUBCASE("single lambda")
    {
        CHECK(acr::cli::cmd_ablate_lambda(cfg, {2.0}, dir.string(), log).size() == 1);
    }
    SUBCASE("non-positive lambda")
    {
        CHECK_THROWS_AS(acr::cli::cmd_ablate_lambda(cfg, {1.0, 0.0}, dir.string(), log), acr::ConfigError);
        CHECK_THROWS_AS(acr::cli::cmd_ablate_lambda(cfg, {}, dir.string(), log), acr::ConfigError);
    }
    fs::remove_all(dir);
}

TEST_CASE("eval")
{
    const auto dir = scratch("eval");
    std::ostringstream log;

    SUBCASE("a perfect model scores nme 0, fr 0, auc 1")
    {
        auto cfg = small();
        cfg.synthetic.identity_mixing = true;
        cfg.synthetic.hard_noise = 0.0;
        cfg.synthetic.easy_noise = 0.0;
        acr::RegressorModel identity(acr::Architecture::linear, 136, 0, 136);
        identity.w2() = Eigen::MatrixXd::Identity(136, 136);
        acr::cli::write_text_file((dir / "model.txt").string(), acr::serialize_regressor(identity));
        const auto s = acr::cli::cmd_eval(cfg, (dir / "model.txt").string(), (dir / "out").string(), log);
        CHECK(s.nme == 0.0);
        CHECK(s.fr == 0.0);
        CHECK(s.auc == 1.0);
        CHECK(lines_of(slurp(dir / "out" / "ced.csv")).size() == 1001);
    }
    SUBCASE("dimension mismatch")
    {
        const auto model = acr::RegressorModel::glorot(acr::Architecture::linear, 10, 0, 10, 1);
        acr::cli::write_text_file((dir / "model.txt").string(), acr::serialize_regressor(model));
        CHECK_THROWS_AS(acr::cli::cmd_eval(small(), (dir / "model.txt").string(), (dir / "out").string(), log),
                        acr::InvalidInputError);
    }
    SUBCASE("predicted pts files against ground truth")
    {
        auto norm = acr::NormalizationConfig::ibug68_inter_ocular();
        norm.left_outer = 0;
        norm.right_outer = 1;
        const auto s = acr::cli::cmd_eval_predictions(fixture("two_faces.csv"), fixture("two_faces.csv"), norm,
                                                      (dir / "out").string(), log);
        CHECK(s.nme == 0.0);
        CHECK(s.auc == 1.0);
    }
    fs::remove_all(dir);
}

TEST_CASE("command-line exit codes")
{
    const auto dir = scratch("cli");
    const std::string out = (dir / "out").string();
    const auto cfg_path = [&](const std::string& name, const std::string& content) {
        const auto p = (dir / name).string();
        acr::cli::write_text_file(p, content);
        return p;
    };

    CHECK(run_cli("") == 2);
    CHECK(run_cli("train") == 2);
    CHECK(run_cli("train --out " + out + " --loss huber") == 2);
    CHECK(run_cli("train --config " + cfg_path("zero.cfg", "epochs = 0\n") + " --out " + out) == 2);
    CHECK(run_cli("train --config " + cfg_path("unknown.cfg", "epoch = 3\n") + " --out " + out) == 2);

    // A manifest pointing at a malformed annotation.
    acr::cli::write_text_file((dir / "bad.pts").string(), "version: 1\nn_points: 2\n{\n1 2\n}\n");
    acr::cli::write_text_file((dir / "bad.csv").string(), "img,bad.pts,100,100\n");
    const auto bad_manifest =
        cfg_path("bad_manifest.cfg", "dataset = manifest\nmanifest = " + (dir / "bad.csv").string() + "\n");
    CHECK(run_cli("fit-model --config " + bad_manifest + " --out " + out) == 3);

    const auto diverge = cfg_path("diverge.cfg", std::string(small_config) + "learning_rate = 1e300\n");
    CHECK(run_cli("train --config " + diverge + " --out " + out) == 4);

    const auto empty =
        cfg_path("empty.cfg", "dataset = manifest\nmanifest = " + fixture("empty.csv") + "\n");
    CHECK(run_cli("fit-model --config " + empty + " --out " + out) != 0);

    const auto ok = cfg_path("ok.cfg", small_config);
    CHECK(run_cli("fit-model --config " + ok + " --out " + out + " --seed 7") == 0);
    CHECK(fs::exists(dir / "out" / "shape_model.json"));
    CHECK(run_cli("train --config " + ok + " --out " + out + " --loss l2") == 0);
    CHECK(fs::exists(dir / "out" / "summary.csv"));
    CHECK(run_cli("eval --config " + ok + " --out " + out + "/eval --model " + out + "/model.txt") == 0);
    CHECK(slurp(dir / "out" / "eval" / "summary.csv") == slurp(dir / "out" / "summary.csv"));
    CHECK(run_cli("eval --out " + out + " --model " + (dir / "missing.txt").string()) == 6);
    fs::remove_all(dir);
}
