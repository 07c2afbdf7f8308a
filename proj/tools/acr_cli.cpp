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
#include "acr/errors.hpp"
#include "acr/numfmt.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct CommonOptions
{
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> loss;
    std::optional<double> lambda;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required)
{
    auto* config = cmd->add_option("--config", opts.config, "Experiment config (key = value per line)");
    if (config_required) {
        config->required();
    }
    cmd->add_option("--out", opts.out, "Output directory")->required();
    cmd->add_option("--seed", opts.seed, "Master seed, overrides the config");
    cmd->add_option("--loss", opts.loss, "Loss kind, overrides the config")->check(CLI::IsMember({"acr", "l2"}));
    cmd->add_option("--lambda", opts.lambda, "ACR lambda, overrides the config")->check(CLI::PositiveNumber);
}

acr::cli::ExperimentConfig resolve(const CommonOptions& opts)
{
    acr::cli::Overrides overrides;
    overrides.seed = opts.seed;
    if (opts.loss) {
        overrides.loss = acr::parse_loss_kind(*opts.loss);
    }
    overrides.lambda = opts.lambda;
    if (opts.config.empty()) {
        // Built-in defaults: the synthetic task.
        acr::KeyValueConfig kv;
        if (overrides.seed) {
            kv.set("seed", std::to_string(*overrides.seed));
        }
        if (overrides.loss) {
            kv.set("loss", acr::to_string(*overrides.loss));
        }
        if (overrides.lambda) {
            kv.set("lambda", acr::numfmt::exact(*overrides.lambda));
        }
        return acr::cli::experiment_config_from(kv);
    }
    return acr::cli::load_experiment_config(opts.config, overrides);
}

std::vector<double> parse_lambda_list(const std::string& text)
{
    std::vector<double> out;
    std::string_view rest = text;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto item = rest.substr(0, comma);
        const auto v = acr::numfmt::parse_double(item);
        if (!v) {
            throw acr::ConfigError("invalid lambda value '" + std::string(item) + "'");
        }
        out.push_back(*v);
        if (comma == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(comma + 1);
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ACR loss experiments: shape models, training, lambda sweeps and face-alignment metrics"};
    app.require_subcommand(1);

    CommonOptions fit_opts;
    auto* fit = app.add_subcommand("fit-model", "Fit a statistical shape model and write shape_model.json");
    add_common(fit, fit_opts, false);

    CommonOptions train_opts;
    auto* train = app.add_subcommand("train", "Train a regressor; writes trace.csv, model.txt, summary.csv, ced.csv");
    add_common(train, train_opts, false);

    CommonOptions ablate_opts;
    std::string lambdas = "1,2,3,4,5,10";
    auto* ablate = app.add_subcommand("ablate-lambda", "Train once per lambda and write ablation.csv");
    add_common(ablate, ablate_opts, false);
    ablate->add_option("--lambdas", lambdas, "Comma-separated lambda values")->capture_default_str();

    CommonOptions eval_opts;
    std::string model_path;
    std::string gt_manifest;
    std::string pred_manifest;
    std::string normalization = "inter_ocular";
    auto* eval = app.add_subcommand("eval", "Evaluate a model snapshot, or predicted .pts files against ground truth");
    add_common(eval, eval_opts, false);
    eval->add_option("--model", model_path, "Regressor snapshot (model.txt)");
    eval->add_option("--gt-manifest", gt_manifest, "Ground-truth manifest (image_id,pts_path,width,height)");
    eval->add_option("--pred-manifest", pred_manifest, "Prediction manifest with matching image ids");
    eval->add_option("--normalization", normalization, "inter_ocular | inter_pupil | cofw29_inter_pupil")
        ->check(CLI::IsMember({"inter_ocular", "inter_pupil", "cofw29_inter_pupil"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit->parsed()) {
            const auto cfg = resolve(fit_opts);
            std::filesystem::create_directories(fit_opts.out);
            acr::cli::cmd_fit_model(cfg, (std::filesystem::path(fit_opts.out) / "shape_model.json").string(),
                                    std::cout);
        } else if (train->parsed()) {
            acr::cli::cmd_train(resolve(train_opts), train_opts.out, std::cout);
        } else if (ablate->parsed()) {
            const auto cfg = resolve(ablate_opts);
            acr::cli::cmd_ablate_lambda(cfg, parse_lambda_list(lambdas), ablate_opts.out, std::cout);
        } else if (eval->parsed()) {
            if (!gt_manifest.empty() || !pred_manifest.empty()) {
                if (gt_manifest.empty() || pred_manifest.empty()) {
                    throw acr::ConfigError("--gt-manifest and --pred-manifest must be given together");
                }
                acr::NormalizationConfig norm = acr::NormalizationConfig::ibug68_inter_ocular();
                if (normalization == "inter_pupil") {
                    norm = acr::NormalizationConfig::ibug68_inter_pupil();
                } else if (normalization == "cofw29_inter_pupil") {
                    norm = acr::NormalizationConfig::cofw29_inter_pupil();
                }
                acr::cli::cmd_eval_predictions(gt_manifest, pred_manifest, norm, eval_opts.out, std::cout);
            } else {
                if (model_path.empty()) {
                    throw acr::ConfigError("eval needs --model, or --gt-manifest with --pred-manifest");
                }
                acr::cli::cmd_eval(resolve(eval_opts), model_path, eval_opts.out, std::cout);
            }
        }
    } catch (const acr::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return acr::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
