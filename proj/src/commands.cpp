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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace acr::cli {

namespace {

// Stream ids for derive_seed.
enum : std::uint64_t { stream_base = 1, stream_data = 2, stream_mixing = 3, stream_init = 4, stream_shuffle = 5 };

class ConfigReader
{
public:
    explicit ConfigReader(const KeyValueConfig& kv) : kv_(kv) {}

    template <typename T, typename Parse>
    void read(const std::string& key, T& target, Parse parse)
    {
        known_.insert(key);
        const auto raw = kv_.get(key);
        if (!raw) {
            return;
        }
        try {
            target = parse(*raw);
        } catch (const Error& e) {
            problems_.push_back(key + ": " + e.what());
        }
    }

    void number(const std::string& key, double& target)
    {
        read(key, target, [&](const std::string& s) {
            const auto v = numfmt::parse_double(s);
            if (!v || !std::isfinite(*v)) {
                throw InvalidInputError("'" + s + "' is not a number");
            }
            return *v;
        });
    }

    template <typename Int>
    void integer(const std::string& key, Int& target)
    {
        read(key, target, [&](const std::string& s) {
            const auto v = numfmt::parse_int(s);
            if (!v) {
                throw InvalidInputError("'" + s + "' is not an integer");
            }
            if constexpr (std::is_unsigned_v<Int>) {
                if (*v < 0) {
                    throw InvalidInputError("must be non-negative");
                }
            }
            return static_cast<Int>(*v);
        });
    }

    void boolean(const std::string& key, bool& target)
    {
        read(key, target, [&](const std::string& s) {
            if (s == "true" || s == "1" || s == "yes") {
                return true;
            }
            if (s == "false" || s == "0" || s == "no") {
                return false;
            }
            throw InvalidInputError("'" + s + "' is not a boolean");
        });
    }

    void text(const std::string& key, std::string& target)
    {
        read(key, target, [](const std::string& s) { return s; });
    }

    bool present(const std::string& key) const { return kv_.contains(key); }
    void problem(std::string p) { problems_.push_back(std::move(p)); }

    void finish()
    {
        for (const auto& [key, value] : kv_.values()) {
            if (!known_.contains(key)) {
                problems_.push_back("unknown key '" + key + "'");
            }
        }
        if (!problems_.empty()) {
            std::string msg = "invalid experiment configuration:";
            for (const auto& p : problems_) {
                msg += "\n  - " + p;
            }
            throw ConfigError(msg);
        }
    }

private:
    const KeyValueConfig& kv_;
    std::set<std::string> known_;
    std::vector<std::string> problems_;
};

std::string lambda_dir_name(double lambda)
{
    return "lambda_" + numfmt::exact(lambda);
}

void ensure_dir(const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir + "'");
    }
}

std::string join(const std::string& dir, const std::string& name)
{
    return (std::filesystem::path(dir) / name).string();
}

void write_eval_outputs(const EvalSummary& summary, const std::string& out_dir, const std::string& title,
                        bool svg)
{
    write_text_file(join(out_dir, "summary.csv"), summary_csv(summary));
    write_text_file(join(out_dir, "ced.csv"), ced_csv(summary));
    if (svg) {
        write_text_file(join(out_dir, "ced.svg"), ced_svg(summary, title));
    }
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream)
{
    // splitmix64 finaliser over (master, stream).
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

ExperimentConfig experiment_config_from(const KeyValueConfig& kv)
{
    ExperimentConfig cfg;
    ConfigReader r(kv);

    r.text("label", cfg.label);
    r.integer("seed", cfg.seed);

    auto& t = cfg.train;
    r.integer("epochs", t.epochs);
    r.integer("batch_size", t.batch_size);
    r.number("learning_rate", t.optimizer.learning_rate);
    r.number("beta1", t.optimizer.beta1);
    r.number("beta2", t.optimizer.beta2);
    r.number("epsilon", t.optimizer.epsilon);
    r.number("decay", t.optimizer.decay);
    r.read("decay_mode", t.optimizer.decay_mode, parse_decay_mode);
    r.read("loss", t.loss_kind, parse_loss_kind);
    r.number("lambda", t.lambda);
    r.read("continuity", t.continuity, [](const std::string& s) {
        if (s == "continuous") {
            return ContinuityConstant::continuous;
        }
        if (s == "phi_scaled") {
            return ContinuityConstant::phi_scaled;
        }
        throw InvalidInputError("expected continuous or phi_scaled");
    });
    r.read("schedule", t.schedule, [](const std::string& s) { return EigFractionSchedule::parse(s); });
    r.read("granularity", t.granularity, [](const std::string& s) {
        if (s == "per_coordinate") {
            return HardnessGranularity::per_coordinate;
        }
        if (s == "per_point") {
            return HardnessGranularity::per_point;
        }
        throw InvalidInputError("expected per_coordinate or per_point");
    });

    r.read("normalization", t.normalization, [](const std::string& s) {
        if (s == "inter_ocular") {
            return NormalizationConfig::ibug68_inter_ocular();
        }
        if (s == "inter_pupil") {
            return NormalizationConfig::ibug68_inter_pupil();
        }
        if (s == "cofw29_inter_pupil") {
            return NormalizationConfig::cofw29_inter_pupil();
        }
        throw InvalidInputError("expected inter_ocular, inter_pupil or cofw29_inter_pupil");
    });
    r.integer("left_eye_outer", t.normalization.left_outer);
    r.integer("right_eye_outer", t.normalization.right_outer);

    r.read("architecture", cfg.architecture, parse_architecture);
    r.integer("hidden_dim", cfg.hidden_dim);
    r.read("dataset", cfg.source, [](const std::string& s) {
        if (s == "synthetic") {
            return DataSource::synthetic;
        }
        if (s == "manifest") {
            return DataSource::manifest;
        }
        throw InvalidInputError("expected synthetic or manifest");
    });
    r.text("manifest", cfg.manifest);
    r.boolean("write_svg", cfg.write_svg);

    auto& s = cfg.synthetic;
    r.integer("base_samples", s.base_samples);
    r.integer("train_samples", s.train_samples);
    r.integer("test_samples", s.test_samples);
    r.number("hard_fraction", s.hard_fraction);
    r.number("hard_noise", s.hard_noise);
    r.number("easy_noise", s.easy_noise);
    r.number("occlusion_fraction", s.occlusion_fraction);
    r.number("feature_noise", s.feature_noise);
    r.boolean("identity_mixing", s.identity_mixing);
    s.base_seed = derive_seed(cfg.seed, stream_base);
    s.data_seed = derive_seed(cfg.seed, stream_data);
    s.mixing_seed = derive_seed(cfg.seed, stream_mixing);
    r.integer("base_seed", s.base_seed);
    r.integer("data_seed", s.data_seed);
    r.integer("mixing_seed", s.mixing_seed);
    t.seed = derive_seed(cfg.seed, stream_shuffle);
    r.integer("shuffle_seed", t.seed);

    if (cfg.label.empty()) {
        r.problem("label must not be empty");
    }
    if (cfg.architecture == Architecture::mlp && cfg.hidden_dim < 1) {
        r.problem("hidden_dim must be >= 1");
    }
    if (cfg.source == DataSource::manifest && cfg.manifest.empty()) {
        r.problem("dataset = manifest needs a 'manifest' path");
    }
    if (cfg.source == DataSource::synthetic) {
        if (s.base_samples < 2) {
            r.problem("base_samples must be >= 2");
        }
        if (s.train_samples < 1 || s.test_samples < 1) {
            r.problem("train_samples and test_samples must be >= 1");
        }
        if (!(s.hard_fraction >= 0.0 && s.hard_fraction <= 1.0)) {
            r.problem("hard_fraction must lie in [0, 1]");
        }
        if (!(s.hard_noise >= 0.0 && s.easy_noise >= 0.0 && s.feature_noise >= 0.0)) {
            r.problem("noise scales must be non-negative");
        }
        if (!(s.occlusion_fraction >= 0.0 && s.occlusion_fraction < 1.0)) {
            r.problem("occlusion_fraction must lie in [0, 1)");
        }
    }
    for (auto& p : config_problems(cfg.train)) {
        r.problem(std::move(p));
    }
    r.finish();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path, const Overrides& overrides)
{
    KeyValueConfig kv = KeyValueConfig::load(path);
    if (overrides.seed) {
        kv.set("seed", std::to_string(*overrides.seed));
    }
    if (overrides.loss) {
        kv.set("loss", to_string(*overrides.loss));
    }
    if (overrides.lambda) {
        kv.set("lambda", numfmt::exact(*overrides.lambda));
    }
    return experiment_config_from(kv);
}

ExperimentData build_synthetic_data(const ExperimentConfig& cfg)
{
    if (cfg.source != DataSource::synthetic) {
        throw ConfigError("training and model evaluation need 'dataset = synthetic'; annotation manifests carry no "
                          "input features");
    }
    const auto& s = cfg.synthetic;
    ExperimentData data;
    data.generator = fit_shape_model(generate_base_shapes(s.base_samples, s.base_seed));

    SyntheticDatasetSpec spec;
    spec.noise_scale_per_point = heteroscedastic_scales(static_cast<std::size_t>(data.generator.dimension() / 2),
                                                        s.hard_fraction, s.hard_noise, s.easy_noise, s.data_seed);
    spec.occlusion_fraction = s.occlusion_fraction;
    spec.feature_noise = s.feature_noise;
    spec.identity_mixing = s.identity_mixing;
    spec.mixing_seed = s.mixing_seed;

    spec.num_samples = s.train_samples;
    spec.seed = derive_seed(s.data_seed, 0);
    auto train = generate_synthetic(data.generator, spec);
    data.train = {std::move(train.features), std::move(train.targets)};

    spec.num_samples = s.test_samples;
    spec.seed = derive_seed(s.data_seed, 1);
    auto test = generate_synthetic(data.generator, spec);
    data.test = {std::move(test.features), std::move(test.targets)};
    return data;
}

ShapeModel cmd_fit_model(const ExperimentConfig& cfg, const std::string& output_path, std::ostream& log)
{
    std::vector<ShapeSample> samples;
    if (cfg.source == DataSource::manifest) {
        std::size_t clipped = 0;
        for (const auto& face : load_manifest(cfg.manifest)) {
            auto normalized = normalize(face);
            clipped += normalized.clipped;
            samples.push_back(std::move(normalized.sample));
        }
        if (clipped > 0) {
            log << "warning: " << clipped << " coordinates fell outside the image and were clipped\n";
        }
    } else {
        samples = generate_base_shapes(cfg.synthetic.base_samples, cfg.synthetic.base_seed);
    }
    const ShapeModel model = fit_shape_model(samples);
    save_shape_model(model, output_path);

    log << "D = " << model.dimension() << "\nK = " << model.num_eigenvectors() << "\ntop eigenvalues:";
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(5, model.num_eigenvectors()); ++i) {
        log << ' ' << numfmt::exact(model.eigenvalues(i));
    }
    log << '\n';
    return model;
}

TrainResult cmd_train(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log)
{
    ensure_dir(out_dir);
    const ExperimentData data = build_synthetic_data(cfg);
    const ShapeModel shape_model = fit_shape_model(data.train.targets);
    const RegressorModel init =
        RegressorModel::glorot(cfg.architecture, data.train.features.rows(), cfg.hidden_dim,
                               shape_model.dimension(), derive_seed(cfg.seed, stream_init));

    log << cfg.label << ": training " << to_string(cfg.architecture) << " regressor with "
        << to_string(cfg.train.loss_kind) << " loss";
    if (cfg.train.loss_kind == LossKind::acr) {
        log << " (lambda " << numfmt::exact(cfg.train.lambda) << ")";
    }
    log << ", " << cfg.train.epochs << " epochs, " << data.train.size() << " train / " << data.test.size()
        << " test samples\n";

    TrainResult result;
    result.trace = train(data.train, data.test, init, cfg.train, shape_model);
    result.train_summary = evaluate_model(result.trace.final_model, data.train, cfg.train.normalization);
    result.test_summary = evaluate_model(result.trace.final_model, data.test, cfg.train.normalization);

    write_text_file(join(out_dir, "trace.csv"), trace_csv(result.trace));
    write_text_file(join(out_dir, "model.txt"), serialize_regressor(result.trace.final_model));
    write_eval_outputs(result.test_summary, out_dir, cfg.label, cfg.write_svg);

    log << "test nme " << numfmt::fixed(result.test_summary.nme, 6) << ", fr " << numfmt::fixed(result.test_summary.fr, 4)
        << ", auc " << numfmt::fixed(result.test_summary.auc, 4) << '\n';
    return result;
}

std::vector<AblationRow> cmd_ablate_lambda(const ExperimentConfig& cfg, std::vector<double> lambdas,
                                           const std::string& out_dir, std::ostream& log)
{
    if (lambdas.empty()) {
        throw ConfigError("lambda list is empty");
    }
    for (const double l : lambdas) {
        if (!(l > 0.0) || !std::isfinite(l)) {
            throw ConfigError("lambda values must be positive, got " + numfmt::exact(l));
        }
    }
    std::sort(lambdas.begin(), lambdas.end());
    const auto unique_end = std::unique(lambdas.begin(), lambdas.end());
    if (unique_end != lambdas.end()) {
        log << "warning: dropped " << (lambdas.end() - unique_end) << " duplicate lambda value(s)\n";
        lambdas.erase(unique_end, lambdas.end());
    }

    ensure_dir(out_dir);
    std::vector<AblationRow> rows;
    for (const double lambda : lambdas) {
        ExperimentConfig run = cfg;
        run.train.loss_kind = LossKind::acr;
        run.train.lambda = lambda;
        run.label = cfg.label + "/" + lambda_dir_name(lambda);
        const auto result = cmd_train(run, join(out_dir, lambda_dir_name(lambda)), log);
        rows.push_back({lambda, result.train_summary.nme, result.test_summary.nme});
    }
    write_text_file(join(out_dir, "ablation.csv"), ablation_csv(rows));
    return rows;
}

EvalSummary cmd_eval(const ExperimentConfig& cfg, const std::string& model_path, const std::string& out_dir,
                     std::ostream& log)
{
    std::ifstream file(model_path, std::ios::binary);
    if (!file) {
        throw IoError("cannot open model snapshot '" + model_path + "'");
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    const RegressorModel model = deserialize_regressor(buffer.str());

    const ExperimentData data = build_synthetic_data(cfg);
    if (model.input_dim() != data.test.features.rows() || model.output_dim() != data.generator.dimension()) {
        throw InvalidInputError("model snapshot dimensions do not match the dataset");
    }
    ensure_dir(out_dir);
    const EvalSummary summary = evaluate_model(model, data.test, cfg.train.normalization);
    write_eval_outputs(summary, out_dir, cfg.label, cfg.write_svg);
    log << "nme " << numfmt::fixed(summary.nme, 6) << ", fr " << numfmt::fixed(summary.fr, 4) << ", auc "
        << numfmt::fixed(summary.auc, 4) << '\n';
    return summary;
}

EvalSummary cmd_eval_predictions(const std::string& gt_manifest, const std::string& pred_manifest,
                                 const NormalizationConfig& norm, const std::string& out_dir, std::ostream& log)
{
    const auto gts = load_manifest(gt_manifest);
    const auto preds = load_manifest(pred_manifest);
    std::map<std::string, const AnnotatedFace*> by_id;
    for (const auto& p : preds) {
        by_id[p.image_id] = &p;
    }
    std::vector<EvalRecord> records;
    for (const auto& gt : gts) {
        const auto it = by_id.find(gt.image_id);
        if (it == by_id.end()) {
            throw InvalidInputError("no prediction for image '" + gt.image_id + "'");
        }
        EvalRecord rec;
        rec.gt = normalize(gt).sample;
        rec.pred = normalize(*it->second).sample;
        if (rec.gt.size() != rec.pred.size()) {
            throw InvalidInputError("image '" + gt.image_id + "': prediction has a different landmark count");
        }
        rec.norm_factor = normalization_factor(rec.gt, norm);
        records.push_back(std::move(rec));
    }
    ensure_dir(out_dir);
    const EvalSummary summary = evaluate(records);
    write_eval_outputs(summary, out_dir, "predictions", true);
    log << "nme " << numfmt::fixed(summary.nme, 6) << ", fr " << numfmt::fixed(summary.fr, 4) << ", auc "
        << numfmt::fixed(summary.auc, 4) << '\n';
    return summary;
}

std::string ablation_csv(const std::vector<AblationRow>& rows)
{
    std::string out = "lambda,train_nme,test_nme\n";
    for (const auto& r : rows) {
        out += numfmt::exact(r.lambda) + ',' + numfmt::exact(r.train_nme) + ',' + numfmt::exact(r.test_nme) + '\n';
    }
    return out;
}

std::string ced_svg(const EvalSummary& summary, const std::string& title)
{
    constexpr double width = 480.0;
    constexpr double height = 360.0;
    constexpr double margin = 48.0;
    const double plot_w = width - 2 * margin;
    const double plot_h = height - 2 * margin;

    auto px = [&](double t) { return numfmt::fixed(margin + plot_w * t / failure_threshold, 2); };
    auto py = [&](double f) { return numfmt::fixed(height - margin - plot_h * f, 2); };

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\" viewBox=\"0 0 480 360\">\n";
    out += "<rect width=\"480\" height=\"360\" fill=\"white\"/>\n";
    out += "<text x=\"240\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">CED " + title +
           " (AUC " + numfmt::fixed(summary.auc, 4) + ")</text>\n";
    out += "<line x1=\"" + px(0) + "\" y1=\"" + py(0) + "\" x2=\"" + px(failure_threshold) + "\" y2=\"" + py(0) +
           "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + px(0) + "\" y1=\"" + py(0) + "\" x2=\"" + px(0) + "\" y2=\"" + py(1) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"240\" y=\"350\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">NME</text>\n";
    out += "<text x=\"" + px(0) + "\" y=\"" + numfmt::fixed(height - margin + 16, 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">0</text>\n";
    out += "<text x=\"" + px(failure_threshold) + "\" y=\"" + numfmt::fixed(height - margin + 16, 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">0.1</text>\n";
    out += "<text x=\"" + numfmt::fixed(margin - 8, 2) + "\" y=\"" + py(1) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">1</text>\n";
    out += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < summary.ced.size(); ++k) {
        if (k > 0) {
            out += ' ';
        }
        out += px(summary.ced[k].first) + ',' + py(summary.ced[k].second);
    }
    out += "\"/>\n</svg>\n";
    return out;
}

void write_text_file(const std::string& path, const std::string& content)
{
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    file << content;
    if (!file) {
        throw IoError("failed writing '" + path + "'");
    }
}

} // namespace acr::cli
