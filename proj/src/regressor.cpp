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
#include "acr/regressor.hpp"

#include "acr/errors.hpp"
#include "acr/numfmt.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace acr {

namespace {

constexpr const char* snapshot_magic = "acr-regressor";
constexpr int snapshot_version = 1;

void check_finite(const Eigen::MatrixXd& m, const char* what)
{
    if (!m.allFinite()) {
        throw NumericalError(std::string("backward: non-finite ") + what);
    }
}

} // namespace

const char* to_string(Architecture arch)
{
    return arch == Architecture::linear ? "linear" : "mlp";
}

Architecture parse_architecture(const std::string& text)
{
    if (text == "linear") {
        return Architecture::linear;
    }
    if (text == "mlp") {
        return Architecture::mlp;
    }
    throw InvalidInputError("unknown architecture '" + text + "' (expected linear or mlp)");
}

const char* to_string(LossKind kind)
{
    return kind == LossKind::acr ? "acr" : "l2";
}

LossKind parse_loss_kind(const std::string& text)
{
    if (text == "acr") {
        return LossKind::acr;
    }
    if (text == "l2") {
        return LossKind::l2;
    }
    throw InvalidInputError("unknown loss '" + text + "' (expected acr or l2)");
}

const char* to_string(DecayMode mode)
{
    switch (mode) {
    case DecayMode::none:
        return "none";
    case DecayMode::weight_decay:
        return "weight";
    case DecayMode::lr_exponential:
        return "lr_exponential";
    case DecayMode::lr_inverse_time:
        return "lr_inverse_time";
    }
    return "none";
}

DecayMode parse_decay_mode(const std::string& text)
{
    for (const auto mode :
         {DecayMode::none, DecayMode::weight_decay, DecayMode::lr_exponential, DecayMode::lr_inverse_time}) {
        if (text == to_string(mode)) {
            return mode;
        }
    }
    throw InvalidInputError("unknown decay mode '" + text + "'");
}

RegressorModel::RegressorModel(Architecture arch, Eigen::Index input_dim, Eigen::Index hidden_dim,
                               Eigen::Index output_dim)
    : arch_(arch), input_dim_(input_dim), hidden_dim_(arch == Architecture::mlp ? hidden_dim : 0),
      output_dim_(output_dim)
{
    if (input_dim <= 0 || output_dim <= 0 || (arch == Architecture::mlp && hidden_dim <= 0)) {
        throw InvalidInputError("regressor dimensions must be positive");
    }
    params_ = Eigen::VectorXd::Zero(w1_size() + b1_size() + output_dim_ * last_layer_in() + output_dim_);
}

RegressorModel RegressorModel::glorot(Architecture arch, Eigen::Index input_dim, Eigen::Index hidden_dim,
                                      Eigen::Index output_dim, std::uint64_t seed)
{
    RegressorModel model(arch, input_dim, hidden_dim, output_dim);
    std::mt19937_64 rng(seed);
    auto fill = [&rng](auto&& w) {
        const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            for (Eigen::Index r = 0; r < w.rows(); ++r) {
                w(r, c) = dist(rng);
            }
        }
    };
    if (arch == Architecture::mlp) {
        fill(model.w1());
    }
    fill(model.w2());
    return model;
}

bool RegressorModel::identical_to(const RegressorModel& other) const
{
    return arch_ == other.arch_ && input_dim_ == other.input_dim_ && hidden_dim_ == other.hidden_dim_ &&
           output_dim_ == other.output_dim_ && params_.size() == other.params_.size() && params_ == other.params_;
}

Eigen::Index RegressorModel::w1_size() const
{
    return arch_ == Architecture::mlp ? hidden_dim_ * input_dim_ : 0;
}

Eigen::Index RegressorModel::b1_size() const
{
    return arch_ == Architecture::mlp ? hidden_dim_ : 0;
}

Eigen::Index RegressorModel::last_layer_in() const
{
    return arch_ == Architecture::mlp ? hidden_dim_ : input_dim_;
}

Eigen::Map<Eigen::MatrixXd> RegressorModel::w1()
{
    return {params_.data(), b1_size(), b1_size() > 0 ? input_dim_ : 0};
}

Eigen::Map<const Eigen::MatrixXd> RegressorModel::w1() const
{
    return {params_.data(), b1_size(), b1_size() > 0 ? input_dim_ : 0};
}

Eigen::Map<Eigen::VectorXd> RegressorModel::b1()
{
    return {params_.data() + w1_size(), b1_size()};
}

Eigen::Map<const Eigen::VectorXd> RegressorModel::b1() const
{
    return {params_.data() + w1_size(), b1_size()};
}

Eigen::Map<Eigen::MatrixXd> RegressorModel::w2()
{
    return {params_.data() + w1_size() + b1_size(), output_dim_, last_layer_in()};
}

Eigen::Map<const Eigen::MatrixXd> RegressorModel::w2() const
{
    return {params_.data() + w1_size() + b1_size(), output_dim_, last_layer_in()};
}

Eigen::Map<Eigen::VectorXd> RegressorModel::b2()
{
    return {params_.data() + params_.size() - output_dim_, output_dim_};
}

Eigen::Map<const Eigen::VectorXd> RegressorModel::b2() const
{
    return {params_.data() + params_.size() - output_dim_, output_dim_};
}

Eigen::MatrixXd forward_batch(const RegressorModel& model, const Eigen::MatrixXd& features)
{
    if (features.rows() != model.input_dim()) {
        throw InvalidInputError("regressor expects " + std::to_string(model.input_dim()) + " features, got " +
                                std::to_string(features.rows()));
    }
    if (model.architecture() == Architecture::linear) {
        return (model.w2() * features).colwise() + model.b2();
    }
    const Eigen::MatrixXd hidden = ((model.w1() * features).colwise() + model.b1()).array().tanh().matrix();
    return (model.w2() * hidden).colwise() + model.b2();
}

ShapeSample forward(const RegressorModel& model, const Eigen::VectorXd& features)
{
    return forward_batch(model, features);
}

Gradients backward(const RegressorModel& model, const Eigen::MatrixXd& features,
                   std::span<const ShapeSample> targets, std::span<const HardnessWeights> phis,
                   const LossSpec& loss)
{
    const Eigen::Index batch = features.cols();
    if (static_cast<std::size_t>(batch) != targets.size()) {
        throw InvalidInputError("backward: " + std::to_string(batch) + " feature columns but " +
                                std::to_string(targets.size()) + " targets");
    }
    if (features.rows() != model.input_dim()) {
        throw InvalidInputError("backward: feature dimension mismatch");
    }
    for (const auto& t : targets) {
        if (t.size() != model.output_dim()) {
            throw InvalidInputError("backward: target dimension mismatch");
        }
    }

    Eigen::MatrixXd hidden;
    Eigen::MatrixXd pred;
    if (model.architecture() == Architecture::mlp) {
        hidden = ((model.w1() * features).colwise() + model.b1()).array().tanh().matrix();
        pred = (model.w2() * hidden).colwise() + model.b2();
    } else {
        pred = (model.w2() * features).colwise() + model.b2();
    }
    check_finite(pred, "prediction");

    std::vector<ShapeSample> preds(static_cast<std::size_t>(batch));
    for (Eigen::Index i = 0; i < batch; ++i) {
        preds[static_cast<std::size_t>(i)] = pred.col(i);
    }
    const LossReport report = loss.kind == LossKind::acr ? acr_loss_batch(targets, preds, phis, loss.acr)
                                                         : l2_loss_batch(targets, preds);
    if (!std::isfinite(report.total)) {
        throw NumericalError("backward: non-finite loss");
    }
    const Eigen::MatrixXd& d_pred = report.grad_pred;

    Gradients out;
    out.loss = report.total;
    RegressorModel view(model); // reuse the parameter layout for the gradient
    view.parameters().setZero();
    if (model.architecture() == Architecture::mlp) {
        view.w2() = d_pred * hidden.transpose();
        view.b2() = d_pred.rowwise().sum();
        const Eigen::MatrixXd d_hidden =
            ((model.w2().transpose() * d_pred).array() * (1.0 - hidden.array().square())).matrix();
        view.w1() = d_hidden * features.transpose();
        view.b1() = d_hidden.rowwise().sum();
    } else {
        view.w2() = d_pred * features.transpose();
        view.b2() = d_pred.rowwise().sum();
    }
    out.grad = std::move(view.parameters());
    check_finite(out.grad, "gradient");
    return out;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state, const AdamConfig& cfg)
{
    if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        throw InvalidInputError("adam: parameter, gradient and state sizes differ");
    }
    ++state.step;
    const auto t = static_cast<double>(state.step);

    Eigen::VectorXd g = grads;
    double lr = cfg.learning_rate;
    switch (cfg.decay_mode) {
    case DecayMode::none:
        break;
    case DecayMode::weight_decay:
        g += cfg.decay * params;
        break;
    case DecayMode::lr_exponential:
        lr *= std::exp(-cfg.decay * (t - 1.0));
        break;
    case DecayMode::lr_inverse_time:
        lr /= 1.0 + cfg.decay * (t - 1.0);
        break;
    }

    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g;
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * g.cwiseAbs2();
    const double m_correction = 1.0 - std::pow(cfg.beta1, t);
    const double v_correction = 1.0 - std::pow(cfg.beta2, t);
    params.array() -=
        lr * (state.m.array() / m_correction) / ((state.v.array() / v_correction).sqrt() + cfg.epsilon);
}

std::string serialize_regressor(const RegressorModel& model)
{
    std::ostringstream out;
    out << snapshot_magic << ' ' << snapshot_version << '\n';
    out << "architecture " << to_string(model.architecture()) << '\n';
    out << "input_dim " << model.input_dim() << '\n';
    out << "hidden_dim " << model.hidden_dim() << '\n';
    out << "output_dim " << model.output_dim() << '\n';
    out << "num_parameters " << model.num_parameters() << '\n';
    for (Eigen::Index i = 0; i < model.num_parameters(); ++i) {
        out << numfmt::exact(model.parameters()(i)) << '\n';
    }
    return out.str();
}

RegressorModel deserialize_regressor(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    auto next = [&]() -> std::string {
        if (!std::getline(in, line)) {
            throw ParseError(line_no, "truncated regressor snapshot");
        }
        ++line_no;
        return std::string(numfmt::trim(line));
    };
    auto field = [&](const std::string& key) -> std::string {
        const std::string l = next();
        if (!l.starts_with(key + ' ')) {
            throw ParseError(line_no, "expected '" + key + "'");
        }
        return std::string(numfmt::trim(std::string_view(l).substr(key.size() + 1)));
    };
    auto int_field = [&](const std::string& key) -> Eigen::Index {
        const auto v = numfmt::parse_int(field(key));
        if (!v || *v < 0) {
            throw ParseError(line_no, "invalid integer for '" + key + "'");
        }
        return static_cast<Eigen::Index>(*v);
    };

    if (field(snapshot_magic) != std::to_string(snapshot_version)) {
        throw ParseError(line_no, "unsupported regressor snapshot version");
    }
    Architecture arch{};
    try {
        arch = parse_architecture(field("architecture"));
    } catch (const InvalidInputError& e) {
        throw ParseError(line_no, e.what());
    }
    const auto input_dim = int_field("input_dim");
    const auto hidden_dim = int_field("hidden_dim");
    const auto output_dim = int_field("output_dim");
    const auto count = int_field("num_parameters");
    RegressorModel model(arch, input_dim, hidden_dim, output_dim);
    if (count != model.num_parameters()) {
        throw ParseError(line_no, "parameter count does not match the declared shapes");
    }
    for (Eigen::Index i = 0; i < count; ++i) {
        const auto v = numfmt::parse_double(next());
        if (!v) {
            throw ParseError(line_no, "non-numeric parameter");
        }
        model.parameters()(i) = *v;
    }
    return model;
}

} // namespace acr
