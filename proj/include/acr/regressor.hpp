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

#ifndef ACR_REGRESSOR_HPP
#define ACR_REGRESSOR_HPP

#include "acr/hardness.hpp"
#include "acr/loss.hpp"
#include "acr/shape_model.hpp"

#include "Eigen/Core"

#include <cstdint>
#include <span>
#include <string>

namespace acr {

enum class Architecture { linear, mlp };

const char* to_string(Architecture arch);
Architecture parse_architecture(const std::string& text);

/**
 * @brief Small differentiable landmark regressor: either y = W x + b or a
 * single tanh hidden layer, y = W2 tanh(W1 x + b1) + b2.
 *
 * All parameters live in one flat vector (W1, b1, W2, b2, matrices
 * column-major; the linear model stores only W2 and b2), so optimisers and
 * gradient checks can treat them uniformly. Outputs are not clipped.
 */
class RegressorModel
{
public:
    RegressorModel() = default;
    RegressorModel(Architecture arch, Eigen::Index input_dim, Eigen::Index hidden_dim, Eigen::Index output_dim);

    /// Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases.
    static RegressorModel glorot(Architecture arch, Eigen::Index input_dim, Eigen::Index hidden_dim,
                                 Eigen::Index output_dim, std::uint64_t seed);

    Architecture architecture() const { return arch_; }
    Eigen::Index input_dim() const { return input_dim_; }
    Eigen::Index hidden_dim() const { return arch_ == Architecture::mlp ? hidden_dim_ : 0; }
    Eigen::Index output_dim() const { return output_dim_; }
    Eigen::Index num_parameters() const { return params_.size(); }

    Eigen::VectorXd& parameters() { return params_; }
    const Eigen::VectorXd& parameters() const { return params_; }

    // Views into the flat parameter vector. w1/b1 are empty for the linear model.
    Eigen::Map<Eigen::MatrixXd> w1();
    Eigen::Map<const Eigen::MatrixXd> w1() const;
    Eigen::Map<Eigen::VectorXd> b1();
    Eigen::Map<const Eigen::VectorXd> b1() const;
    Eigen::Map<Eigen::MatrixXd> w2();
    Eigen::Map<const Eigen::MatrixXd> w2() const;
    Eigen::Map<Eigen::VectorXd> b2();
    Eigen::Map<const Eigen::VectorXd> b2() const;

    /// Same architecture, shapes and bit-identical parameters.
    bool identical_to(const RegressorModel& other) const;

private:
    Eigen::Index w1_size() const;
    Eigen::Index b1_size() const;
    Eigen::Index last_layer_in() const;

    Architecture arch_ = Architecture::linear;
    Eigen::Index input_dim_ = 0;
    Eigen::Index hidden_dim_ = 0;
    Eigen::Index output_dim_ = 0;
    Eigen::VectorXd params_;
};

ShapeSample forward(const RegressorModel& model, const Eigen::VectorXd& features);

/// Predictions for a batch of feature columns (input_dim x B), one output column per sample.
Eigen::MatrixXd forward_batch(const RegressorModel& model, const Eigen::MatrixXd& features);

enum class LossKind { acr, l2 };

const char* to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& text);

struct LossSpec
{
    LossKind kind = LossKind::acr;
    AcrLossConfig acr;
};

struct Gradients
{
    double loss = 0.0;     ///< batch-mean loss at the current parameters
    Eigen::VectorXd grad;  ///< same layout as RegressorModel::parameters()
};

/**
 * Loss and parameter gradients for a mini-batch. The output-layer error
 * signal is sign(pred - target) * acr_grad_elem(delta, phi, lambda) / (D * B)
 * for ACR, 2 (pred - target) / (D * B) for L2. phis is ignored for L2.
 *
 * Throws NumericalError if any intermediate value is non-finite.
 */
Gradients backward(const RegressorModel& model, const Eigen::MatrixXd& features,
                   std::span<const ShapeSample> targets, std::span<const HardnessWeights> phis,
                   const LossSpec& loss);

/// How the optimiser's "decay" hyperparameter is applied.
enum class DecayMode {
    none,
    weight_decay,    ///< grad += decay * param
    lr_exponential,  ///< lr_t = lr * exp(-decay * t)
    lr_inverse_time  ///< lr_t = lr / (1 + decay * t)
};

const char* to_string(DecayMode mode);
DecayMode parse_decay_mode(const std::string& text);

struct AdamConfig
{
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double decay = 1e-5;
    DecayMode decay_mode = DecayMode::weight_decay;
};

struct AdamState
{
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long long step = 0;

    static AdamState zeros(Eigen::Index n) { return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0}; }
};

/// One bias-corrected Adam update, in place.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state, const AdamConfig& cfg);

/// Versioned plain-text snapshot; parameters at 17 significant digits, round-trip exact.
std::string serialize_regressor(const RegressorModel& model);
RegressorModel deserialize_regressor(const std::string& text);

} // namespace acr

#endif // ACR_REGRESSOR_HPP
