// SPDX-License-Identifier: Apache-2.0
//
// beamcast - predicting user-side beam directions from BS-observable channel features
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "beamcast/common.hpp"
#include "beamcast/rng.hpp"

namespace beamcast {

// Feed-forward perceptron with sigmoid hidden layers and a linear output
// layer (a regression head). Samples are handled as matrix columns.

struct MlpArchitecture {
    std::vector<int> layer_sizes; // input, hidden..., output

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    std::size_t num_weight_layers() const { return layer_sizes.size() - 1; }
};

inline void validate(const MlpArchitecture &arch)
{
    if (arch.layer_sizes.size() < 3)
        throw std::invalid_argument("MlpArchitecture: at least one hidden layer required");
    for (int s : arch.layer_sizes)
        if (s < 1)
            throw std::invalid_argument("MlpArchitecture: all layer sizes must be >= 1");
}

// weights[l] maps layer l to layer l+1 and has shape (layer_{l+1} x layer_l).
struct MlpParams {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    MlpArchitecture architecture() const
    {
        MlpArchitecture arch;
        arch.layer_sizes.push_back(static_cast<int>(weights.front().cols()));
        for (const auto &w : weights)
            arch.layer_sizes.push_back(static_cast<int>(w.rows()));
        return arch;
    }
};

struct TrainConfig {
    double lambda = 1e-4;        // L2 factor on weights; biases stay unregularized
    double learning_rate = 0.3;
    int max_iterations = 5000;
    std::uint64_t init_seed = 0;
    double convergence_tol = 1e-8; // relative cost change
    double momentum = 0.0;         // 0 = plain gradient descent
};

struct TrainResult {
    MlpParams params;
    std::vector<double> cost_history; // [0] is the initial cost
    int step_size_warnings = 0;       // cost increases seen after iteration 10
};

inline void to_json(nlohmann::json &j, const TrainConfig &c)
{
    j = nlohmann::json{{"lambda", c.lambda},
                       {"learning_rate", c.learning_rate},
                       {"max_iterations", c.max_iterations},
                       {"init_seed", c.init_seed},
                       {"convergence_tol", c.convergence_tol},
                       {"momentum", c.momentum}};
}

inline void from_json(const nlohmann::json &j, TrainConfig &c)
{
    c.lambda = j.value("lambda", c.lambda);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.init_seed = j.value("init_seed", c.init_seed);
    c.convergence_tol = j.value("convergence_tol", c.convergence_tol);
    c.momentum = j.value("momentum", c.momentum);
}

// Glorot-style uniform init in +-sqrt(6/(fan_in+fan_out)), zero biases.
// Fill order is row-major per layer so results are seed-stable.
inline MlpParams init_params(const MlpArchitecture &arch, std::uint64_t seed)
{
    validate(arch);
    SplitMix64 rng(seed);
    MlpParams params;
    for (std::size_t l = 0; l + 1 < arch.layer_sizes.size(); ++l) {
        const int fan_in = arch.layer_sizes[l];
        const int fan_out = arch.layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c)
                w(r, c) = rng.uniform(-limit, limit);
        params.weights.push_back(std::move(w));
        params.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return params;
}

inline Eigen::MatrixXd sigmoid(const Eigen::MatrixXd &z)
{
    return (1.0 + (-z.array()).exp()).inverse().matrix();
}

// Forward pass over a batch (inputs as columns); returns the activations of
// every layer, [0] being the input itself.
inline std::vector<Eigen::MatrixXd> forward_activations(const MlpParams &params,
                                                        const Eigen::MatrixXd &batch)
{
    if (batch.rows() != params.weights.front().cols())
        throw DimensionMismatch("forward: input size does not match the input layer");
    const std::size_t n_layers = params.weights.size();
    std::vector<Eigen::MatrixXd> activations;
    activations.reserve(n_layers + 1);
    activations.push_back(batch);
    for (std::size_t l = 0; l < n_layers; ++l) {
        Eigen::MatrixXd z = params.weights[l] * activations.back();
        z.colwise() += params.biases[l];
        if (l + 1 < n_layers)
            activations.push_back(sigmoid(z)); // hidden: sigmoid
        else
            activations.push_back(std::move(z)); // output: linear
    }
    return activations;
}

inline Eigen::MatrixXd forward_batch(const MlpParams &params, const Eigen::MatrixXd &batch)
{
    return forward_activations(params, batch).back();
}

inline Eigen::VectorXd forward(const MlpParams &params, const Eigen::VectorXd &input)
{
    return forward_batch(params, input);
}

inline void check_batch(const MlpParams &params, const Eigen::MatrixXd &inputs,
                        const Eigen::MatrixXd &targets)
{
    if (inputs.cols() == 0)
        throw EmptyBatch("cost/gradients: batch is empty");
    if (inputs.cols() != targets.cols())
        throw DimensionMismatch("cost/gradients: inputs and targets disagree in batch size");
    if (targets.rows() != params.weights.back().rows())
        throw DimensionMismatch("cost/gradients: target size does not match the output layer");
}

// Training cost: (1/N) * sum_n ||h(x_n) - y_n||^2 + (lambda/2) * sum_l ||W_l||_F^2.
inline double cost(const MlpParams &params, const Eigen::MatrixXd &inputs,
                   const Eigen::MatrixXd &targets, double lambda)
{
    check_batch(params, inputs, targets);
    const double n = static_cast<double>(inputs.cols());
    const double data = (forward_batch(params, inputs) - targets).squaredNorm() / n;
    double reg = 0.0;
    for (const auto &w : params.weights)
        reg += w.squaredNorm();
    return data + 0.5 * lambda * reg;
}

struct MlpGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

// Exact analytic gradient of the cost above (backpropagation).
inline MlpGradients gradients(const MlpParams &params, const Eigen::MatrixXd &inputs,
                              const Eigen::MatrixXd &targets, double lambda)
{
    check_batch(params, inputs, targets);
    const auto activations = forward_activations(params, inputs);
    const double n = static_cast<double>(inputs.cols());
    const std::size_t n_layers = params.weights.size();

    MlpGradients grads;
    grads.weights.resize(n_layers);
    grads.biases.resize(n_layers);

    // linear output layer: d/dh of ||h - y||^2 / N
    Eigen::MatrixXd delta = (2.0 / n) * (activations.back() - targets);
    for (std::size_t l = n_layers; l-- > 0;) {
        grads.weights[l] = delta * activations[l].transpose() + lambda * params.weights[l];
        grads.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            const Eigen::MatrixXd &a = activations[l]; // sigmoid'(z) = a(1-a)
            delta = (params.weights[l].transpose() * delta).array() *
                    (a.array() * (1.0 - a.array()));
        }
    }
    return grads;
}

// Full-batch gradient descent; deterministic given the config.
inline TrainResult train(const MlpArchitecture &arch, const Eigen::MatrixXd &inputs,
                         const Eigen::MatrixXd &targets, const TrainConfig &config)
{
    validate(arch);
    if (arch.input_size() != inputs.rows())
        throw DimensionMismatch("train: input size does not match the architecture");
    if (!(config.learning_rate > 0.0) || config.lambda < 0.0 || config.max_iterations < 1)
        throw std::invalid_argument("train: invalid config");

    TrainResult result;
    result.params = init_params(arch, config.init_seed);
    check_batch(result.params, inputs, targets);

    std::vector<Eigen::MatrixXd> vel_w;
    std::vector<Eigen::VectorXd> vel_b;
    if (config.momentum != 0.0) {
        for (const auto &w : result.params.weights)
            vel_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        for (const auto &b : result.params.biases)
            vel_b.push_back(Eigen::VectorXd::Zero(b.size()));
    }

    double prev = cost(result.params, inputs, targets, config.lambda);
    result.cost_history.push_back(prev);

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        const MlpGradients g = gradients(result.params, inputs, targets, config.lambda);
        for (std::size_t l = 0; l < result.params.weights.size(); ++l) {
            if (config.momentum != 0.0) {
                vel_w[l] = config.momentum * vel_w[l] - config.learning_rate * g.weights[l];
                vel_b[l] = config.momentum * vel_b[l] - config.learning_rate * g.biases[l];
                result.params.weights[l] += vel_w[l];
                result.params.biases[l] += vel_b[l];
            } else {
                result.params.weights[l] -= config.learning_rate * g.weights[l];
                result.params.biases[l] -= config.learning_rate * g.biases[l];
            }
        }
        const double j = cost(result.params, inputs, targets, config.lambda);
        if (!std::isfinite(j))
            throw DivergenceDetected("train: cost became non-finite at iteration " +
                                     std::to_string(iter) + "; lower the learning rate");
        if (iter > 10 && j > prev)
            ++result.step_size_warnings;
        result.cost_history.push_back(j);
        const double rel_change = std::abs(j - prev) / std::max(std::abs(prev), 1e-300);
        prev = j;
        if (rel_change < config.convergence_tol)
            break;
    }
    return result;
}

// Model files: architecture, row-major weight matrices, biases, and whatever
// training metadata the caller wants to keep.
inline nlohmann::json model_to_json(const MlpParams &params,
                                    const nlohmann::json &training_meta = nlohmann::json::object())
{
    nlohmann::json j;
    j["architecture"] = {{"layer_sizes", params.architecture().layer_sizes},
                         {"hidden_activation", "sigmoid"},
                         {"output_activation", "linear"}};
    nlohmann::json weights = nlohmann::json::array();
    for (const auto &w : params.weights) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(w.cols()));
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                row[static_cast<std::size_t>(c)] = w(r, c);
            rows.push_back(row);
        }
        weights.push_back(rows);
    }
    j["weights"] = std::move(weights);
    nlohmann::json biases = nlohmann::json::array();
    for (const auto &b : params.biases)
        biases.push_back(std::vector<double>(b.begin(), b.end()));
    j["biases"] = std::move(biases);
    if (!training_meta.empty())
        j["training"] = training_meta;
    return j;
}

inline MlpParams model_from_json(const nlohmann::json &j)
{
    MlpParams params;
    const auto &weights = j.at("weights");
    const auto &biases = j.at("biases");
    if (weights.size() != biases.size() || weights.empty())
        throw std::invalid_argument("model: weights and biases must pair up");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const auto &rows = weights[l];
        const std::size_t n_rows = rows.size();
        const std::size_t n_cols = rows.at(0).size();
        Eigen::MatrixXd w(n_rows, n_cols);
        for (std::size_t r = 0; r < n_rows; ++r) {
            if (rows[r].size() != n_cols)
                throw std::invalid_argument("model: ragged weight matrix");
            for (std::size_t c = 0; c < n_cols; ++c)
                w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    rows[r][c].get<double>();
        }
        Eigen::VectorXd b(biases[l].size());
        for (std::size_t i = 0; i < biases[l].size(); ++i)
            b(static_cast<Eigen::Index>(i)) = biases[l][i].get<double>();
        if (b.size() != w.rows())
            throw std::invalid_argument("model: bias size does not match weight rows");
        params.weights.push_back(std::move(w));
        params.biases.push_back(std::move(b));
    }
    validate(params.architecture());
    return params;
}

} // namespace beamcast
