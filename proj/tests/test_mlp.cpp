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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "beamcast/mlp.hpp"

using namespace beamcast;

namespace {

Eigen::MatrixXd random_matrix(SplitMix64 &rng, int rows, int cols, double lo, double hi)
{
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            m(r, c) = rng.uniform(lo, hi);
    return m;
}

// Central finite differences of the cost over every parameter.
MlpGradients fd_gradients(const MlpParams &params, const Eigen::MatrixXd &x,
                          const Eigen::MatrixXd &y, double lambda, double h)
{
    MlpGradients g;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        Eigen::MatrixXd gw(params.weights[l].rows(), params.weights[l].cols());
        for (Eigen::Index r = 0; r < gw.rows(); ++r) {
            for (Eigen::Index c = 0; c < gw.cols(); ++c) {
                MlpParams plus = params, minus = params;
                plus.weights[l](r, c) += h;
                minus.weights[l](r, c) -= h;
                gw(r, c) = (cost(plus, x, y, lambda) - cost(minus, x, y, lambda)) / (2.0 * h);
            }
        }
        g.weights.push_back(std::move(gw));
        Eigen::VectorXd gb(params.biases[l].size());
        for (Eigen::Index i = 0; i < gb.size(); ++i) {
            MlpParams plus = params, minus = params;
            plus.biases[l](i) += h;
            minus.biases[l](i) -= h;
            gb(i) = (cost(plus, x, y, lambda) - cost(minus, x, y, lambda)) / (2.0 * h);
        }
        g.biases.push_back(std::move(gb));
    }
    return g;
}

// Norm-wise relative deviation between two gradient structures.
double gradient_rel_error(const MlpGradients &a, const MlpGradients &b)
{
    double diff2 = 0.0, scale2 = 0.0;
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        diff2 += (a.weights[l] - b.weights[l]).squaredNorm();
        diff2 += (a.biases[l] - b.biases[l]).squaredNorm();
        scale2 += a.weights[l].squaredNorm() + b.weights[l].squaredNorm();
        scale2 += a.biases[l].squaredNorm() + b.biases[l].squaredNorm();
    }
    return std::sqrt(diff2) / std::max(std::sqrt(scale2), 1e-300);
}

} // namespace

TEST_CASE("init_params - deterministic, zero biases, bounded weights")
{
    MlpArchitecture arch{{2, 2, 2, 1}};
    MlpParams a = init_params(arch, 7);
    MlpParams b = init_params(arch, 7);
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        CHECK(a.weights[l] == b.weights[l]);
        CHECK(a.biases[l].isZero(0.0));
    }
    MlpParams c = init_params(arch, 8);
    CHECK(a.weights[0] != c.weights[0]);

    MlpArchitecture big{{100, 50, 20, 10}};
    MlpParams p = init_params(big, 1);
    for (std::size_t l = 0; l + 1 < big.layer_sizes.size(); ++l) {
        const double limit =
            std::sqrt(6.0 / static_cast<double>(big.layer_sizes[l] + big.layer_sizes[l + 1]));
        CHECK(p.weights[l].maxCoeff() <= limit);
        CHECK(p.weights[l].minCoeff() >= -limit);
    }
}

TEST_CASE("forward - zero parameters give 0.5 hidden activations and zero output")
{
    MlpArchitecture arch{{3, 4, 4, 2}};
    MlpParams p = init_params(arch, 0);
    for (auto &w : p.weights)
        w.setZero();
    Eigen::VectorXd x(3);
    x << 0.3, -0.7, 1.1;
    auto acts = forward_activations(p, x);
    CHECK((acts[1].array() == 0.5).all());
    CHECK((acts[2].array() == 0.5).all());
    CHECK(acts[3].isZero(0.0));
}

TEST_CASE("forward - single hidden unit matches hand computation")
{
    MlpParams p;
    p.weights = {Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::MatrixXd::Constant(1, 1, 3.0)};
    p.biases = {Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, -1.0)};
    Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.3);
    const double hidden = 1.0 / (1.0 + std::exp(-(2.0 * 0.3 + 0.5)));
    const double want = 3.0 * hidden - 1.0;
    CHECK(forward(p, x)(0) == Catch::Approx(want).epsilon(1e-15));
}

TEST_CASE("forward - matches an independent layer-by-layer oracle")
{
    SplitMix64 rng(606);
    MlpArchitecture arch{{4, 3, 3, 2}};
    MlpParams p = init_params(arch, 11);
    for (auto &b : p.biases)
        for (Eigen::Index i = 0; i < b.size(); ++i)
            b(i) = rng.uniform(-0.5, 0.5);
    Eigen::VectorXd x(4);
    x << 0.1, -0.4, 0.9, 0.2;

    // plain scalar-loop re-implementation
    std::vector<double> act(x.begin(), x.end());
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        std::vector<double> next(static_cast<std::size_t>(p.weights[l].rows()));
        for (Eigen::Index r = 0; r < p.weights[l].rows(); ++r) {
            double z = p.biases[l](r);
            for (Eigen::Index c = 0; c < p.weights[l].cols(); ++c)
                z += p.weights[l](r, c) * act[static_cast<std::size_t>(c)];
            next[static_cast<std::size_t>(r)] =
                (l + 1 < p.weights.size()) ? 1.0 / (1.0 + std::exp(-z)) : z;
        }
        act = std::move(next);
    }

    Eigen::VectorXd got = forward(p, x);
    for (Eigen::Index i = 0; i < got.size(); ++i)
        CHECK(std::abs(got(i) - act[static_cast<std::size_t>(i)]) < 1e-12);
}

TEST_CASE("forward - dimension mismatch throws")
{
    MlpParams p = init_params(MlpArchitecture{{4, 3, 3, 2}}, 1);
    CHECK_THROWS_AS(forward(p, Eigen::VectorXd::Zero(5)), DimensionMismatch);
}

TEST_CASE("cost - pinned values")
{
    MlpArchitecture arch{{2, 2, 2, 2}};
    MlpParams p = init_params(arch, 3);

    // predictions equal targets: cost reduces to the regularizer
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 3);
    Eigen::MatrixXd y = forward_batch(p, x).replicate(1, 1);
    CHECK(cost(p, x, y, 0.0) == Catch::Approx(0.0).margin(1e-18));
    double reg = 0.0;
    for (const auto &w : p.weights)
        reg += w.squaredNorm();
    CHECK(cost(p, x, y, 0.02) == Catch::Approx(0.01 * reg).epsilon(1e-12));

    // single pair with residual [1, 1]: squared norm 2
    MlpParams zero = p;
    for (auto &w : zero.weights)
        w.setZero();
    for (auto &b : zero.biases)
        b.setZero();
    Eigen::MatrixXd x1 = Eigen::MatrixXd::Zero(2, 1);
    Eigen::MatrixXd y1 = Eigen::MatrixXd::Constant(2, 1, -1.0);
    CHECK(cost(zero, x1, y1, 0.0) == 2.0);

    CHECK_THROWS_AS(cost(p, Eigen::MatrixXd(2, 0), Eigen::MatrixXd(2, 0), 0.0), EmptyBatch);
}

TEST_CASE("cost - regularizer decomposition holds for fixed params")
{
    SplitMix64 rng(17);
    MlpParams p = init_params(MlpArchitecture{{4, 3, 3, 2}}, 5);
    Eigen::MatrixXd x = random_matrix(rng, 4, 6, -1.0, 1.0);
    Eigen::MatrixXd y = random_matrix(rng, 2, 6, 0.0, 1.0);
    double reg = 0.0;
    for (const auto &w : p.weights)
        reg += w.squaredNorm();
    for (double lambda : {1e-4, 1e-2, 0.5}) {
        const double lhs = cost(p, x, y, lambda) - cost(p, x, y, 0.0);
        CHECK(lhs == Catch::Approx(0.5 * lambda * reg).epsilon(1e-12));
    }
}

TEST_CASE("gradients - analytic matches central finite differences")
{
    // The single most important check in the repo: 20 random small networks,
    // both unregularized and regularized.
    SplitMix64 rng(90210);
    double worst = 0.0;
    for (int net = 0; net < 20; ++net) {
        MlpParams p = init_params(MlpArchitecture{{4, 3, 3, 2}}, 1000 + net);
        for (auto &b : p.biases)
            for (Eigen::Index i = 0; i < b.size(); ++i)
                b(i) = rng.uniform(-0.5, 0.5);
        Eigen::MatrixXd x = random_matrix(rng, 4, 5, -1.0, 1.0);
        Eigen::MatrixXd y = random_matrix(rng, 2, 5, 0.0, 1.0);
        for (double lambda : {0.0, 1e-3}) {
            MlpGradients analytic = gradients(p, x, y, lambda);
            MlpGradients numeric = fd_gradients(p, x, y, lambda, 1e-6);
            worst = std::max(worst, gradient_rel_error(analytic, numeric));
        }
    }
    INFO("max norm-wise relative error " << worst);
    CHECK(worst < 1e-6);
}

TEST_CASE("gradients - zero gradient is a gradient-descent fixed point")
{
    MlpArchitecture arch{{3, 2, 2, 1}};
    MlpParams p = init_params(arch, 4);
    for (auto &w : p.weights)
        w.setZero();
    SplitMix64 rng(5);
    Eigen::MatrixXd x = random_matrix(rng, 3, 4, -1.0, 1.0);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(1, 4);
    MlpGradients g = gradients(p, x, y, 0.0);
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
        CHECK(g.weights[l].isZero(0.0));
        CHECK(g.biases[l].isZero(0.0));
    }
}

TEST_CASE("gradients - regularizer component is linear in lambda")
{
    SplitMix64 rng(21);
    MlpParams p = init_params(MlpArchitecture{{4, 3, 3, 2}}, 9);
    Eigen::MatrixXd x = random_matrix(rng, 4, 5, -1.0, 1.0);
    Eigen::MatrixXd y = random_matrix(rng, 2, 5, 0.0, 1.0);
    const double lambda = 2e-3;
    MlpGradients g1 = gradients(p, x, y, lambda);
    MlpGradients g2 = gradients(p, x, y, 2.0 * lambda);
    for (std::size_t l = 0; l < g1.weights.size(); ++l) {
        Eigen::MatrixXd extra = g2.weights[l] - g1.weights[l];
        CHECK((extra - lambda * p.weights[l]).cwiseAbs().maxCoeff() < 1e-12);
        // biases are unregularized
        CHECK((g2.biases[l] - g1.biases[l]).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("train - descends on a realizable target and is deterministic")
{
    SplitMix64 rng(808);
    Eigen::MatrixXd x = random_matrix(rng, 3, 24, 0.0, 1.0);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(2, 24);
    MlpArchitecture arch{{3, 5, 4, 2}};
    TrainConfig cfg;
    cfg.lambda = 0.0;
    cfg.max_iterations = 200;
    cfg.init_seed = 12;

    TrainResult r1 = train(arch, x, y, cfg);
    CHECK(r1.cost_history.back() < r1.cost_history.front());

    TrainResult r2 = train(arch, x, y, cfg);
    CHECK(model_to_json(r1.params).dump() == model_to_json(r2.params).dump());
}

TEST_CASE("train - divergence is reported, not silently returned")
{
    SplitMix64 rng(555);
    Eigen::MatrixXd x = random_matrix(rng, 3, 16, 0.0, 1.0);
    Eigen::MatrixXd y = random_matrix(rng, 2, 16, 0.0, 1.0);
    TrainConfig cfg;
    cfg.learning_rate = 1e9;
    cfg.max_iterations = 500;
    CHECK_THROWS_AS(train(MlpArchitecture{{3, 5, 4, 2}}, x, y, cfg), DivergenceDetected);
}

TEST_CASE("train - step-size warnings count the post-warmup cost increases")
{
    SplitMix64 rng(919);
    Eigen::MatrixXd x = random_matrix(rng, 4, 40, 0.0, 1.0);
    Eigen::MatrixXd y = random_matrix(rng, 2, 40, 0.0, 1.0);
    for (double lr : {0.05, 0.9}) {
        TrainConfig cfg;
        cfg.learning_rate = lr;
        cfg.max_iterations = 120;
        TrainResult r = train(MlpArchitecture{{4, 6, 5, 2}}, x, y, cfg);
        int increases = 0;
        for (std::size_t i = 11; i < r.cost_history.size(); ++i)
            if (r.cost_history[i] > r.cost_history[i - 1])
                ++increases;
        CHECK(r.step_size_warnings == increases);
    }
}

TEST_CASE("train - hidden activations stay inside (0, 1)")
{
    SplitMix64 rng(3333);
    Eigen::MatrixXd x = random_matrix(rng, 4, 30, 0.0, 1.0);
    Eigen::MatrixXd y = random_matrix(rng, 2, 30, 0.0, 1.0);
    TrainConfig cfg;
    cfg.max_iterations = 100;
    TrainResult r = train(MlpArchitecture{{4, 6, 5, 2}}, x, y, cfg);
    auto acts = forward_activations(r.params, x);
    for (std::size_t l = 1; l + 1 < acts.size(); ++l) {
        CHECK(acts[l].minCoeff() > 0.0);
        CHECK(acts[l].maxCoeff() < 1.0);
    }
}

TEST_CASE("model JSON - round trip preserves parameters exactly")
{
    MlpParams p = init_params(MlpArchitecture{{4, 3, 3, 2}}, 77);
    nlohmann::json meta = {{"final_cost", 0.25}, {"iterations", 42}};
    nlohmann::json j = model_to_json(p, meta);
    MlpParams q = model_from_json(j);
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        CHECK(p.weights[l] == q.weights[l]);
        CHECK(p.biases[l] == q.biases[l]);
    }
    CHECK(model_to_json(p, meta).dump() == model_to_json(q, meta).dump());
    CHECK(j.at("architecture").at("layer_sizes") == std::vector<int>{4, 3, 3, 2});
}
