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

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "beamcast/common.hpp"
#include "beamcast/eval.hpp"
#include "beamcast/features.hpp"
#include "beamcast/mlp.hpp"
#include "beamcast/records.hpp"
#include "beamcast/rng.hpp"

namespace beamcast {

// The four estimator variants, differing only in what the networks see:
// RSS features, delay features, both stacked (joint), or the outputs of the
// two single-feature networks chained into a second stage (sequential).
enum class SchemeKind { kRss, kDelay, kSequential, kJoint };

inline std::string to_string(SchemeKind kind)
{
    switch (kind) {
    case SchemeKind::kRss:
        return "rss";
    case SchemeKind::kDelay:
        return "delay";
    case SchemeKind::kSequential:
        return "seq";
    default:
        return "joint";
    }
}

inline SchemeKind scheme_kind_from_string(const std::string &s)
{
    if (s == "rss")
        return SchemeKind::kRss;
    if (s == "delay")
        return SchemeKind::kDelay;
    if (s == "seq")
        return SchemeKind::kSequential;
    if (s == "joint")
        return SchemeKind::kJoint;
    throw std::invalid_argument("unknown scheme kind: " + s);
}

// ---------------------------------------------------------------------------
// Train/test partitioning

struct SplitSpec {
    double train_fraction = 0.95;
    std::uint64_t seed = 0;
};

struct SplitManifest {
    double train_fraction = 0.95;
    std::uint64_t seed = 0;
    std::vector<std::array<int, 2>> train_keys; // {bs_id, user_id}
    std::vector<std::array<int, 2>> test_keys;
};

inline SplitManifest make_split(const std::vector<ChannelSample> &dataset, const SplitSpec &spec)
{
    if (!(spec.train_fraction > 0.0) || !(spec.train_fraction < 1.0))
        throw std::invalid_argument("make_split: train_fraction must lie in (0, 1)");
    const std::size_t n = dataset.size();
    if (n < 2)
        throw InsufficientData("make_split: need at least two samples");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    SplitMix64 rng(spec.seed);
    rng.shuffle(order);

    auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    SplitManifest manifest;
    manifest.train_fraction = spec.train_fraction;
    manifest.seed = spec.seed;
    for (std::size_t i = 0; i < n; ++i) {
        const auto &s = dataset[order[i]];
        (i < n_train ? manifest.train_keys : manifest.test_keys)
            .push_back({s.bs_id, s.user_id});
    }
    std::sort(manifest.train_keys.begin(), manifest.train_keys.end());
    std::sort(manifest.test_keys.begin(), manifest.test_keys.end());
    return manifest;
}

inline std::pair<std::vector<ChannelSample>, std::vector<ChannelSample>>
apply_split(const std::vector<ChannelSample> &dataset, const SplitManifest &manifest)
{
    std::set<std::array<int, 2>> train(manifest.train_keys.begin(), manifest.train_keys.end());
    std::set<std::array<int, 2>> test(manifest.test_keys.begin(), manifest.test_keys.end());
    std::pair<std::vector<ChannelSample>, std::vector<ChannelSample>> out;
    for (const auto &s : dataset) {
        const std::array<int, 2> key{s.bs_id, s.user_id};
        if (train.count(key))
            out.first.push_back(s);
        else if (test.count(key))
            out.second.push_back(s);
    }
    if (out.first.size() != train.size() || out.second.size() != test.size())
        throw InsufficientData("apply_split: dataset is missing samples named in the manifest");
    return out;
}

inline void to_json(nlohmann::json &j, const SplitManifest &m)
{
    j = nlohmann::json{{"train_fraction", m.train_fraction},
                       {"seed", m.seed},
                       {"train_keys", m.train_keys},
                       {"test_keys", m.test_keys}};
}

inline void from_json(const nlohmann::json &j, SplitManifest &m)
{
    j.at("train_fraction").get_to(m.train_fraction);
    j.at("seed").get_to(m.seed);
    j.at("train_keys").get_to(m.train_keys);
    j.at("test_keys").get_to(m.test_keys);
}

// ---------------------------------------------------------------------------
// Feature matrices (samples as columns)

inline Eigen::MatrixXd input_matrix(const std::vector<ChannelSample> &samples,
                                    const FeatureNorms &norms, int n_bs, FeatureKind kind)
{
    Eigen::MatrixXd x(n_bs, static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        InputVector in = (kind == FeatureKind::kRss) ? rss_input(samples[i], norms, n_bs)
                                                     : delay_input(samples[i], norms, n_bs);
        x.col(static_cast<Eigen::Index>(i)) = in.values;
    }
    return x;
}

inline Eigen::MatrixXd joint_input_matrix(const std::vector<ChannelSample> &samples,
                                          const FeatureNorms &norms, int n_bs)
{
    Eigen::MatrixXd x(2 * n_bs, static_cast<Eigen::Index>(samples.size()));
    x.topRows(n_bs) = input_matrix(samples, norms, n_bs, FeatureKind::kRss);
    x.bottomRows(n_bs) = input_matrix(samples, norms, n_bs, FeatureKind::kDelay);
    return x;
}

inline Eigen::MatrixXd output_matrix(const std::vector<ChannelSample> &samples, int n_ms)
{
    Eigen::MatrixXd y(n_ms, static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i)
        y.col(static_cast<Eigen::Index>(i)) = aod_indicator(samples[i], n_ms).values;
    return y;
}

// ---------------------------------------------------------------------------
// Trained schemes

struct TrainedScheme {
    SchemeKind kind = SchemeKind::kRss;
    int n_bs = 100;
    int n_ms = 10;
    FeatureNorms norms;
    std::optional<MlpParams> rss_model;    // RSS and SEQUENTIAL
    std::optional<MlpParams> delay_model;  // DELAY and SEQUENTIAL
    std::optional<MlpParams> joint_model;  // JOINT
    std::optional<MlpParams> stage2_model; // SEQUENTIAL
};

inline void validate(const TrainedScheme &s)
{
    auto input_of = [](const MlpParams &p) { return static_cast<int>(p.weights.front().cols()); };
    switch (s.kind) {
    case SchemeKind::kRss:
        if (!s.rss_model || s.delay_model || s.joint_model || s.stage2_model)
            throw std::invalid_argument("scheme rss: expects exactly the RSS model");
        if (input_of(*s.rss_model) != s.n_bs)
            throw DimensionMismatch("scheme rss: model input size must be n_bs");
        break;
    case SchemeKind::kDelay:
        if (!s.delay_model || s.rss_model || s.joint_model || s.stage2_model)
            throw std::invalid_argument("scheme delay: expects exactly the delay model");
        if (input_of(*s.delay_model) != s.n_bs)
            throw DimensionMismatch("scheme delay: model input size must be n_bs");
        break;
    case SchemeKind::kJoint:
        if (!s.joint_model || s.rss_model || s.delay_model || s.stage2_model)
            throw std::invalid_argument("scheme joint: expects exactly the joint model");
        if (input_of(*s.joint_model) != 2 * s.n_bs)
            throw DimensionMismatch("scheme joint: model input size must be 2*n_bs");
        break;
    case SchemeKind::kSequential:
        if (!s.rss_model || !s.delay_model || !s.stage2_model || s.joint_model)
            throw std::invalid_argument("scheme seq: expects two stage-1 models and a stage 2");
        if (input_of(*s.stage2_model) != 2 * s.n_ms)
            throw DimensionMismatch("scheme seq: stage-2 input size must be 2*n_ms");
        break;
    }
}

// Raw linear-output scores for a batch; higher score = more likely occupied.
inline Eigen::MatrixXd score_batch(const TrainedScheme &scheme,
                                   const std::vector<ChannelSample> &samples)
{
    switch (scheme.kind) {
    case SchemeKind::kRss:
        return forward_batch(*scheme.rss_model,
                             input_matrix(samples, scheme.norms, scheme.n_bs, FeatureKind::kRss));
    case SchemeKind::kDelay:
        return forward_batch(
            *scheme.delay_model,
            input_matrix(samples, scheme.norms, scheme.n_bs, FeatureKind::kDelay));
    case SchemeKind::kJoint:
        return forward_batch(*scheme.joint_model,
                             joint_input_matrix(samples, scheme.norms, scheme.n_bs));
    default: {
        const Eigen::MatrixXd s1r = forward_batch(
            *scheme.rss_model,
            input_matrix(samples, scheme.norms, scheme.n_bs, FeatureKind::kRss));
        const Eigen::MatrixXd s1d = forward_batch(
            *scheme.delay_model,
            input_matrix(samples, scheme.norms, scheme.n_bs, FeatureKind::kDelay));
        Eigen::MatrixXd stacked(2 * scheme.n_ms, s1r.cols());
        stacked.topRows(scheme.n_ms) = s1r;
        stacked.bottomRows(scheme.n_ms) = s1d;
        return forward_batch(*scheme.stage2_model, stacked);
    }
    }
}

inline Eigen::VectorXd predict(const TrainedScheme &scheme, const ChannelSample &sample)
{
    return score_batch(scheme, {sample});
}

// Constant benchmark estimator: the mean training output vector.
inline Eigen::VectorXd sample_average_baseline(const Eigen::MatrixXd &train_outputs)
{
    return mean_output(train_outputs);
}

// ---------------------------------------------------------------------------
// Training

struct SchemeTrainOptions {
    int n_bs = 100;
    int n_ms = 10;
    std::vector<int> hidden{50, 20};    // stage-1 hidden layers
    std::vector<int> stage2_hidden{20}; // hidden layers of the NN_seq stage 2
    TrainConfig train;                  // per-model init seeds derive from train.init_seed
};

struct ModelRun {
    std::string name;
    TrainConfig config; // effective config, including the derived init seed
    std::vector<double> cost_history;
    int step_size_warnings = 0;
};

struct SchemeTraining {
    TrainedScheme scheme;
    SplitManifest manifest;
    Eigen::VectorXd ybar_train; // sample-average baseline of the training split
    std::vector<ModelRun> runs;
};

namespace detail {

inline MlpArchitecture stack_arch(int input, const std::vector<int> &hidden, int output)
{
    MlpArchitecture arch;
    arch.layer_sizes.push_back(input);
    arch.layer_sizes.insert(arch.layer_sizes.end(), hidden.begin(), hidden.end());
    arch.layer_sizes.push_back(output);
    return arch;
}

inline MlpParams train_one(const std::string &name, const MlpArchitecture &arch,
                           const Eigen::MatrixXd &x, const Eigen::MatrixXd &y,
                           TrainConfig cfg, SchemeTraining &out)
{
    cfg.init_seed = derive_seed(cfg.init_seed, "init/" + name);
    TrainResult r = train(arch, x, y, cfg);
    out.runs.push_back({name, cfg, std::move(r.cost_history), r.step_size_warnings});
    return std::move(r.params);
}

} // namespace detail

// Trains one scheme on a deterministic split. Feature norms come from the
// training split only; the sequential stage 2 is fitted to the stage-1
// outputs on that same training split.
inline SchemeTraining train_scheme(SchemeKind kind, const std::vector<ChannelSample> &dataset,
                                   const SplitSpec &split, const SchemeTrainOptions &opts)
{
    if (opts.n_bs < opts.n_ms || opts.n_ms < 1)
        throw std::invalid_argument("train_scheme: require n_bs >= n_ms >= 1");

    SchemeTraining out;
    out.manifest = make_split(dataset, split);
    auto [train_set, test_set] = apply_split(dataset, out.manifest);
    if (train_set.empty() || test_set.empty())
        throw InsufficientData("train_scheme: both splits must be non-empty");

    TrainedScheme &scheme = out.scheme;
    scheme.kind = kind;
    scheme.n_bs = opts.n_bs;
    scheme.n_ms = opts.n_ms;
    scheme.norms = compute_norms(train_set);

    const Eigen::MatrixXd y = output_matrix(train_set, opts.n_ms);
    out.ybar_train = sample_average_baseline(y);

    switch (kind) {
    case SchemeKind::kRss: {
        const auto x = input_matrix(train_set, scheme.norms, opts.n_bs, FeatureKind::kRss);
        scheme.rss_model = detail::train_one(
            "rss", detail::stack_arch(opts.n_bs, opts.hidden, opts.n_ms), x, y, opts.train, out);
        break;
    }
    case SchemeKind::kDelay: {
        const auto x = input_matrix(train_set, scheme.norms, opts.n_bs, FeatureKind::kDelay);
        scheme.delay_model = detail::train_one(
            "delay", detail::stack_arch(opts.n_bs, opts.hidden, opts.n_ms), x, y, opts.train, out);
        break;
    }
    case SchemeKind::kJoint: {
        const auto x = joint_input_matrix(train_set, scheme.norms, opts.n_bs);
        scheme.joint_model =
            detail::train_one("joint", detail::stack_arch(2 * opts.n_bs, opts.hidden, opts.n_ms),
                              x, y, opts.train, out);
        break;
    }
    case SchemeKind::kSequential: {
        const auto xr = input_matrix(train_set, scheme.norms, opts.n_bs, FeatureKind::kRss);
        const auto xd = input_matrix(train_set, scheme.norms, opts.n_bs, FeatureKind::kDelay);
        const auto arch1 = detail::stack_arch(opts.n_bs, opts.hidden, opts.n_ms);
        scheme.rss_model = detail::train_one("rss", arch1, xr, y, opts.train, out);
        scheme.delay_model = detail::train_one("delay", arch1, xd, y, opts.train, out);

        Eigen::MatrixXd stacked(2 * opts.n_ms, y.cols());
        stacked.topRows(opts.n_ms) = forward_batch(*scheme.rss_model, xr);
        stacked.bottomRows(opts.n_ms) = forward_batch(*scheme.delay_model, xd);
        scheme.stage2_model = detail::train_one(
            "stage2", detail::stack_arch(2 * opts.n_ms, opts.stage2_hidden, opts.n_ms), stacked, y,
            opts.train, out);
        break;
    }
    }
    validate(scheme);
    return out;
}

// Eqs-style statistical report of a trained scheme over an explicit split.
inline EvalReport evaluate_scheme(const TrainedScheme &scheme,
                                  const std::vector<ChannelSample> &train_set,
                                  const std::vector<ChannelSample> &test_set)
{
    const Eigen::MatrixXd y_train = output_matrix(train_set, scheme.n_ms);
    const Eigen::MatrixXd y_test = output_matrix(test_set, scheme.n_ms);
    const Eigen::VectorXd ybar = sample_average_baseline(y_train);
    const double s_t = sample_variance(y_train);
    const double eta_v = baseline_deviation(y_test, ybar);
    const double eta_nn = nn_deviation(y_test, score_batch(scheme, test_set));
    return make_report(s_t, eta_v, eta_nn, static_cast<int>(train_set.size()),
                       static_cast<int>(test_set.size()));
}

// ---------------------------------------------------------------------------
// Bundle persistence: a directory with bundle.json plus one file per model.

inline const std::vector<std::pair<std::string, std::optional<MlpParams> TrainedScheme::*>> &
model_slots()
{
    static const std::vector<std::pair<std::string, std::optional<MlpParams> TrainedScheme::*>>
        slots = {{"rss", &TrainedScheme::rss_model},
                 {"delay", &TrainedScheme::delay_model},
                 {"joint", &TrainedScheme::joint_model},
                 {"stage2", &TrainedScheme::stage2_model}};
    return slots;
}

inline void save_bundle(const std::filesystem::path &dir, const SchemeTraining &training,
                        const nlohmann::json &extra_meta = nlohmann::json::object())
{
    validate(training.scheme);
    std::filesystem::create_directories(dir);

    nlohmann::json bundle;
    bundle["kind"] = to_string(training.scheme.kind);
    bundle["n_bs"] = training.scheme.n_bs;
    bundle["n_ms"] = training.scheme.n_ms;
    bundle["norms"] = training.scheme.norms;
    nlohmann::json split = training.manifest;
    if (training.scheme.kind == SchemeKind::kSequential)
        split["stage2_inputs"] = "train_split_stage1_outputs";
    bundle["split"] = std::move(split);
    bundle["ybar_train"] =
        std::vector<double>(training.ybar_train.begin(), training.ybar_train.end());

    nlohmann::json models = nlohmann::json::object();
    for (const auto &[name, slot] : model_slots()) {
        if (!(training.scheme.*slot).has_value())
            continue;
        const std::string filename = "model_" + name + ".json";
        nlohmann::json meta;
        for (const auto &run : training.runs) {
            if (run.name == name) {
                meta["config"] = run.config;
                meta["final_cost"] = run.cost_history.back();
                meta["iterations"] = run.cost_history.size() - 1;
                meta["step_size_warnings"] = run.step_size_warnings;
            }
        }
        std::ofstream out(dir / filename, std::ios::binary);
        out << model_to_json(*(training.scheme.*slot), meta).dump(2) << '\n';
        models[name] = filename;
    }
    bundle["models"] = std::move(models);
    if (!extra_meta.empty())
        bundle["meta"] = extra_meta;

    std::ofstream out(dir / "bundle.json", std::ios::binary);
    out << bundle.dump(2) << '\n';
}

struct LoadedBundle {
    TrainedScheme scheme;
    SplitManifest manifest;
    Eigen::VectorXd ybar_train;
};

inline LoadedBundle load_bundle(const std::filesystem::path &dir)
{
    std::ifstream in(dir / "bundle.json");
    if (!in)
        throw std::runtime_error("cannot open bundle: " + (dir / "bundle.json").string());
    nlohmann::json bundle;
    in >> bundle;

    LoadedBundle loaded;
    loaded.scheme.kind = scheme_kind_from_string(bundle.at("kind").get<std::string>());
    bundle.at("n_bs").get_to(loaded.scheme.n_bs);
    bundle.at("n_ms").get_to(loaded.scheme.n_ms);
    bundle.at("norms").get_to(loaded.scheme.norms);
    bundle.at("split").get_to(loaded.manifest);
    const auto ybar = bundle.at("ybar_train").get<std::vector<double>>();
    loaded.ybar_train = Eigen::Map<const Eigen::VectorXd>(ybar.data(),
                                                          static_cast<Eigen::Index>(ybar.size()));

    for (const auto &[name, slot] : model_slots()) {
        if (!bundle.at("models").contains(name))
            continue;
        const auto path = dir / bundle.at("models").at(name).get<std::string>();
        std::ifstream min(path);
        if (!min)
            throw std::runtime_error("cannot open model file: " + path.string());
        nlohmann::json mj;
        min >> mj;
        loaded.scheme.*slot = model_from_json(mj);
    }
    validate(loaded.scheme);
    return loaded;
}

} // namespace beamcast
