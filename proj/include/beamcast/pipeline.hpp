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

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "beamcast/common.hpp"
#include "beamcast/eval.hpp"
#include "beamcast/features.hpp"
#include "beamcast/info_metrics.hpp"
#include "beamcast/records.hpp"
#include "beamcast/rng.hpp"
#include "beamcast/scene.hpp"
#include "beamcast/schemes.hpp"
#include "beamcast/trace.hpp"

// Stage orchestration behind the CLI subcommands. One top-level seed fans out
// to named sub-streams ("split", "train") so stages rerun independently with
// identical results.

namespace beamcast {

inline std::vector<ChannelSample> filter_by_bs(std::vector<ChannelSample> samples, int bs_id)
{
    if (bs_id < 0)
        return samples;
    std::vector<ChannelSample> kept;
    for (auto &s : samples)
        if (s.bs_id == bs_id)
            kept.push_back(std::move(s));
    if (kept.empty())
        throw InsufficientData("no samples for bs_id " + std::to_string(bs_id));
    return kept;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
    std::string scene_path; // empty: built-in desk-scale scene
    std::uint64_t seed = 0;
    std::string out_path;
    std::string emit_scene_path; // optional copy of the scene actually used
};

struct GenerateSummary {
    std::size_t n_samples = 0;
    std::size_t omitted_links = 0;
};

inline GenerateSummary run_generate(const GenerateOptions &opts)
{
    const Scene scene = opts.scene_path.empty() ? make_default_scene() : load_scene(opts.scene_path);
    validate_scene(scene);
    DatasetResult result = generate_dataset(scene, opts.seed);
    write_dataset_jsonl(opts.out_path, result.samples);
    if (!opts.emit_scene_path.empty())
        save_scene(opts.emit_scene_path, scene);
    return {result.samples.size(), result.omitted_links};
}

// ---------------------------------------------------------------------------
// featurize

struct FeaturizeOptions {
    std::string data_path;
    int n_bs = 100;
    int n_ms = 10;
    FeatureKind kind = FeatureKind::kRss;
    int bs_id = -1; // -1: all base stations
    std::string out_path;
    std::string norms_out_path; // optional sidecar
};

inline std::size_t run_featurize(const FeaturizeOptions &opts)
{
    const auto dataset = filter_by_bs(read_dataset_jsonl(opts.data_path), opts.bs_id);
    // norms over the whole featurized dataset; the train stage computes its
    // own training-split norms instead
    const FeatureNorms norms = compute_norms(dataset);
    const auto pairs = featurize_dataset(dataset, norms, opts.n_bs, opts.n_ms, opts.kind);
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open output file: " + opts.out_path);
    write_pairs_jsonl(out, pairs);
    if (!opts.norms_out_path.empty()) {
        std::ofstream nout(opts.norms_out_path, std::ios::binary);
        nout << nlohmann::json(norms).dump(2) << '\n';
    }
    return pairs.size();
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
    std::string data_path;
    SchemeKind scheme = SchemeKind::kRss;
    int n_bs = 100;
    int n_ms = 10;
    double split_fraction = 0.95;
    std::uint64_t seed = 0; // top-level pipeline seed
    int bs_id = -1;
    TrainConfig train; // init_seed is derived from `seed`, not taken from here
    std::string out_dir;
};

inline void write_cost_history_csv(const std::filesystem::path &path,
                                   const std::vector<ModelRun> &runs)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open cost history file: " + path.string());
    out << "model,iteration,cost\n";
    for (const auto &run : runs)
        for (std::size_t i = 0; i < run.cost_history.size(); ++i)
            out << run.name << ',' << i << ',' << format_double(run.cost_history[i]) << '\n';
}

inline EvalReport run_train(const TrainOptions &opts)
{
    if (opts.n_bs < opts.n_ms || opts.n_ms < 1)
        throw std::invalid_argument("train: require n_bs >= n_ms >= 1");
    const auto dataset = filter_by_bs(read_dataset_jsonl(opts.data_path), opts.bs_id);

    SchemeTrainOptions train_opts;
    train_opts.n_bs = opts.n_bs;
    train_opts.n_ms = opts.n_ms;
    train_opts.train = opts.train;
    train_opts.train.init_seed = derive_seed(opts.seed, "train");

    const SplitSpec split{opts.split_fraction, derive_seed(opts.seed, "split")};
    SchemeTraining training = train_scheme(opts.scheme, dataset, split, train_opts);

    auto [train_set, test_set] = apply_split(dataset, training.manifest);
    const EvalReport report = evaluate_scheme(training.scheme, train_set, test_set);

    const std::filesystem::path dir(opts.out_dir);
    nlohmann::json meta = {{"seed", opts.seed},
                           {"bs_id", opts.bs_id},
                           {"train_config", train_opts.train}};
    save_bundle(dir, training, meta);
    write_cost_history_csv(dir / "cost_history.csv", training.runs);

    nlohmann::json rj = report;
    rj["scheme"] = to_string(opts.scheme);
    rj["seed"] = opts.seed;
    rj["n_bs"] = opts.n_bs;
    rj["n_ms"] = opts.n_ms;
    std::ofstream out(dir / "report.json", std::ios::binary);
    out << rj.dump(2) << '\n';
    return report;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
    std::string bundle_dir;
    std::string data_path;
    int bs_id = -1;
    std::string out_path; // optional; empty = no file, caller prints
};

inline EvalReport run_evaluate(const EvaluateOptions &opts)
{
    const LoadedBundle bundle = load_bundle(opts.bundle_dir);
    const auto dataset = filter_by_bs(read_dataset_jsonl(opts.data_path), opts.bs_id);
    auto [train_set, test_set] = apply_split(dataset, bundle.manifest);
    const EvalReport report = evaluate_scheme(bundle.scheme, train_set, test_set);
    if (!opts.out_path.empty()) {
        nlohmann::json rj = report;
        rj["scheme"] = to_string(bundle.scheme.kind);
        std::ofstream out(opts.out_path, std::ios::binary);
        out << rj.dump(2) << '\n';
    }
    return report;
}

// ---------------------------------------------------------------------------
// mi

struct MiOptions {
    std::string data_path;
    std::vector<int> n_bs_list{25, 50, 100};
    int n_ms = 10;
    FeatureKind kind = FeatureKind::kRss;
    int bs_id = -1;
    std::string out_path;
};

inline std::vector<MiSweepRow> run_mi(const MiOptions &opts)
{
    const auto dataset = filter_by_bs(read_dataset_jsonl(opts.data_path), opts.bs_id);
    auto rows = mi_sweep(dataset, opts.n_bs_list, opts.n_ms, opts.kind);
    if (!opts.out_path.empty()) {
        std::ofstream out(opts.out_path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot open output file: " + opts.out_path);
        write_mi_csv(out, rows);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// report: per-scheme ROC curves, the SA baseline curve, and the comparison
// of detection probabilities at a fixed small false-alarm rate.

struct ReportOptions {
    std::vector<std::string> bundle_dirs;
    std::string data_path;
    int bs_id = -1;
    double p_f_target = 0.1;
    std::string out_dir;
};

struct ReportSummary {
    std::vector<std::pair<std::string, RocCurve>> curves; // schemes then "sa"
    nlohmann::json comparison;
};

inline ReportSummary run_report(const ReportOptions &opts)
{
    if (opts.bundle_dirs.empty())
        throw std::invalid_argument("report: at least one bundle required");

    std::vector<LoadedBundle> bundles;
    for (const auto &dir : opts.bundle_dirs)
        bundles.push_back(load_bundle(dir));
    for (std::size_t i = 1; i < bundles.size(); ++i) {
        if (bundles[i].manifest.train_keys != bundles[0].manifest.train_keys ||
            bundles[i].manifest.test_keys != bundles[0].manifest.test_keys)
            throw std::invalid_argument("report: bundles were trained on different splits");
        if (bundles[i].scheme.n_ms != bundles[0].scheme.n_ms)
            throw DimensionMismatch("report: bundles disagree on n_ms");
    }

    const auto dataset = filter_by_bs(read_dataset_jsonl(opts.data_path), opts.bs_id);
    auto [train_set, test_set] = apply_split(dataset, bundles[0].manifest);
    const int n_ms = bundles[0].scheme.n_ms;
    const Eigen::MatrixXd labels = output_matrix(test_set, n_ms);

    ReportSummary summary;
    for (const auto &bundle : bundles) {
        const Eigen::MatrixXd scores = score_batch(bundle.scheme, test_set);
        summary.curves.emplace_back(to_string(bundle.scheme.kind), roc_curve(scores, labels));
    }
    const Eigen::MatrixXd sa_scores = bundles[0].ybar_train.replicate(1, labels.cols());
    summary.curves.emplace_back("sa", roc_curve(sa_scores, labels));

    const RocCurve &sa = summary.curves.back().second;
    nlohmann::json comparison;
    comparison["p_f"] = opts.p_f_target;
    nlohmann::json schemes = nlohmann::json::object();
    for (std::size_t i = 0; i + 1 < summary.curves.size(); ++i) {
        const auto &[name, curve] = summary.curves[i];
        const PdComparison cmp = compare_at_pf(curve, sa, opts.p_f_target);
        schemes[name] = {{"p_d", cmp.pd_a},
                         {"p_d_sa", cmp.pd_b},
                         {"above_baseline", cmp.order > 0}};
    }
    comparison["schemes"] = std::move(schemes);
    summary.comparison = std::move(comparison);

    if (!opts.out_dir.empty()) {
        const std::filesystem::path dir(opts.out_dir);
        std::filesystem::create_directories(dir);
        for (const auto &[name, curve] : summary.curves) {
            std::ofstream out(dir / ("roc_" + name + ".csv"), std::ios::binary);
            write_roc_csv(out, curve);
        }
        std::ofstream combined(dir / "roc_combined.csv", std::ios::binary);
        write_combined_roc_csv(combined, summary.curves);
        std::ofstream cmp(dir / "compare_pf.json", std::ios::binary);
        cmp << summary.comparison.dump(2) << '\n';
    }
    return summary;
}

} // namespace beamcast
