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

#include <cxxabi.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"

#include "beamcast/pipeline.hpp"

namespace {

std::string error_name(const std::exception &e)
{
    int status = 0;
    std::unique_ptr<char, void (*)(void *)> demangled(
        abi::__cxa_demangle(typeid(e).name(), nullptr, nullptr, &status), std::free);
    std::string name = (status == 0 && demangled) ? demangled.get() : typeid(e).name();
    if (const auto pos = name.rfind("::"); pos != std::string::npos)
        name = name.substr(pos + 2);
    return name;
}

void print_report(const beamcast::EvalReport &r)
{
    std::cout << "n_train=" << r.n_train << " n_test=" << r.n_test
              << " S_t=" << beamcast::format_double(r.s_t)
              << " eta_v=" << beamcast::format_double(r.eta_v)
              << " eta_nn=" << beamcast::format_double(r.eta_nn)
              << " rho_v=" << beamcast::format_double(r.rho_v)
              << " rho_nn=" << beamcast::format_double(r.rho_nn) << '\n';
}

} // namespace

int main(int argc, char **argv)
{
    using namespace beamcast;

    CLI::App app{"beamcast: synthetic multipath data, beam-bin features, and "
                 "neural estimators of user-side AoD bins"};
    app.require_subcommand(1);

    // generate -----------------------------------------------------------
    GenerateOptions gen;
    auto *cmd_generate = app.add_subcommand("generate", "trace a scene into a JSONL dataset");
    cmd_generate->add_option("--scene", gen.scene_path,
                             "scene JSON file (omit for the built-in desk-scale scene)");
    cmd_generate->add_option("--seed", gen.seed, "top-level pipeline seed");
    cmd_generate->add_option("--out", gen.out_path, "output dataset (JSON-Lines)")->required();
    cmd_generate->add_option("--emit-scene", gen.emit_scene_path,
                             "also write the scene that was used");

    // featurize ----------------------------------------------------------
    FeaturizeOptions feat;
    std::string feat_kind = "rss";
    auto *cmd_featurize =
        app.add_subcommand("featurize", "convert a dataset into input/output vector pairs");
    cmd_featurize->add_option("--data", feat.data_path, "dataset JSONL")->required();
    cmd_featurize->add_option("--kind", feat_kind, "feature kind: rss|delay")
        ->check(CLI::IsMember({"rss", "delay"}));
    cmd_featurize->add_option("--nbs", feat.n_bs, "number of AoA bins (BS codebook size)");
    cmd_featurize->add_option("--nms", feat.n_ms, "number of AoD bins (user codebook size)");
    cmd_featurize->add_option("--bs-id", feat.bs_id, "restrict to one BS (-1: all)");
    cmd_featurize->add_option("--out", feat.out_path, "output pairs (JSON-Lines)")->required();
    cmd_featurize->add_option("--norms", feat.norms_out_path, "sidecar JSON with the norms");

    // train ----------------------------------------------------------------
    TrainOptions tr;
    std::string tr_scheme = "rss";
    std::string tr_config_path;
    auto *cmd_train = app.add_subcommand("train", "split, featurize, train one scheme, evaluate");
    cmd_train->add_option("--data", tr.data_path, "dataset JSONL")->required();
    cmd_train->add_option("--scheme", tr_scheme, "scheme: rss|delay|seq|joint")
        ->check(CLI::IsMember({"rss", "delay", "seq", "joint"}));
    cmd_train->add_option("--out", tr.out_dir, "output bundle directory")->required();
    cmd_train->add_option("--seed", tr.seed, "top-level pipeline seed");
    cmd_train->add_option("--nbs", tr.n_bs, "number of AoA bins");
    cmd_train->add_option("--nms", tr.n_ms, "number of AoD bins");
    cmd_train->add_option("--split", tr.split_fraction, "training fraction in (0,1)");
    cmd_train->add_option("--bs-id", tr.bs_id, "restrict to one BS (-1: all)");
    cmd_train->add_option("--config", tr_config_path, "JSON file with training config");
    auto *opt_lambda = cmd_train->add_option("--lambda", tr.train.lambda, "L2 factor");
    auto *opt_lr = cmd_train->add_option("--lr", tr.train.learning_rate, "learning rate");
    auto *opt_iters = cmd_train->add_option("--iters", tr.train.max_iterations, "max iterations");
    auto *opt_tol = cmd_train->add_option("--tol", tr.train.convergence_tol,
                                          "relative cost-change stop tolerance");
    auto *opt_momentum = cmd_train->add_option("--momentum", tr.train.momentum,
                                               "momentum factor (0 = plain GD)");

    // evaluate -------------------------------------------------------------
    EvaluateOptions ev;
    auto *cmd_evaluate = app.add_subcommand("evaluate", "re-evaluate a bundle on its split");
    cmd_evaluate->add_option("--bundle", ev.bundle_dir, "bundle directory")->required();
    cmd_evaluate->add_option("--data", ev.data_path, "dataset JSONL")->required();
    cmd_evaluate->add_option("--bs-id", ev.bs_id, "restrict to one BS (-1: all)");
    cmd_evaluate->add_option("--out", ev.out_path, "report JSON output");

    // mi ---------------------------------------------------------------------
    MiOptions mi;
    std::string mi_kind = "rss";
    auto *cmd_mi = app.add_subcommand("mi", "entropy/mutual-information sweep over N_BS");
    cmd_mi->add_option("--data", mi.data_path, "dataset JSONL")->required();
    cmd_mi->add_option("--nbs-list", mi.n_bs_list, "codebook sizes to sweep")->delimiter(',');
    cmd_mi->add_option("--nms", mi.n_ms, "number of AoD bins");
    cmd_mi->add_option("--kind", mi_kind, "feature kind: rss|delay")
        ->check(CLI::IsMember({"rss", "delay"}));
    cmd_mi->add_option("--bs-id", mi.bs_id, "restrict to one BS (-1: all)");
    cmd_mi->add_option("--out", mi.out_path, "output CSV")->required();

    // report --------------------------------------------------------------
    ReportOptions rep;
    auto *cmd_report = app.add_subcommand("report", "ROC curves plus the SA baseline comparison");
    cmd_report->add_option("--bundle", rep.bundle_dirs, "bundle directory (repeatable)")
        ->required();
    cmd_report->add_option("--data", rep.data_path, "dataset JSONL")->required();
    cmd_report->add_option("--bs-id", rep.bs_id, "restrict to one BS (-1: all)");
    cmd_report->add_option("--pf", rep.p_f_target, "false-alarm rate for the comparison");
    cmd_report->add_option("--out", rep.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    }

    try {
        if (cmd_generate->parsed()) {
            GenerateSummary s = run_generate(gen);
            std::cout << "generated " << s.n_samples << " samples";
            if (s.omitted_links > 0)
                std::cout << " (" << s.omitted_links << " links omitted: no path above floor)";
            std::cout << " -> " << gen.out_path << '\n';
        } else if (cmd_featurize->parsed()) {
            feat.kind = feature_kind_from_string(feat_kind);
            std::size_t n = run_featurize(feat);
            std::cout << "featurized " << n << " samples -> " << feat.out_path << '\n';
        } else if (cmd_train->parsed()) {
            if (!tr_config_path.empty()) {
                std::ifstream in(tr_config_path);
                if (!in)
                    throw std::runtime_error("cannot open config file: " + tr_config_path);
                nlohmann::json j;
                in >> j;
                TrainConfig from_file = j.get<TrainConfig>();
                // explicit flags win over the config file
                if (!*opt_lambda)
                    tr.train.lambda = from_file.lambda;
                if (!*opt_lr)
                    tr.train.learning_rate = from_file.learning_rate;
                if (!*opt_iters)
                    tr.train.max_iterations = from_file.max_iterations;
                if (!*opt_tol)
                    tr.train.convergence_tol = from_file.convergence_tol;
                if (!*opt_momentum)
                    tr.train.momentum = from_file.momentum;
            }
            tr.scheme = scheme_kind_from_string(tr_scheme);
            EvalReport report = run_train(tr);
            std::cout << "scheme=" << tr_scheme << " ";
            print_report(report);
            std::cout << "bundle -> " << tr.out_dir << '\n';
        } else if (cmd_evaluate->parsed()) {
            EvalReport report = run_evaluate(ev);
            print_report(report);
        } else if (cmd_mi->parsed()) {
            mi.kind = feature_kind_from_string(mi_kind);
            auto rows = run_mi(mi);
            for (const auto &row : rows) {
                std::cout << "n_bs=" << row.n_bs << " H(Y)=" << format_double(row.mi.h_y)
                          << " H(Y|X)=" << format_double(row.mi.h_y_given_x)
                          << " I(Y;X)=" << format_double(row.mi.i_xy)
                          << " ratio=" << format_double(row.mi.ratio) << '\n';
                if (row.mi.sparse_x)
                    std::cerr << "warning: n_bs=" << row.n_bs << " has " << row.mi.n_distinct_x
                              << " distinct input patterns over " << row.mi.n_samples
                              << " samples; plug-in estimates are optimistic\n";
            }
        } else if (cmd_report->parsed()) {
            ReportSummary s = run_report(rep);
            for (const auto &[name, result] : s.comparison.at("schemes").items())
                std::cout << name << ": P_D@" << format_double(rep.p_f_target) << " = "
                          << format_double(result.at("p_d").get<double>()) << " (SA baseline "
                          << format_double(result.at("p_d_sa").get<double>()) << ")\n";
        }
    } catch (const std::exception &e) {
        nlohmann::json err = {{"error", error_name(e)}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        return 1;
    }
    return 0;
}
