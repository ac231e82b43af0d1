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

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "beamcast/beamspace.hpp"
#include "beamcast/common.hpp"
#include "beamcast/records.hpp"

namespace beamcast {

enum class FeatureKind { kRss, kDelay };

inline std::string to_string(FeatureKind kind)
{
    return kind == FeatureKind::kRss ? "rss" : "delay";
}

inline FeatureKind feature_kind_from_string(const std::string &s)
{
    if (s == "rss")
        return FeatureKind::kRss;
    if (s == "delay")
        return FeatureKind::kDelay;
    throw std::invalid_argument("unknown feature kind: " + s);
}

// Dataset-wide extrema used by the feature normalizations.
struct FeatureNorms {
    double r_min = 0.0;   // dB
    double r_max = 0.0;   // dB
    double tau_min = 0.0; // seconds
    double tau_max = 0.0; // seconds
};

// AoA-binned feature vector observed at the BS; entries in [0, 1].
struct InputVector {
    Eigen::VectorXd values;
    FeatureKind kind = FeatureKind::kRss;
};

// AoD-bin occupancy at the user; entries exactly 0.0 or 1.0.
struct OutputIndicator {
    Eigen::VectorXd values;
};

struct FeaturePair {
    InputVector input;
    OutputIndicator output;
};

inline FeatureNorms compute_norms(const std::vector<ChannelSample> &dataset)
{
    FeatureNorms n{1e300, -1e300, 1e300, -1e300};
    std::size_t total_paths = 0;
    for (const auto &sample : dataset) {
        for (const auto &p : sample.paths) {
            n.r_min = std::min(n.r_min, p.rss_db);
            n.r_max = std::max(n.r_max, p.rss_db);
            n.tau_min = std::min(n.tau_min, p.delay_s);
            n.tau_max = std::max(n.tau_max, p.delay_s);
            ++total_paths;
        }
    }
    if (total_paths == 0)
        throw EmptyDataset("compute_norms: dataset holds no paths");
    return n;
}

// RSS feature: bin b holds (r - r_min)/(r_max - r_min) of the strongest path
// whose AoA maps to b; empty bins hold 0. Values are clamped to [0, 1] so
// test-split paths outside the training extrema stay in range. A path at
// exactly r_min yields 0 and is indistinguishable from an empty bin.
inline InputVector rss_input(const ChannelSample &sample, const FeatureNorms &norms, int n_bs)
{
    if (!(norms.r_max > norms.r_min))
        throw DegenerateNorms("rss_input: r_max must exceed r_min");
    Eigen::VectorXd strongest = Eigen::VectorXd::Constant(n_bs, -1e300);
    for (const auto &p : sample.paths) {
        const int bin = angle_to_bin(n_bs, p.aoa_rad);
        strongest(bin) = std::max(strongest(bin), p.rss_db);
    }
    Eigen::VectorXd values = Eigen::VectorXd::Zero(n_bs);
    for (int b = 0; b < n_bs; ++b) {
        if (strongest(b) == -1e300)
            continue;
        const double v = (strongest(b) - norms.r_min) / (norms.r_max - norms.r_min);
        values(b) = std::clamp(v, 0.0, 1.0);
    }
    return {std::move(values), FeatureKind::kRss};
}

// Delay feature: bin b holds (tau - tau_min)/(2*tau_max - tau_min) of the
// earliest path in b; empty bins hold 1, the value of a fictitious delay of
// 2*tau_max marking non-existent paths.
inline InputVector delay_input(const ChannelSample &sample, const FeatureNorms &norms, int n_bs)
{
    if (!(norms.tau_min > 0.0) || !(norms.tau_max >= norms.tau_min))
        throw DegenerateNorms("delay_input: require 0 < tau_min <= tau_max");
    Eigen::VectorXd earliest = Eigen::VectorXd::Constant(n_bs, 1e300);
    for (const auto &p : sample.paths) {
        const int bin = angle_to_bin(n_bs, p.aoa_rad);
        earliest(bin) = std::min(earliest(bin), p.delay_s);
    }
    Eigen::VectorXd values = Eigen::VectorXd::Ones(n_bs);
    for (int b = 0; b < n_bs; ++b) {
        if (earliest(b) == 1e300)
            continue;
        const double v = (earliest(b) - norms.tau_min) / (2.0 * norms.tau_max - norms.tau_min);
        values(b) = std::clamp(v, 0.0, 1.0);
    }
    return {std::move(values), FeatureKind::kDelay};
}

// AoD-bin indicator: entry b is 1 iff some path departs into bin b.
inline OutputIndicator aod_indicator(const ChannelSample &sample, int n_ms)
{
    if (sample.paths.empty())
        throw EmptyPathList("aod_indicator: sample has no paths");
    Eigen::VectorXd values = Eigen::VectorXd::Zero(n_ms);
    for (const auto &p : sample.paths)
        values(angle_to_bin(n_ms, p.aod_rad)) = 1.0;
    return {std::move(values)};
}

inline std::vector<FeaturePair> featurize_dataset(const std::vector<ChannelSample> &dataset,
                                                  const FeatureNorms &norms, int n_bs, int n_ms,
                                                  FeatureKind kind)
{
    std::vector<FeaturePair> pairs;
    pairs.reserve(dataset.size());
    for (const auto &sample : dataset) {
        InputVector in = (kind == FeatureKind::kRss) ? rss_input(sample, norms, n_bs)
                                                     : delay_input(sample, norms, n_bs);
        pairs.push_back({std::move(in), aod_indicator(sample, n_ms)});
    }
    return pairs;
}

inline void to_json(nlohmann::json &j, const FeatureNorms &n)
{
    j = nlohmann::json{
        {"r_min", n.r_min}, {"r_max", n.r_max}, {"tau_min", n.tau_min}, {"tau_max", n.tau_max}};
}

inline void from_json(const nlohmann::json &j, FeatureNorms &n)
{
    j.at("r_min").get_to(n.r_min);
    j.at("r_max").get_to(n.r_max);
    j.at("tau_min").get_to(n.tau_min);
    j.at("tau_max").get_to(n.tau_max);
}

inline void write_pairs_jsonl(std::ostream &out, const std::vector<FeaturePair> &pairs)
{
    for (const auto &pair : pairs) {
        nlohmann::json j;
        j["input"] = std::vector<double>(pair.input.values.begin(), pair.input.values.end());
        std::vector<int> output(pair.output.values.size());
        for (Eigen::Index i = 0; i < pair.output.values.size(); ++i)
            output[static_cast<std::size_t>(i)] = static_cast<int>(pair.output.values(i));
        j["output"] = output;
        j["kind"] = to_string(pair.input.kind);
        j["n_bs"] = pair.input.values.size();
        j["n_ms"] = pair.output.values.size();
        out << j.dump() << '\n';
    }
}

} // namespace beamcast
