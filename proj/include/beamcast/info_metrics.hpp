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
#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "beamcast/common.hpp"
#include "beamcast/eval.hpp"
#include "beamcast/features.hpp"

namespace beamcast {

// Plug-in (maximum-likelihood) information measures over discretized feature
// patterns. Feature vectors are reduced to binary bin-occupancy strings; that
// keeps the estimator exact and captures the angular geometry the features
// encode.

// Occupancy of an input vector: bit b set iff bin b holds a path (RSS
// feature > 0, delay feature < 1).
inline std::string discretize(const InputVector &input)
{
    std::string pattern(static_cast<std::size_t>(input.values.size()), '0');
    for (Eigen::Index i = 0; i < input.values.size(); ++i) {
        const bool occupied = (input.kind == FeatureKind::kRss) ? input.values(i) > 0.0
                                                                : input.values(i) < 1.0;
        if (occupied)
            pattern[static_cast<std::size_t>(i)] = '1';
    }
    return pattern;
}

inline std::string discretize_output(const OutputIndicator &output)
{
    std::string pattern(static_cast<std::size_t>(output.values.size()), '0');
    for (Eigen::Index i = 0; i < output.values.size(); ++i)
        if (output.values(i) != 0.0)
            pattern[static_cast<std::size_t>(i)] = '1';
    return pattern;
}

// Empirical joint distribution of (x-pattern, y-pattern) pairs.
struct PatternDistribution {
    std::map<std::pair<std::string, std::string>, std::size_t> joint_counts;
    std::size_t total = 0;

    void add(const std::string &x, const std::string &y)
    {
        ++joint_counts[{x, y}];
        ++total;
    }
};

inline PatternDistribution count_patterns(const std::vector<FeaturePair> &pairs)
{
    PatternDistribution dist;
    for (const auto &pair : pairs)
        dist.add(discretize(pair.input), discretize_output(pair.output));
    return dist;
}

// Shannon entropy in bits of empirical frequencies, with 0*log(0) == 0.
inline double entropy(const std::map<std::string, std::size_t> &counts)
{
    std::size_t total = 0;
    for (const auto &[pattern, count] : counts)
        total += count;
    if (total == 0)
        throw EmptyDistribution("entropy: no observations");
    double h = 0.0;
    for (const auto &[pattern, count] : counts) {
        if (count == 0)
            continue;
        const double p = static_cast<double>(count) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

struct MiResult {
    double h_y = 0.0;
    double h_y_given_x = 0.0;
    double i_xy = 0.0;
    double ratio = 0.0; // I/H(Y), defined as 1 when H(Y) = 0
    std::size_t n_samples = 0;
    std::size_t n_distinct_x = 0;
    bool ratio_by_convention = false; // H(Y) = 0, ratio pinned to 1
    bool sparse_x = false;            // distinct x-patterns exceed 10% of samples
};

// H(Y), H(Y|X) = sum_x p(x) H(Y|X=x), I = H(Y) - H(Y|X), and I/H(Y).
inline MiResult mutual_information(const PatternDistribution &dist)
{
    if (dist.total == 0)
        throw EmptyDistribution("mutual_information: empty distribution");

    std::map<std::string, std::size_t> y_counts;
    std::map<std::string, std::map<std::string, std::size_t>> by_x;
    for (const auto &[xy, count] : dist.joint_counts) {
        y_counts[xy.second] += count;
        by_x[xy.first][xy.second] += count;
    }

    MiResult r;
    r.n_samples = dist.total;
    r.n_distinct_x = by_x.size();
    r.h_y = entropy(y_counts);
    for (const auto &[x, counts] : by_x) {
        std::size_t cx = 0;
        for (const auto &[y, count] : counts)
            cx += count;
        const double px = static_cast<double>(cx) / static_cast<double>(dist.total);
        r.h_y_given_x += px * entropy(counts);
    }
    r.i_xy = r.h_y - r.h_y_given_x;
    if (r.h_y > 0.0) {
        r.ratio = std::clamp(r.i_xy / r.h_y, 0.0, 1.0);
    } else {
        r.ratio = 1.0;
        r.ratio_by_convention = true;
    }
    r.sparse_x = 10 * r.n_distinct_x > r.n_samples;
    return r;
}

struct MiSweepRow {
    int n_bs = 0;
    MiResult mi;
};

// Re-featurizes and re-discretizes the dataset at each codebook size; rows
// come out in ascending n_bs.
inline std::vector<MiSweepRow> mi_sweep(const std::vector<ChannelSample> &dataset,
                                        std::vector<int> n_bs_list, int n_ms, FeatureKind kind)
{
    if (dataset.empty())
        throw EmptyDataset("mi_sweep: dataset is empty");
    const FeatureNorms norms = compute_norms(dataset);
    std::sort(n_bs_list.begin(), n_bs_list.end());
    std::vector<MiSweepRow> rows;
    for (int n_bs : n_bs_list) {
        const auto pairs = featurize_dataset(dataset, norms, n_bs, n_ms, kind);
        rows.push_back({n_bs, mutual_information(count_patterns(pairs))});
    }
    return rows;
}

inline void write_mi_csv(std::ostream &out, const std::vector<MiSweepRow> &rows)
{
    out << "n_bs,h_y,h_y_given_x,i_xy,ratio,n_samples,n_distinct_x\n";
    for (const auto &row : rows)
        out << row.n_bs << ',' << format_double(row.mi.h_y) << ','
            << format_double(row.mi.h_y_given_x) << ',' << format_double(row.mi.i_xy) << ','
            << format_double(row.mi.ratio) << ',' << row.mi.n_samples << ','
            << row.mi.n_distinct_x << '\n';
}

} // namespace beamcast
