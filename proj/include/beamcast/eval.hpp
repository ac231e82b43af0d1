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
#include <charconv>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "beamcast/common.hpp"

namespace beamcast {

// Shortest round-trip decimal representation; used for all CSV output so
// emitted files re-parse losslessly and byte-stably.
inline std::string format_double(double v)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Statistical assessment of an estimator against the training sample variance.
struct EvalReport {
    double s_t = 0.0;    // sample variance of training outputs
    double eta_v = 0.0;  // mean squared deviation of test outputs from ybar_t
    double eta_nn = 0.0; // mean squared error of the estimator on the test set
    double rho_v = 0.0;  // eta_v / s_t
    double rho_nn = 0.0; // eta_nn / s_t
    int n_train = 0;
    int n_test = 0;
};

inline void to_json(nlohmann::json &j, const EvalReport &r)
{
    j = nlohmann::json{{"s_t", r.s_t},       {"eta_v", r.eta_v},     {"eta_nn", r.eta_nn},
                       {"rho_v", r.rho_v},   {"rho_nn", r.rho_nn},   {"n_train", r.n_train},
                       {"n_test", r.n_test}};
}

inline void from_json(const nlohmann::json &j, EvalReport &r)
{
    j.at("s_t").get_to(r.s_t);
    j.at("eta_v").get_to(r.eta_v);
    j.at("eta_nn").get_to(r.eta_nn);
    j.at("rho_v").get_to(r.rho_v);
    j.at("rho_nn").get_to(r.rho_nn);
    j.at("n_train").get_to(r.n_train);
    j.at("n_test").get_to(r.n_test);
}

// Outputs as matrix columns throughout.

inline Eigen::VectorXd mean_output(const Eigen::MatrixXd &outputs)
{
    if (outputs.cols() == 0)
        throw EmptyBatch("mean_output: no outputs");
    return outputs.rowwise().mean();
}

// S_t = 1/(N_t - 1) * sum_n ||y_n - ybar||^2.
inline double sample_variance(const Eigen::MatrixXd &train_outputs)
{
    if (train_outputs.cols() < 2)
        throw InsufficientSamples("sample_variance: need at least two outputs");
    const Eigen::VectorXd ybar = mean_output(train_outputs);
    const double ss = (train_outputs.colwise() - ybar).squaredNorm();
    return ss / static_cast<double>(train_outputs.cols() - 1);
}

// eta_v = 1/N_v * sum_n ||y_n - ybar_t||^2.
inline double baseline_deviation(const Eigen::MatrixXd &test_outputs, const Eigen::VectorXd &ybar)
{
    if (test_outputs.cols() == 0)
        throw EmptyBatch("baseline_deviation: no test outputs");
    if (test_outputs.rows() != ybar.size())
        throw DimensionMismatch("baseline_deviation: ybar size mismatch");
    return (test_outputs.colwise() - ybar).squaredNorm() /
           static_cast<double>(test_outputs.cols());
}

// eta_nn = 1/N_v * sum_n ||y_n - h(x_n)||^2, on raw (unthresholded) scores.
inline double nn_deviation(const Eigen::MatrixXd &test_outputs,
                           const Eigen::MatrixXd &predictions)
{
    if (test_outputs.cols() == 0)
        throw EmptyBatch("nn_deviation: no test outputs");
    if (test_outputs.rows() != predictions.rows() || test_outputs.cols() != predictions.cols())
        throw DimensionMismatch("nn_deviation: prediction shape mismatch");
    return (test_outputs - predictions).squaredNorm() / static_cast<double>(test_outputs.cols());
}

inline EvalReport make_report(double s_t, double eta_v, double eta_nn, int n_train, int n_test)
{
    if (!(s_t > 0.0))
        throw InsufficientSamples("make_report: sample variance must be positive for ratios");
    return {s_t, eta_v, eta_nn, eta_v / s_t, eta_nn / s_t, n_train, n_test};
}

// ROC over pooled (sample, bin) decisions: occupied bins are positives, a
// decision fires when score >= threshold. The sweep visits +inf plus every
// distinct score, so the curve always starts at (0,0) and ends at (1,1).
struct RocCurve {
    std::vector<double> thresholds;
    std::vector<std::pair<double, double>> points; // (p_f, p_d), ascending p_f
};

inline RocCurve roc_curve(const std::vector<double> &scores, const std::vector<int> &labels)
{
    if (scores.size() != labels.size())
        throw DimensionMismatch("roc_curve: scores and labels differ in length");
    std::size_t n_pos = 0, n_neg = 0;
    for (int l : labels)
        (l != 0 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw DegenerateLabels("roc_curve: need at least one positive and one negative decision");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b])
            return scores[a] > scores[b];
        return a < b;
    });

    RocCurve curve;
    curve.thresholds.push_back(std::numeric_limits<double>::infinity());
    curve.points.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] != 0 ? tp : fp)++;
            ++i;
        }
        curve.thresholds.push_back(s);
        curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                                  static_cast<double>(tp) / static_cast<double>(n_pos));
    }
    return curve;
}

inline RocCurve roc_curve(const Eigen::MatrixXd &scores, const Eigen::MatrixXd &labels)
{
    if (scores.rows() != labels.rows() || scores.cols() != labels.cols())
        throw DimensionMismatch("roc_curve: score and label matrices disagree");
    std::vector<double> s;
    std::vector<int> l;
    s.reserve(static_cast<std::size_t>(scores.size()));
    l.reserve(static_cast<std::size_t>(scores.size()));
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
        for (Eigen::Index r = 0; r < scores.rows(); ++r) {
            s.push_back(scores(r, c));
            l.push_back(labels(r, c) != 0.0 ? 1 : 0);
        }
    }
    return roc_curve(s, l);
}

// Detection probability of the curve at a given false-alarm rate; vertical
// segments take their upper point, straight interpolation elsewhere.
inline double interpolate_pd(const RocCurve &curve, double p_f_target)
{
    if (curve.points.empty())
        throw std::invalid_argument("interpolate_pd: empty curve");
    const double t = std::clamp(p_f_target, 0.0, 1.0);
    // collapse to the best p_d per distinct p_f (points are already sorted)
    std::vector<std::pair<double, double>> env;
    for (const auto &pt : curve.points) {
        if (!env.empty() && env.back().first == pt.first)
            env.back().second = std::max(env.back().second, pt.second);
        else
            env.push_back(pt);
    }
    if (t <= env.front().first)
        return env.front().second;
    for (std::size_t i = 1; i < env.size(); ++i) {
        if (t <= env[i].first) {
            const auto &[x1, y1] = env[i - 1];
            const auto &[x2, y2] = env[i];
            return y1 + (y2 - y1) * (t - x1) / (x2 - x1);
        }
    }
    return env.back().second;
}

struct PdComparison {
    double pd_a = 0.0;
    double pd_b = 0.0;
    int order = 0; // +1: a above b, -1: b above a, 0: tie
};

inline PdComparison compare_at_pf(const RocCurve &a, const RocCurve &b, double p_f_target)
{
    PdComparison c;
    c.pd_a = interpolate_pd(a, p_f_target);
    c.pd_b = interpolate_pd(b, p_f_target);
    c.order = (c.pd_a > c.pd_b) ? 1 : (c.pd_a < c.pd_b ? -1 : 0);
    return c;
}

inline void write_roc_csv(std::ostream &out, const RocCurve &curve)
{
    out << "threshold,p_f,p_d\n";
    for (std::size_t i = 0; i < curve.points.size(); ++i)
        out << format_double(curve.thresholds[i]) << ',' << format_double(curve.points[i].first)
            << ',' << format_double(curve.points[i].second) << '\n';
}

inline void write_combined_roc_csv(std::ostream &out,
                                   const std::vector<std::pair<std::string, RocCurve>> &curves)
{
    out << "scheme,threshold,p_f,p_d\n";
    for (const auto &[name, curve] : curves)
        for (std::size_t i = 0; i < curve.points.size(); ++i)
            out << name << ',' << format_double(curve.thresholds[i]) << ','
                << format_double(curve.points[i].first) << ','
                << format_double(curve.points[i].second) << '\n';
}

inline RocCurve read_roc_csv(std::istream &in)
{
    RocCurve curve;
    std::string line;
    if (!std::getline(in, line) || line != "threshold,p_f,p_d")
        throw std::invalid_argument("roc csv: bad header");
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw std::invalid_argument("roc csv: bad row: " + line);
        curve.thresholds.push_back(std::strtod(line.substr(0, c1).c_str(), nullptr));
        curve.points.emplace_back(std::strtod(line.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr),
                                  std::strtod(line.substr(c2 + 1).c_str(), nullptr));
    }
    return curve;
}

// RocCurve structural invariants; used by tests and by the report round trip.
inline void validate(const RocCurve &curve)
{
    if (curve.points.size() != curve.thresholds.size() || curve.points.size() < 2)
        throw std::invalid_argument("roc curve: malformed");
    if (curve.points.front() != std::pair<double, double>{0.0, 0.0})
        throw std::invalid_argument("roc curve: must start at (0,0)");
    if (curve.points.back() != std::pair<double, double>{1.0, 1.0})
        throw std::invalid_argument("roc curve: must end at (1,1)");
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        if (curve.points[i].first < curve.points[i - 1].first ||
            curve.points[i].second < curve.points[i - 1].second)
            throw std::invalid_argument("roc curve: not monotone");
    }
}

} // namespace beamcast
