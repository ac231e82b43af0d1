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
#include <complex>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "beamcast/common.hpp"
#include "beamcast/records.hpp"
#include "beamcast/rng.hpp"

namespace beamcast {

// Uniform linear array: N elements with spacing d at carrier wavelength lambda.
struct ArrayConfig {
    int num_elements = 1;
    double element_spacing = 0.0; // d, meters
    double wavelength = 0.0;      // lambda, meters

    static ArrayConfig half_wavelength(int num_elements, double wavelength)
    {
        return {num_elements, 0.5 * wavelength, wavelength};
    }
};

inline void validate(const ArrayConfig &array)
{
    if (array.num_elements < 1)
        throw std::invalid_argument("ArrayConfig: num_elements must be >= 1");
    if (!(array.element_spacing > 0.0))
        throw std::invalid_argument("ArrayConfig: element_spacing must be > 0");
    if (!(array.wavelength > 0.0))
        throw std::invalid_argument("ArrayConfig: wavelength must be > 0");
}

// Unitary matrix whose n-th column is the array response of the n-th virtual
// angle bin; for a ULA that is exactly the N-point DFT matrix.
struct BeamspaceCodebook {
    ArrayConfig array;
    Eigen::MatrixXcd columns;
};

struct ComplexChannel {
    Eigen::MatrixXcd matrix; // N_BS x N_MS
    double frequency_hz = 0.0;
};

// Array steering vector: entry k = exp(j*k*(2*pi/lambda)*d*sin(angle)) / sqrt(N).
inline Eigen::VectorXcd steering_vector(const ArrayConfig &array, double angle_rad)
{
    validate(array);
    const int n = array.num_elements;
    const double step = kTwoPi / array.wavelength * array.element_spacing * std::sin(angle_rad);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Eigen::VectorXcd v(n);
    for (int k = 0; k < n; ++k)
        v(k) = std::polar(scale, step * static_cast<double>(k));
    return v;
}

// N-point unitary DFT codebook: column n holds entry k = exp(j*2*pi*k*n/N) / sqrt(N).
inline BeamspaceCodebook dft_codebook(const ArrayConfig &array)
{
    validate(array);
    const int n = array.num_elements;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Eigen::MatrixXcd m(n, n);
    for (int col = 0; col < n; ++col)
        for (int row = 0; row < n; ++row)
            m(row, col) = std::polar(scale, kTwoPi * static_cast<double>(row) *
                                                static_cast<double>(col) / static_cast<double>(n));
    return {array, m};
}

// Virtual angle bin of a physical angle: the DFT column whose spatial frequency
// 2*pi*n/N is nearest the per-element phase pi*sin(angle) of a half-wavelength
// ULA, i.e. round(N*sin(angle)/2) mod N. Exact .5 ties round toward even
// (nearbyint under the default FE_TONEAREST mode).
inline int angle_to_bin(int num_bins, double angle_rad)
{
    if (num_bins < 1)
        throw std::invalid_argument("angle_to_bin: num_bins must be >= 1");
    const double raw = std::nearbyint(0.5 * static_cast<double>(num_bins) * std::sin(angle_rad));
    long idx = static_cast<long>(raw) % num_bins;
    if (idx < 0)
        idx += num_bins;
    return static_cast<int>(idx);
}

// Multipath channel matrix H(f) = sum_l alpha_l * a_BS(theta_l) * a_MS(phi_l)^H
// * exp(j*2*pi*f*tau_l), with the complex gains alpha_l given explicitly.
inline ComplexChannel assemble_channel(std::span<const PathRecord> paths,
                                       std::span<const std::complex<double>> gains,
                                       const ArrayConfig &bs_array, const ArrayConfig &ms_array,
                                       double frequency_hz)
{
    if (paths.empty())
        throw EmptyPathList("assemble_channel: path list is empty");
    if (gains.size() != paths.size())
        throw DimensionMismatch("assemble_channel: one complex gain per path required");
    validate(bs_array);
    validate(ms_array);

    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(bs_array.num_elements, ms_array.num_elements);
    for (std::size_t l = 0; l < paths.size(); ++l) {
        const std::complex<double> phase =
            std::polar(1.0, kTwoPi * frequency_hz * paths[l].delay_s);
        const Eigen::VectorXcd a_bs = steering_vector(bs_array, paths[l].aoa_rad);
        const Eigen::VectorXcd a_ms = steering_vector(ms_array, paths[l].aod_rad);
        h.noalias() += (gains[l] * phase) * (a_bs * a_ms.adjoint());
    }
    return {std::move(h), frequency_hz};
}

// Same assembly with gain magnitudes taken from the stored RSS (|alpha| =
// 10^(rss_db/20)) and phases drawn uniformly from [0, 2*pi) off `phase_seed`.
// The dataset keeps only RSS, so phases exist solely for channel-level checks.
inline ComplexChannel assemble_channel(std::span<const PathRecord> paths,
                                       const ArrayConfig &bs_array, const ArrayConfig &ms_array,
                                       double frequency_hz, std::uint64_t phase_seed)
{
    if (paths.empty())
        throw EmptyPathList("assemble_channel: path list is empty");
    SplitMix64 rng(phase_seed);
    std::vector<std::complex<double>> gains;
    gains.reserve(paths.size());
    for (const auto &p : paths)
        gains.push_back(std::polar(std::pow(10.0, p.rss_db / 20.0), rng.uniform(0.0, kTwoPi)));
    return assemble_channel(paths, gains, bs_array, ms_array, frequency_hz);
}

// Effective channel after both ends apply their DFT beamforming matrices:
// H_eff = W_BS^H * H * W_MS. Unitary on both sides, so the Frobenius norm of
// H is preserved.
inline Eigen::MatrixXcd effective_channel(const ComplexChannel &channel,
                                          const BeamspaceCodebook &bs_codebook,
                                          const BeamspaceCodebook &ms_codebook)
{
    if (bs_codebook.columns.rows() != channel.matrix.rows() ||
        ms_codebook.columns.rows() != channel.matrix.cols())
        throw DimensionMismatch("effective_channel: codebook sizes do not match the channel");
    return bs_codebook.columns.adjoint() * channel.matrix * ms_codebook.columns;
}

} // namespace beamcast
