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
#include <complex>

#include "beamcast/beamspace.hpp"

using namespace beamcast;

namespace {

// Element-by-element evaluation of the steering formula, independent of the
// library path.
Eigen::VectorXcd steering_oracle(int n, double spacing, double wavelength, double angle)
{
    Eigen::VectorXcd v(n);
    for (int k = 0; k < n; ++k) {
        double phase = static_cast<double>(k) * (2.0 * kPi / wavelength) * spacing * std::sin(angle);
        v(k) = std::exp(std::complex<double>(0.0, phase)) / std::sqrt(static_cast<double>(n));
    }
    return v;
}

} // namespace

TEST_CASE("steering_vector - broadside collapses all phases")
{
    auto arr = ArrayConfig::half_wavelength(4, 0.01);
    Eigen::VectorXcd v = steering_vector(arr, 0.0);
    REQUIRE(v.size() == 4);
    for (int k = 0; k < 4; ++k) {
        CHECK(v(k).real() == Catch::Approx(0.5).margin(1e-15));
        CHECK(v(k).imag() == Catch::Approx(0.0).margin(1e-15));
    }
}

TEST_CASE("steering_vector - endfire gives alternating signs for N=2")
{
    auto arr = ArrayConfig::half_wavelength(2, 0.01);
    Eigen::VectorXcd v = steering_vector(arr, kPi / 2.0);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(v(0) - std::complex<double>(s, 0.0)) < 1e-12);
    CHECK(std::abs(v(1) - std::complex<double>(-s, 0.0)) < 1e-12);
}

TEST_CASE("steering_vector - matches element-wise formula oracle")
{
    auto arr = ArrayConfig::half_wavelength(8, 0.0107);
    Eigen::VectorXcd got = steering_vector(arr, 0.4);
    Eigen::VectorXcd want = steering_oracle(8, arr.element_spacing, arr.wavelength, 0.4);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("steering_vector - unit norm for all angles")
{
    auto arr = ArrayConfig::half_wavelength(16, 0.0107);
    SplitMix64 rng(123);
    for (int i = 0; i < 200; ++i) {
        double angle = rng.uniform(0.0, kTwoPi);
        CHECK(std::abs(steering_vector(arr, angle).norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("dft_codebook - degenerate and 2-point cases")
{
    auto cb1 = dft_codebook(ArrayConfig::half_wavelength(1, 0.01));
    REQUIRE(cb1.columns.rows() == 1);
    CHECK(std::abs(cb1.columns(0, 0) - std::complex<double>(1.0, 0.0)) < 1e-15);

    auto cb2 = dft_codebook(ArrayConfig::half_wavelength(2, 0.01));
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(cb2.columns(0, 0) - std::complex<double>(s, 0.0)) < 1e-12);
    CHECK(std::abs(cb2.columns(1, 0) - std::complex<double>(s, 0.0)) < 1e-12);
    CHECK(std::abs(cb2.columns(0, 1) - std::complex<double>(s, 0.0)) < 1e-12);
    CHECK(std::abs(cb2.columns(1, 1) - std::complex<double>(-s, 0.0)) < 1e-12);
}

TEST_CASE("dft_codebook - unitarity and unit-norm columns")
{
    for (int n : {2, 10, 100}) {
        auto cb = dft_codebook(ArrayConfig::half_wavelength(n, 0.0107));
        Eigen::MatrixXcd gram = cb.columns.adjoint() * cb.columns;
        gram -= Eigen::MatrixXcd::Identity(n, n);
        CHECK(gram.cwiseAbs().maxCoeff() < 1e-10);
        for (int c = 0; c < n; ++c)
            CHECK(std::abs(cb.columns.col(c).norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("angle_to_bin - pinned mappings")
{
    CHECK(angle_to_bin(100, 0.0) == 0);
    CHECK(angle_to_bin(100, kPi / 6.0) == 25);
    // sin(pi + 0.02) ~ -0.02 -> round(-1) -> wraps to bin 99
    CHECK(angle_to_bin(100, kPi + 0.02) == 99);
}

TEST_CASE("angle_to_bin - front-back ambiguity is inherent")
{
    SplitMix64 rng(77);
    for (int i = 0; i < 500; ++i) {
        double angle = rng.uniform(0.0, kTwoPi);
        int n = 1 + static_cast<int>(rng.next_below(128));
        CHECK(angle_to_bin(n, angle) == angle_to_bin(n, wrap_angle(kPi - angle)));
    }
}

TEST_CASE("angle_to_bin - exact half ties round toward even")
{
    // sin(asin(x)) == x for these exactly representable values on glibc.
    double a1 = std::asin(0.01); // 100*sin/2 = 0.5 -> bin 0
    double a3 = std::asin(0.03); // 100*sin/2 = 1.5 -> bin 2
    REQUIRE(std::sin(a1) == 0.01);
    REQUIRE(std::sin(a3) == 0.03);
    CHECK(angle_to_bin(100, a1) == 0);
    CHECK(angle_to_bin(100, a3) == 2);
}

TEST_CASE("assemble_channel - single path with unit phase factor")
{
    // f*tau is exactly 1 for dyadic f = 2^28 Hz, tau = 2^-28 s.
    const double f = 268435456.0;
    PathRecord p{0.0, 1.0 / f, 0.7, 1.3, 0};
    std::complex<double> gain(1.0, 0.0);
    auto bs = ArrayConfig::half_wavelength(4, 0.0107);
    auto ms = ArrayConfig::half_wavelength(3, 0.0107);

    auto ch = assemble_channel(std::span(&p, 1), std::span(&gain, 1), bs, ms, f);
    Eigen::MatrixXcd want = steering_vector(bs, p.aoa_rad) * steering_vector(ms, p.aod_rad).adjoint();
    CHECK((ch.matrix - want).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("assemble_channel - opposite gains cancel")
{
    PathRecord p{0.0, 3e-9, 0.7, 1.3, 0};
    std::vector<PathRecord> paths{p, p};
    std::vector<std::complex<double>> gains{{0.8, 0.3}, {-0.8, -0.3}};
    auto bs = ArrayConfig::half_wavelength(4, 0.0107);
    auto ms = ArrayConfig::half_wavelength(4, 0.0107);
    auto ch = assemble_channel(paths, gains, bs, ms, 28e9);
    CHECK(ch.matrix.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("assemble_channel - matches entrywise double-loop oracle")
{
    SplitMix64 rng(2024);
    auto bs = ArrayConfig::half_wavelength(6, 0.0107);
    auto ms = ArrayConfig::half_wavelength(5, 0.0107);
    const double f = 28e9;

    std::vector<PathRecord> paths;
    std::vector<std::complex<double>> gains;
    for (int l = 0; l < 3; ++l) {
        paths.push_back({rng.uniform(-120.0, -80.0), rng.uniform(1e-7, 9e-7),
                         rng.uniform(0.0, kTwoPi), rng.uniform(0.0, kTwoPi), 0});
        gains.push_back(std::polar(rng.uniform(0.1, 2.0), rng.uniform(0.0, kTwoPi)));
    }

    auto ch = assemble_channel(paths, gains, bs, ms, f);

    // Independent entrywise evaluation of the sum formula.
    Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(6, 5);
    for (int p = 0; p < 6; ++p) {
        for (int q = 0; q < 5; ++q) {
            std::complex<double> acc(0.0, 0.0);
            for (std::size_t l = 0; l < paths.size(); ++l) {
                auto a_bs = steering_oracle(6, bs.element_spacing, bs.wavelength, paths[l].aoa_rad);
                auto a_ms = steering_oracle(5, ms.element_spacing, ms.wavelength, paths[l].aod_rad);
                acc += gains[l] * a_bs(p) * std::conj(a_ms(q)) *
                       std::exp(std::complex<double>(0.0, kTwoPi * f * paths[l].delay_s));
            }
            want(p, q) = acc;
        }
    }
    double rel = (ch.matrix - want).norm() / want.norm();
    CHECK(rel < 1e-12);
}

TEST_CASE("assemble_channel - empty path list throws")
{
    auto arr = ArrayConfig::half_wavelength(4, 0.0107);
    std::vector<PathRecord> none;
    CHECK_THROWS_AS(assemble_channel(none, arr, arr, 28e9, 1), EmptyPathList);
}

TEST_CASE("effective_channel - zero channel maps to zero")
{
    auto arr = ArrayConfig::half_wavelength(4, 0.0107);
    auto cb = dft_codebook(arr);
    ComplexChannel ch{Eigen::MatrixXcd::Zero(4, 4), 28e9};
    CHECK(effective_channel(ch, cb, cb).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("effective_channel - on-grid path selects exactly one coefficient")
{
    const int n_bs = 16, n_ms = 8;
    const double wl = 0.0107;
    auto bs = ArrayConfig::half_wavelength(n_bs, wl);
    auto ms = ArrayConfig::half_wavelength(n_ms, wl);
    const int n_r = 3, n_t = 2; // sin(theta) = 2*n/N stays within [-1, 1]
    const double theta = std::asin(2.0 * n_r / n_bs);
    const double phi = std::asin(2.0 * n_t / n_ms);

    PathRecord p{0.0, 2e-7, theta, phi, 0};
    auto ch = assemble_channel(std::span(&p, 1), bs, ms, 28e9, 99);
    Eigen::MatrixXcd eff = effective_channel(ch, dft_codebook(bs), dft_codebook(ms));

    REQUIRE(angle_to_bin(n_bs, theta) == n_r);
    REQUIRE(angle_to_bin(n_ms, phi) == n_t);
    CHECK(std::abs(eff(n_r, n_t)) == Catch::Approx(1.0).margin(1e-9)); // |alpha| = 10^(0/20)
    int above = 0;
    for (int r = 0; r < n_bs; ++r)
        for (int c = 0; c < n_ms; ++c)
            if (std::abs(eff(r, c)) > 1e-9)
                ++above;
    CHECK(above == 1);
}

TEST_CASE("effective_channel - preserves Frobenius norm")
{
    SplitMix64 rng(5150);
    auto bs = ArrayConfig::half_wavelength(12, 0.0107);
    auto ms = ArrayConfig::half_wavelength(7, 0.0107);
    auto wb = dft_codebook(bs);
    auto wm = dft_codebook(ms);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXcd h(12, 7);
        for (int r = 0; r < 12; ++r)
            for (int c = 0; c < 7; ++c)
                h(r, c) = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        ComplexChannel ch{h, 28e9};
        Eigen::MatrixXcd eff = effective_channel(ch, wb, wm);
        CHECK(std::abs(eff.norm() - h.norm()) < 1e-9);
    }
}

TEST_CASE("effective_channel - dimension mismatch throws")
{
    auto cb4 = dft_codebook(ArrayConfig::half_wavelength(4, 0.0107));
    auto cb3 = dft_codebook(ArrayConfig::half_wavelength(3, 0.0107));
    ComplexChannel ch{Eigen::MatrixXcd::Zero(4, 4), 28e9};
    CHECK_THROWS_AS(effective_channel(ch, cb4, cb3), DimensionMismatch);
    CHECK_THROWS_AS(effective_channel(ch, cb3, cb4), DimensionMismatch);
}
