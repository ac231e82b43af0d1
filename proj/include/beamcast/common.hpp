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
#include <numbers>
#include <stdexcept>
#include <string>

namespace beamcast {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 2-D point / direction in meters.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2 &o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2 &o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2 &o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

inline double distance(const Vec2 &a, const Vec2 &b) { return (a - b).norm(); }

// Bearing of the direction from `from` to `to`, wrapped into [0, 2*pi).
inline double wrap_angle(double a)
{
    double t = std::fmod(a, kTwoPi);
    if (t < 0.0)
        t += kTwoPi;
    if (t >= kTwoPi)
        t = 0.0;
    return t;
}

inline double bearing(const Vec2 &from, const Vec2 &to)
{
    return wrap_angle(std::atan2(to.y - from.y, to.x - from.x));
}

// Error types shared across the library. Construction-time contract violations
// derive from std::invalid_argument, runtime conditions from std::runtime_error.

struct EmptyPathList : std::invalid_argument {
    explicit EmptyPathList(const std::string &msg) : std::invalid_argument(msg) {}
};

struct EmptyDataset : std::invalid_argument {
    explicit EmptyDataset(const std::string &msg) : std::invalid_argument(msg) {}
};

struct EmptyBatch : std::invalid_argument {
    explicit EmptyBatch(const std::string &msg) : std::invalid_argument(msg) {}
};

struct EmptyDistribution : std::invalid_argument {
    explicit EmptyDistribution(const std::string &msg) : std::invalid_argument(msg) {}
};

struct DimensionMismatch : std::invalid_argument {
    explicit DimensionMismatch(const std::string &msg) : std::invalid_argument(msg) {}
};

struct DegenerateGeometry : std::invalid_argument {
    explicit DegenerateGeometry(const std::string &msg) : std::invalid_argument(msg) {}
};

struct DegenerateNorms : std::invalid_argument {
    explicit DegenerateNorms(const std::string &msg) : std::invalid_argument(msg) {}
};

struct DegenerateLabels : std::invalid_argument {
    explicit DegenerateLabels(const std::string &msg) : std::invalid_argument(msg) {}
};

struct InsufficientData : std::invalid_argument {
    explicit InsufficientData(const std::string &msg) : std::invalid_argument(msg) {}
};

struct InsufficientSamples : std::invalid_argument {
    explicit InsufficientSamples(const std::string &msg) : std::invalid_argument(msg) {}
};

struct DivergenceDetected : std::runtime_error {
    explicit DivergenceDetected(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace beamcast
