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
#include <cstdint>
#include <optional>
#include <vector>

#include "beamcast/common.hpp"
#include "beamcast/records.hpp"
#include "beamcast/scene.hpp"

namespace beamcast {

// Image-method ray tracer: the direct path plus all specular reflection
// sequences off building walls up to scene.max_reflections bounces.

namespace detail {

// Axis-aligned wall segment. axis == 0: vertical wall x = coord with
// y-extent [lo, hi]; axis == 1: horizontal wall y = coord, x-extent [lo, hi].
struct Wall {
    int axis = 0;
    double coord = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

inline std::vector<Wall> collect_walls(const Scene &scene)
{
    std::vector<Wall> walls;
    walls.reserve(scene.buildings.size() * 4);
    for (const auto &b : scene.buildings) {
        walls.push_back({0, b.x, b.y, b.y + b.height});           // left
        walls.push_back({0, b.x + b.width, b.y, b.y + b.height}); // right
        walls.push_back({1, b.y, b.x, b.x + b.width});            // bottom
        walls.push_back({1, b.y + b.height, b.x, b.x + b.width}); // top
    }
    return walls;
}

inline Vec2 mirror(const Vec2 &p, const Wall &w)
{
    if (w.axis == 0)
        return {2.0 * w.coord - p.x, p.y};
    return {p.x, 2.0 * w.coord - p.y};
}

// One ordered wall sequence together with the chain of mirrored source
// images; images[m] is the source mirrored across walls[0..m].
struct ImageSequence {
    std::vector<int> walls;
    std::vector<Vec2> images;
};

// All ordered wall sequences with up to max_bounces reflections and distinct
// consecutive walls, in deterministic order (by length, then lexicographic).
inline std::vector<ImageSequence> enumerate_sequences(const std::vector<Wall> &walls,
                                                      const Vec2 &source, int max_bounces)
{
    std::vector<ImageSequence> all;
    std::vector<ImageSequence> level;
    for (int w = 0; w < static_cast<int>(walls.size()); ++w)
        level.push_back({{w}, {mirror(source, walls[w])}});
    for (int depth = 1; depth <= max_bounces && !level.empty(); ++depth) {
        all.insert(all.end(), level.begin(), level.end());
        if (depth == max_bounces)
            break;
        std::vector<ImageSequence> next;
        for (const auto &seq : level) {
            for (int w = 0; w < static_cast<int>(walls.size()); ++w) {
                if (w == seq.walls.back())
                    continue;
                ImageSequence ext = seq;
                ext.walls.push_back(w);
                ext.images.push_back(mirror(ext.images.back(), walls[w]));
                next.push_back(std::move(ext));
            }
        }
        level = std::move(next);
    }
    return all;
}

inline constexpr double kGeomEps = 1e-12;

// Liang-Barsky overlap of the open segment (a, b) with a solid rectangle;
// endpoint contact does not count as blockage.
inline bool segment_blocked(const Vec2 &a, const Vec2 &b, const RectXY &r)
{
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    double t0 = 0.0, t1 = 1.0;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.x - r.x, r.x + r.width - a.x, a.y - r.y, r.y + r.height - a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0)
                return false;
        } else {
            const double t = q[i] / p[i];
            if (p[i] < 0.0)
                t0 = std::max(t0, t);
            else
                t1 = std::min(t1, t);
        }
    }
    const double lo = std::max(t0, 1e-9);
    const double hi = std::min(t1, 1.0 - 1e-9);
    return hi - lo > 1e-9;
}

inline bool path_blocked(const Scene &scene, const std::vector<Vec2> &vertices)
{
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i)
        for (const auto &b : scene.buildings)
            if (segment_blocked(vertices[i], vertices[i + 1], b))
                return true;
    return false;
}

// Reconstruct the reflection points of one wall sequence by walking back from
// the receiver through the image chain. Fails when any unfolding segment does
// not properly cross its wall inside the wall's extent.
inline std::optional<std::vector<Vec2>> unfold_sequence(const Vec2 &source, const Vec2 &target,
                                                        const std::vector<Wall> &walls,
                                                        const ImageSequence &seq)
{
    const std::size_t k = seq.walls.size();
    std::vector<Vec2> vertices(k + 2);
    vertices.front() = source;
    vertices.back() = target;

    Vec2 cur = target;
    for (std::size_t m = k; m-- > 0;) {
        const Wall &w = walls[seq.walls[m]];
        const Vec2 &img = seq.images[m];
        const double da = (w.axis == 0 ? img.x : img.y) - w.coord;
        const double db = (w.axis == 0 ? cur.x : cur.y) - w.coord;
        if (std::abs(da) < kGeomEps || std::abs(db) < kGeomEps || (da > 0.0) == (db > 0.0))
            return std::nullopt; // no proper crossing of the wall's line
        const double t = da / (da - db);
        const Vec2 hit{img.x + (cur.x - img.x) * t, img.y + (cur.y - img.y) * t};
        const double along = (w.axis == 0) ? hit.y : hit.x;
        if (along < w.lo + kGeomEps || along > w.hi - kGeomEps)
            return std::nullopt; // outside the finite wall segment
        vertices[m + 1] = hit;
        cur = hit;
    }
    return vertices;
}

inline double polyline_length(const std::vector<Vec2> &v)
{
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        len += distance(v[i], v[i + 1]);
    return len;
}

// Free-space loss at the scene's wavelength plus a per-bounce penalty.
inline double path_rss_db(const Scene &scene, double length_m, int reflections)
{
    const double fspl = 20.0 * std::log10(4.0 * kPi * length_m / scene.wavelength());
    return -fspl - static_cast<double>(reflections) * scene.reflection_loss_db;
}

inline std::optional<PathRecord> make_path(const Scene &scene, const std::vector<Vec2> &vertices,
                                           int reflections)
{
    if (scene.occlusion_test && path_blocked(scene, vertices))
        return std::nullopt;
    const double length = polyline_length(vertices);
    const double rss = path_rss_db(scene, length, reflections);
    if (rss < scene.rss_floor_db)
        return std::nullopt;
    PathRecord p;
    p.rss_db = rss;
    p.delay_s = length / kSpeedOfLight;
    p.aoa_rad = bearing(vertices.front(), vertices[1]);
    p.aod_rad = bearing(vertices.back(), vertices[vertices.size() - 2]);
    p.reflections = reflections;
    return p;
}

inline std::vector<PathRecord> trace_link(const Scene &scene, const std::vector<Wall> &walls,
                                          const std::vector<ImageSequence> &sequences,
                                          const Vec2 &bs, const Vec2 &user)
{
    if (distance(bs, user) < 1e-9)
        throw DegenerateGeometry("trace_paths: BS and user coincide");
    if (inside_any_building(scene, bs) || inside_any_building(scene, user))
        throw std::invalid_argument("trace_paths: endpoints must lie outside buildings");

    std::vector<PathRecord> paths;
    if (auto los = make_path(scene, {bs, user}, 0))
        paths.push_back(*los);
    for (const auto &seq : sequences) {
        auto vertices = unfold_sequence(bs, user, walls, seq);
        if (!vertices)
            continue;
        if (auto p = make_path(scene, *vertices, static_cast<int>(seq.walls.size())))
            paths.push_back(*p);
    }
    // keep the dominant paths when the scene caps the count per link
    if (scene.max_paths > 0 && paths.size() > static_cast<std::size_t>(scene.max_paths)) {
        std::stable_sort(paths.begin(), paths.end(),
                         [](const PathRecord &a, const PathRecord &b) { return a.rss_db > b.rss_db; });
        paths.resize(static_cast<std::size_t>(scene.max_paths));
    }
    // ChannelSample requires ascending delay; stable so equal delays keep
    // enumeration order and output stays deterministic.
    std::stable_sort(paths.begin(), paths.end(),
                     [](const PathRecord &a, const PathRecord &b) { return a.delay_s < b.delay_s; });
    return paths;
}

} // namespace detail

// All propagation paths between one BS and one user.
inline std::vector<PathRecord> trace_paths(const Scene &scene, const Vec2 &bs, const Vec2 &user)
{
    const auto walls = detail::collect_walls(scene);
    const auto sequences = detail::enumerate_sequences(walls, bs, scene.max_reflections);
    return detail::trace_link(scene, walls, sequences, bs, user);
}

struct DatasetResult {
    std::vector<ChannelSample> samples;
    std::size_t omitted_links = 0; // links with no path above the RSS floor
};

// One ChannelSample per (BS, user) pair. Tracing is purely geometric, so the
// result does not depend on `seed`; the parameter pins the interface for
// stochastic scene variants and is recorded by callers for reproducibility.
inline DatasetResult generate_dataset(const Scene &scene, std::uint64_t /*seed*/ = 0)
{
    validate_scene(scene);
    DatasetResult result;
    const auto walls = detail::collect_walls(scene);
    for (std::size_t b = 0; b < scene.bs_sites.size(); ++b) {
        const Vec2 bs = scene.bs_sites[b];
        const auto sequences = detail::enumerate_sequences(walls, bs, scene.max_reflections);
        for (int r = 0; r < scene.user_grid.rows; ++r) {
            for (int c = 0; c < scene.user_grid.cols; ++c) {
                const Vec2 user = scene.user_grid.point(r, c);
                auto paths = detail::trace_link(scene, walls, sequences, bs, user);
                if (paths.empty()) {
                    ++result.omitted_links;
                    continue;
                }
                ChannelSample sample;
                sample.bs_id = static_cast<int>(b);
                sample.user_id = scene.user_grid.user_id(r, c);
                sample.user_position = user;
                sample.paths = std::move(paths);
                result.samples.push_back(std::move(sample));
            }
        }
    }
    if (result.samples.empty())
        throw EmptyDataset("generate_dataset: no link produced any path above the RSS floor");
    return result;
}

} // namespace beamcast
