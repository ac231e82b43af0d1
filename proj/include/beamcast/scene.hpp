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

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "beamcast/common.hpp"

namespace beamcast {

// Axis-aligned rectangle, (x, y) is the min corner.
struct RectXY {
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;

    // Closed-rectangle test; points on a wall count as inside.
    bool contains(const Vec2 &p) const
    {
        return p.x >= x && p.x <= x + width && p.y >= y && p.y <= y + height;
    }
};

struct UserGrid {
    Vec2 origin{};
    double spacing = 1.0;
    int rows = 1;
    int cols = 1;

    Vec2 point(int row, int col) const
    {
        return {origin.x + spacing * static_cast<double>(col),
                origin.y + spacing * static_cast<double>(row)};
    }
    int user_id(int row, int col) const { return row * cols + col; }
    int num_points() const { return rows * cols; }
};

// 2-D outdoor scene: an open area with axis-aligned buildings, fixed BS
// sites, and users on a regular grid.
struct Scene {
    double width = 0.0; // bounds, meters
    double height = 0.0;
    std::vector<RectXY> buildings;
    std::vector<Vec2> bs_sites;
    UserGrid user_grid;
    double carrier_frequency_hz = 28e9;
    int max_reflections = 2;
    double reflection_loss_db = 6.0; // per specular bounce
    double rss_floor_db = -160.0;    // paths weaker than this are dropped
    int max_paths = 0;               // keep only the strongest paths per link; 0 = unlimited
    bool occlusion_test = false;     // optional blockage testing, off by default

    double wavelength() const { return kSpeedOfLight / carrier_frequency_hz; }
};

inline bool inside_any_building(const Scene &scene, const Vec2 &p)
{
    for (const auto &b : scene.buildings)
        if (b.contains(p))
            return true;
    return false;
}

inline void validate_scene(const Scene &scene)
{
    if (!(scene.width > 0.0) || !(scene.height > 0.0))
        throw std::invalid_argument("scene.bounds: width and height must be > 0");
    if (!(scene.carrier_frequency_hz > 0.0))
        throw std::invalid_argument("scene.carrier_frequency_hz: must be > 0");
    if (scene.max_reflections < 0)
        throw std::invalid_argument("scene.max_reflections: must be >= 0");
    if (scene.max_paths < 0)
        throw std::invalid_argument("scene.max_paths: must be >= 0");
    if (!(scene.user_grid.spacing > 0.0))
        throw std::invalid_argument("scene.user_grid.spacing: must be > 0");
    if (scene.user_grid.rows < 1 || scene.user_grid.cols < 1)
        throw std::invalid_argument("scene.user_grid: rows and cols must be >= 1");
    if (scene.bs_sites.empty())
        throw std::invalid_argument("scene.bs_sites: at least one BS site required");

    for (std::size_t i = 0; i < scene.buildings.size(); ++i) {
        const auto &b = scene.buildings[i];
        if (!(b.width > 0.0) || !(b.height > 0.0))
            throw std::invalid_argument("scene.buildings[" + std::to_string(i) +
                                        "]: width and height must be > 0");
        if (b.x < 0.0 || b.y < 0.0 || b.x + b.width > scene.width ||
            b.y + b.height > scene.height)
            throw std::invalid_argument("scene.buildings[" + std::to_string(i) +
                                        "]: extends beyond scene bounds");
    }

    for (std::size_t i = 0; i < scene.bs_sites.size(); ++i) {
        const auto &p = scene.bs_sites[i];
        if (p.x < 0.0 || p.y < 0.0 || p.x > scene.width || p.y > scene.height)
            throw std::invalid_argument("scene.bs_sites[" + std::to_string(i) +
                                        "]: outside scene bounds");
        if (inside_any_building(scene, p))
            throw std::invalid_argument("scene.bs_sites[" + std::to_string(i) +
                                        "]: inside a building");
    }

    for (int r = 0; r < scene.user_grid.rows; ++r) {
        for (int c = 0; c < scene.user_grid.cols; ++c) {
            Vec2 p = scene.user_grid.point(r, c);
            if (p.x < 0.0 || p.y < 0.0 || p.x > scene.width || p.y > scene.height)
                throw std::invalid_argument("scene.user_grid: point (" + std::to_string(r) + "," +
                                            std::to_string(c) + ") outside scene bounds");
            if (inside_any_building(scene, p))
                throw std::invalid_argument("scene.user_grid: point (" + std::to_string(r) + "," +
                                            std::to_string(c) + ") inside a building");
        }
    }
}

inline void to_json(nlohmann::json &j, const RectXY &r)
{
    j = nlohmann::json{{"x", r.x}, {"y", r.y}, {"width", r.width}, {"height", r.height}};
}

inline void from_json(const nlohmann::json &j, RectXY &r)
{
    j.at("x").get_to(r.x);
    j.at("y").get_to(r.y);
    j.at("width").get_to(r.width);
    j.at("height").get_to(r.height);
}

inline void to_json(nlohmann::json &j, const Scene &s)
{
    nlohmann::json sites = nlohmann::json::array();
    for (const auto &p : s.bs_sites)
        sites.push_back({p.x, p.y});
    j = nlohmann::json{
        {"bounds", {{"width", s.width}, {"height", s.height}}},
        {"buildings", s.buildings},
        {"bs_sites", sites},
        {"user_grid",
         {{"origin", {s.user_grid.origin.x, s.user_grid.origin.y}},
          {"spacing", s.user_grid.spacing},
          {"rows", s.user_grid.rows},
          {"cols", s.user_grid.cols}}},
        {"carrier_frequency_hz", s.carrier_frequency_hz},
        {"max_reflections", s.max_reflections},
        {"reflection_loss_db", s.reflection_loss_db},
        {"rss_floor_db", s.rss_floor_db},
        {"max_paths", s.max_paths},
        {"occlusion_test", s.occlusion_test}};
}

inline void from_json(const nlohmann::json &j, Scene &s)
{
    for (const char *key : {"bounds", "bs_sites", "user_grid", "carrier_frequency_hz"})
        if (!j.contains(key))
            throw std::invalid_argument(std::string("scene: missing required field '") + key +
                                        "'");
    const auto &bounds = j.at("bounds");
    if (!bounds.contains("width") || !bounds.contains("height"))
        throw std::invalid_argument("scene.bounds: requires 'width' and 'height'");
    bounds.at("width").get_to(s.width);
    bounds.at("height").get_to(s.height);

    s.buildings.clear();
    if (j.contains("buildings"))
        j.at("buildings").get_to(s.buildings);

    s.bs_sites.clear();
    for (const auto &p : j.at("bs_sites"))
        s.bs_sites.push_back({p.at(0).get<double>(), p.at(1).get<double>()});

    const auto &grid = j.at("user_grid");
    for (const char *key : {"origin", "spacing", "rows", "cols"})
        if (!grid.contains(key))
            throw std::invalid_argument(std::string("scene.user_grid: missing field '") + key +
                                        "'");
    s.user_grid.origin = {grid.at("origin").at(0).get<double>(),
                          grid.at("origin").at(1).get<double>()};
    grid.at("spacing").get_to(s.user_grid.spacing);
    grid.at("rows").get_to(s.user_grid.rows);
    grid.at("cols").get_to(s.user_grid.cols);

    j.at("carrier_frequency_hz").get_to(s.carrier_frequency_hz);
    s.max_reflections = j.value("max_reflections", 2);
    s.reflection_loss_db = j.value("reflection_loss_db", 6.0);
    s.rss_floor_db = j.value("rss_floor_db", -160.0);
    s.max_paths = j.value("max_paths", 0);
    s.occlusion_test = j.value("occlusion_test", false);
}

inline Scene load_scene(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open scene file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw std::invalid_argument("scene: invalid JSON: " + std::string(e.what()));
    }
    Scene s = j.get<Scene>();
    validate_scene(s);
    return s;
}

inline void save_scene(const std::string &path, const Scene &s)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open scene file for writing: " + path);
    nlohmann::json j = s;
    out << j.dump(2) << '\n';
}

// Desk-scale default scene: a 150 m x 120 m area with an open plaza of
// 40x30 user spots on a 1 m grid, a corner BS, and 20 buildings along the
// outer margins. The corner placement spreads the subtended angles across
// the grid, the set-back buildings keep reflected departures smooth over
// neighbouring users, and only the dominant paths per link are kept so the
// AoD occupancy stays sparse enough to carry information.
inline Scene make_default_scene()
{
    Scene s;
    s.width = 150.0;
    s.height = 120.0;
    s.bs_sites = {{10.0, 14.0}};
    s.user_grid = {{55.0, 45.0}, 1.0, 30, 40};
    s.carrier_frequency_hz = 28e9;
    s.max_reflections = 2;
    s.reflection_loss_db = 8.0;
    s.rss_floor_db = -125.0;
    s.max_paths = 12;
    s.occlusion_test = false;
    s.buildings = {
        // north side
        {36.0, 100.0, 20.0, 16.0},
        {60.0, 104.0, 16.0, 14.0},
        {80.0, 98.0, 14.0, 20.0},
        {98.0, 102.0, 18.0, 16.0},
        {120.0, 100.0, 16.0, 18.0},
        {30.0, 98.0, 4.0, 20.0},
        // south side
        {38.0, 4.0, 18.0, 16.0},
        {60.0, 2.0, 14.0, 18.0},
        {78.0, 6.0, 16.0, 14.0},
        {98.0, 2.0, 16.0, 18.0},
        {118.0, 6.0, 14.0, 16.0},
        {32.0, 2.0, 4.0, 18.0},
        // east side
        {120.0, 36.0, 16.0, 14.0},
        {124.0, 54.0, 14.0, 14.0},
        {120.0, 72.0, 16.0, 12.0},
        {140.0, 30.0, 8.0, 60.0},
        // west side
        {24.0, 28.0, 12.0, 12.0},
        {22.0, 44.0, 10.0, 12.0},
        {22.0, 64.0, 10.0, 12.0},
        {24.0, 80.0, 12.0, 12.0},
    };
    return s;
}

} // namespace beamcast
