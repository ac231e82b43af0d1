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
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "beamcast/common.hpp"

namespace beamcast {

// One propagation path of a multipath link.
struct PathRecord {
    double rss_db = 0.0;  // received signal strength r = |alpha|^2, in dB
    double delay_s = 0.0; // propagation delay tau, in seconds
    double aoa_rad = 0.0; // azimuth angle of arrival at the BS, [0, 2*pi)
    double aod_rad = 0.0; // azimuth angle of departure at the user, [0, 2*pi)
    int reflections = 0;  // number of specular bounces
};

// All paths of one BS-user link, sorted by ascending delay.
struct ChannelSample {
    int bs_id = 0;
    int user_id = 0;
    Vec2 user_position{};
    std::vector<PathRecord> paths;
};

inline void to_json(nlohmann::json &j, const PathRecord &p)
{
    j = nlohmann::json{{"rss_db", p.rss_db},
                       {"delay_s", p.delay_s},
                       {"aoa_rad", p.aoa_rad},
                       {"aod_rad", p.aod_rad},
                       {"reflections", p.reflections}};
}

inline void from_json(const nlohmann::json &j, PathRecord &p)
{
    j.at("rss_db").get_to(p.rss_db);
    j.at("delay_s").get_to(p.delay_s);
    j.at("aoa_rad").get_to(p.aoa_rad);
    j.at("aod_rad").get_to(p.aod_rad);
    j.at("reflections").get_to(p.reflections);
}

inline void to_json(nlohmann::json &j, const ChannelSample &s)
{
    j = nlohmann::json{{"bs_id", s.bs_id},
                       {"user_id", s.user_id},
                       {"user_position", {s.user_position.x, s.user_position.y}},
                       {"paths", s.paths}};
}

inline void from_json(const nlohmann::json &j, ChannelSample &s)
{
    j.at("bs_id").get_to(s.bs_id);
    j.at("user_id").get_to(s.user_id);
    const auto &pos = j.at("user_position");
    s.user_position = {pos.at(0).get<double>(), pos.at(1).get<double>()};
    j.at("paths").get_to(s.paths);
}

// JSON-Lines dataset I/O. nlohmann's serializer emits shortest round-trip
// float representations, so write->read->write is byte-stable.

inline void write_dataset_jsonl(std::ostream &out, const std::vector<ChannelSample> &samples)
{
    for (const auto &s : samples) {
        nlohmann::json j = s;
        out << j.dump() << '\n';
    }
}

inline void write_dataset_jsonl(const std::string &path, const std::vector<ChannelSample> &samples)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open dataset file for writing: " + path);
    write_dataset_jsonl(out, samples);
}

inline std::vector<ChannelSample> read_dataset_jsonl(std::istream &in)
{
    std::vector<ChannelSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        try {
            samples.push_back(nlohmann::json::parse(line).get<ChannelSample>());
        } catch (const nlohmann::json::exception &e) {
            throw std::runtime_error("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return samples;
}

inline std::vector<ChannelSample> read_dataset_jsonl(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open dataset file: " + path);
    return read_dataset_jsonl(in);
}

} // namespace beamcast
