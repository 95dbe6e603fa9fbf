// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dcdm/camera.hpp"
#include "dcdm/error.hpp"

namespace dcdm {

// Camera-template JSON:
//   {"category": "...", "speed": f, "frames": n,
//    "intrinsics": {"fx","fy","cx","cy"}?,
//    "poses": [{"rotation":[9],"translation":[3]}]?,
//    "plane_depth": f?}
// A "poses" array overrides "category"/"speed".
inline CameraTemplate parse_camera_template(const nlohmann::json& j, uint32_t height,
                                            uint32_t width) {
    if (!j.is_object()) throw_validation("parse", "template JSON must be an object");

    static const std::set<std::string> known = {"category", "speed",       "frames",
                                                "intrinsics", "poses",     "plane_depth"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) {
            throw_validation("parse", "unknown template key: \"" + it.key() + "\"");
        }
    }

    CameraIntrinsics k = default_intrinsics(height, width);
    if (j.contains("intrinsics")) {
        const auto& ji = j.at("intrinsics");
        for (auto it = ji.begin(); it != ji.end(); ++it) {
            if (it.key() != "fx" && it.key() != "fy" && it.key() != "cx" && it.key() != "cy") {
                throw_validation("parse", "unknown intrinsics key: \"" + it.key() + "\"");
            }
        }
        k.fx = ji.at("fx").get<double>();
        k.fy = ji.at("fy").get<double>();
        k.cx = ji.at("cx").get<double>();
        k.cy = ji.at("cy").get<double>();
    }

    PlaneAssumption plane;
    if (j.contains("plane_depth")) plane.depth = j.at("plane_depth").get<double>();

    if (j.contains("poses")) {
        std::vector<CameraPose> poses;
        for (const auto& jp : j.at("poses")) {
            const auto& jr = jp.at("rotation");
            const auto& jt = jp.at("translation");
            if (jr.size() != 9 || jt.size() != 3) {
                throw_validation("parse", "pose needs 9 rotation and 3 translation entries");
            }
            CameraPose p;
            for (int i = 0; i < 9; ++i) p.rotation.m[size_t(i)] = jr.at(size_t(i)).get<double>();
            for (int i = 0; i < 3; ++i) p.translation[size_t(i)] = jt.at(size_t(i)).get<double>();
            poses.push_back(p);
        }
        if (j.contains("frames") && j.at("frames").get<uint64_t>() != poses.size()) {
            throw_validation("parse", "frames does not match pose count");
        }
        return template_from_poses(poses, k, plane);
    }

    if (!j.contains("category") || !j.contains("frames")) {
        throw_validation("parse", "template needs \"category\" and \"frames\" (or \"poses\")");
    }
    const MotionCategory cat = parse_motion_category(j.at("category").get<std::string>());
    const double speed = j.contains("speed") ? j.at("speed").get<double>() : 0.0;
    const auto frames = j.at("frames").get<int64_t>();
    if (frames < 1) throw_validation("parse", "frames must be >= 1");
    return template_from_category(cat, speed, uint32_t(frames), k);
}

inline CameraTemplate parse_camera_template_text(const std::string& text, uint32_t height,
                                                 uint32_t width) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw_validation("parse", std::string("template JSON: ") + e.what());
    }
    try {
        return parse_camera_template(j, height, width);
    } catch (const nlohmann::json::exception& e) {
        throw_validation("parse", std::string("template JSON: ") + e.what());
    }
}

inline CameraTemplate load_camera_template(const std::string& path, uint32_t height,
                                           uint32_t width) {
    std::ifstream f(path);
    if (!f) throw_validation("config", "template file not found: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_camera_template_text(ss.str(), height, width);
}

}  // namespace dcdm
