// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcdm/error.hpp"
#include "dcdm/mat3.hpp"

namespace dcdm {

// Closed set of supported camera motions.
enum class MotionCategory { Left, Right, Upward, Downward, ZoomIn, ZoomOut, Static };

inline constexpr std::array<MotionCategory, 7> kAllMotionCategories = {
    MotionCategory::Left,    MotionCategory::Right,  MotionCategory::Upward,
    MotionCategory::Downward, MotionCategory::ZoomIn, MotionCategory::ZoomOut,
    MotionCategory::Static};

inline std::string to_string(MotionCategory m) {
    switch (m) {
        case MotionCategory::Left: return "left";
        case MotionCategory::Right: return "right";
        case MotionCategory::Upward: return "upward";
        case MotionCategory::Downward: return "downward";
        case MotionCategory::ZoomIn: return "zoom_in";
        case MotionCategory::ZoomOut: return "zoom_out";
        case MotionCategory::Static: return "static";
    }
    return "static";
}

inline MotionCategory parse_motion_category(const std::string& s) {
    for (MotionCategory m : kAllMotionCategories) {
        if (to_string(m) == s) return m;
    }
    throw_validation("parse", "unknown motion category: \"" + s + "\"");
}

struct CameraIntrinsics {
    double fx = 0, fy = 0;  // focal lengths, pixels
    double cx = 0, cy = 0;  // principal point, pixels

    void validate() const {
        if (!(fx > 0) || !(fy > 0)) {
            throw_validation("config", "focal lengths must be positive");
        }
    }
};

// fx = fy = max(H, W) gives a plausible field of view when nothing better
// is known; templates can always be specified directly in pixels.
inline CameraIntrinsics default_intrinsics(uint32_t height, uint32_t width) {
    CameraIntrinsics k;
    k.fx = k.fy = double(std::max(height, width));
    k.cx = (double(width) - 1.0) / 2.0;
    k.cy = (double(height) - 1.0) / 2.0;
    return k;
}

struct CameraPose {
    Mat3 rotation;                       // orthonormal, det +1
    std::array<double, 3> translation{};  // scene units

    void validate() const {
        // ||R^T R - I||_max < 1e-6
        double worst = 0.0;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += rotation(k, r) * rotation(k, c);
                worst = std::max(worst, std::abs(s - (r == c ? 1.0 : 0.0)));
            }
        }
        if (worst >= 1e-6) throw_validation("config", "rotation is not orthonormal");
        if (rotation.det() <= 0) throw_validation("config", "rotation must have det +1");
    }
};

// The scene geometry behind the reprojection: a fronto-parallel plane at
// depth d with unit normal n, expressed in the source camera frame.
struct PlaneAssumption {
    double depth = 1.0;
    std::array<double, 3> normal{0.0, 0.0, 1.0};

    void validate() const {
        if (!(depth > 0)) throw_validation("config", "plane depth must be positive");
        const double n2 = normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2];
        if (std::abs(std::sqrt(n2) - 1.0) > 1e-9) {
            throw_validation("config", "plane normal must be unit length");
        }
    }
};

// Planar homography H = K (R + t n^T / d) K^-1, normalized so H[2][2] = 1.
// Maps source-frame pixels to destination-frame pixels; invert for backward
// (pull) warping.
inline Mat3 homography_from_pose(const CameraIntrinsics& k, const CameraPose& pose,
                                 const PlaneAssumption& plane) {
    k.validate();
    pose.validate();
    plane.validate();

    Mat3 a = pose.rotation;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            a(r, c) += pose.translation[size_t(r)] * plane.normal[size_t(c)] / plane.depth;
        }
    }

    Mat3 kmat;
    kmat.m = {k.fx, 0, k.cx, 0, k.fy, k.cy, 0, 0, 1};
    Mat3 kinv;
    kinv.m = {1.0 / k.fx, 0, -k.cx / k.fx, 0, 1.0 / k.fy, -k.cy / k.fy, 0, 0, 1};

    Mat3 h = kmat * a * kinv;
    if (std::abs(h.det()) < 1e-12) {
        throw_validation("degenerate-geometry", "homography is singular");
    }
    if (h(2, 2) == 0.0) {
        throw_validation("degenerate-geometry", "homography cannot be normalized");
    }
    for (double& v : h.m) v /= h.m[8];
    h.m[8] = 1.0;
    return h;
}

// Per-transition backward homographies: entry t-1 maps a frame-t pixel to its
// source pixel in frame t-1. Templates built from an explicit pose path carry
// no category.
struct CameraTemplate {
    std::optional<MotionCategory> category = MotionCategory::Static;
    double speed = 0.0;  // pixels/frame for pans, scale-rate/frame for zooms
    std::vector<Mat3> transitions;

    uint32_t frames() const { return uint32_t(transitions.size() + 1); }

    std::string summary() const {
        const std::string base = category ? to_string(*category) : std::string("poses");
        return base + "@" + std::to_string(speed) + "x" + std::to_string(frames());
    }
};

namespace detail {

inline Mat3 translation_mat(double dx, double dy) {
    Mat3 t;
    t.m = {1, 0, dx, 0, 1, dy, 0, 0, 1};
    return t;
}

inline Mat3 scale_about(double s, double cx, double cy) {
    Mat3 t;
    t.m = {s, 0, cx * (1.0 - s), 0, s, cy * (1.0 - s), 0, 0, 1};
    return t;
}

}  // namespace detail

// Backward source convention per category, at speed s (the camera moves, the
// scene stays put; image y grows downward):
//   left      src x = x - s
//   right     src x = x + s
//   upward    src y = y + s
//   downward  src y = y - s
//   zoom_in   src = c + (p - c) * (1 + s)   (content magnifies forward)
//   zoom_out  src = c + (p - c) / (1 + s)
//   static    identity
inline Mat3 backward_step(MotionCategory m, double speed, const CameraIntrinsics& k) {
    switch (m) {
        case MotionCategory::Left: return detail::translation_mat(-speed, 0);
        case MotionCategory::Right: return detail::translation_mat(speed, 0);
        case MotionCategory::Upward: return detail::translation_mat(0, speed);
        case MotionCategory::Downward: return detail::translation_mat(0, -speed);
        case MotionCategory::ZoomIn: return detail::scale_about(1.0 + speed, k.cx, k.cy);
        case MotionCategory::ZoomOut: return detail::scale_about(1.0 / (1.0 + speed), k.cx, k.cy);
        case MotionCategory::Static: return Mat3::identity();
    }
    return Mat3::identity();
}

inline CameraTemplate template_from_category(MotionCategory m, double speed, uint32_t frames,
                                             const CameraIntrinsics& k) {
    if (frames < 1) throw_validation("config", "template needs at least one frame");
    if (speed < 0) throw_validation("config", "speed must be >= 0");
    if (speed == 0 && m != MotionCategory::Static) {
        throw_validation("config", "speed 0 is only valid for the static category");
    }
    k.validate();

    CameraTemplate t;
    t.category = m;
    t.speed = speed;
    const Mat3 step = backward_step(m, speed, k);
    t.transitions.assign(frames > 0 ? frames - 1 : 0, step);
    return t;
}

// Template from an explicit camera path. Consecutive poses are reduced to a
// relative motion, turned into a forward homography against the plane, and
// inverted into the stored backward transition.
inline CameraTemplate template_from_poses(const std::vector<CameraPose>& poses,
                                          const CameraIntrinsics& k,
                                          const PlaneAssumption& plane) {
    if (poses.empty()) throw_validation("config", "pose path must not be empty");
    for (const auto& p : poses) p.validate();

    CameraTemplate t;
    t.category = std::nullopt;
    t.speed = 0.0;
    t.transitions.reserve(poses.size() - 1);
    for (size_t i = 1; i < poses.size(); ++i) {
        const CameraPose& a = poses[i - 1];
        const CameraPose& b = poses[i];
        // x_b = R_rel x_a + t_rel
        CameraPose rel;
        Mat3 ra_t = a.rotation;
        std::swap(ra_t.m[1], ra_t.m[3]);
        std::swap(ra_t.m[2], ra_t.m[6]);
        std::swap(ra_t.m[5], ra_t.m[7]);
        rel.rotation = b.rotation * ra_t;
        for (int r = 0; r < 3; ++r) {
            double s = 0.0;
            for (int c = 0; c < 3; ++c) s += rel.rotation(r, c) * a.translation[size_t(c)];
            rel.translation[size_t(r)] = b.translation[size_t(r)] - s;
        }
        const Mat3 forward = homography_from_pose(k, rel, plane);
        t.transitions.push_back(forward.inverse());
    }
    return t;
}

// Discretized warp: per transition, per pixel, the backward source position
// and whether it falls inside the frame.
struct WarpField {
    uint32_t height = 0, width = 0;
    uint32_t transitions = 0;

    std::vector<double> src_x;       // [transition][y][x]
    std::vector<double> src_y;
    std::vector<uint8_t> in_bounds;

    size_t index(uint32_t tr, uint32_t y, uint32_t x) const {
        return (size_t(tr) * height + y) * width + x;
    }
};

inline WarpField build_warp_field(const CameraTemplate& tmpl, uint32_t frames, uint32_t height,
                                  uint32_t width) {
    if (tmpl.transitions.size() + 1 != frames) {
        throw_validation("shape", "template has " + std::to_string(tmpl.transitions.size()) +
                                      " transitions, expected " + std::to_string(frames - 1));
    }
    WarpField f;
    f.height = height;
    f.width = width;
    f.transitions = frames - 1;
    const size_t n = size_t(f.transitions) * height * width;
    f.src_x.resize(n);
    f.src_y.resize(n);
    f.in_bounds.resize(n);

    for (uint32_t tr = 0; tr < f.transitions; ++tr) {
        const Mat3& h = tmpl.transitions[tr];
        const bool ident = h.is_identity();
        for (uint32_t y = 0; y < height; ++y) {
            for (uint32_t x = 0; x < width; ++x) {
                const size_t i = f.index(tr, y, x);
                double sx, sy;
                if (ident) {
                    sx = double(x);
                    sy = double(y);
                } else {
                    h.apply(double(x), double(y), sx, sy);
                }
                f.src_x[i] = sx;
                f.src_y[i] = sy;
                f.in_bounds[i] =
                    (sy >= 0.0 && sy <= double(height - 1) && sx >= 0.0 && sx <= double(width - 1))
                        ? 1
                        : 0;
            }
        }
    }
    return f;
}

}  // namespace dcdm
