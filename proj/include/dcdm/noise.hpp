// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "dcdm/camera.hpp"
#include "dcdm/error.hpp"
#include "dcdm/latent_grid.hpp"
#include "dcdm/rng.hpp"

namespace dcdm {

enum class WarpMode { Nearest, BilinearRenormalized };

inline std::string to_string(WarpMode m) {
    return m == WarpMode::Nearest ? "nearest" : "bilinear";
}

inline WarpMode parse_warp_mode(const std::string& s) {
    if (s == "nearest") return WarpMode::Nearest;
    if (s == "bilinear") return WarpMode::BilinearRenormalized;
    throw_validation("parse", "unknown warp mode: \"" + s + "\" (nearest|bilinear)");
}

struct BlendConfig {
    double lambda = 0.9;  // temporal coherence strength, in [0, 1]
    WarpMode warp_mode = WarpMode::Nearest;

    void validate() const {
        if (!(lambda >= 0.0 && lambda <= 1.0)) {
            throw_validation("config", "lambda must be in [0, 1]");
        }
    }
};

// A latent-shaped stack of temporally structured noise frames plus the recipe
// that produced it.
struct StructuredNoise {
    LatentGrid grid;
    std::string template_summary;
    double lambda = 1.0;
    uint64_t seed = 0;
    WarpMode warp_mode = WarpMode::Nearest;
};

// Transports one noise frame through a warp-field transition.
//
// Nearest copies the value at the rounded source pixel, which preserves the
// per-element marginal exactly. BilinearRenormalized divides the interpolated
// value by sqrt(sum w_i^2) so unit variance survives sub-pixel sources. Pixels
// whose source falls outside the frame get fresh draws from `boundary`, keyed
// by their linear element index.
inline void warp_noise_frame(const float* prev, float* out, const WarpField& field, uint32_t tr,
                             uint32_t height, uint32_t width, uint32_t channels, WarpMode mode,
                             const RngStream& boundary) {
    if (field.height != height || field.width != width) {
        throw_validation("shape", "warp field dims do not match frame dims");
    }
    if (tr >= field.transitions) {
        throw_validation("shape", "transition index out of range");
    }
    for (uint32_t y = 0; y < height; ++y) {
        for (uint32_t x = 0; x < width; ++x) {
            const size_t fi = field.index(tr, y, x);
            const size_t oi = (size_t(y) * width + x) * channels;
            if (!field.in_bounds[fi]) {
                for (uint32_t c = 0; c < channels; ++c) {
                    out[oi + c] = static_cast<float>(boundary.gaussian_at(oi + c));
                }
                continue;
            }
            const double sx = field.src_x[fi];
            const double sy = field.src_y[fi];
            if (mode == WarpMode::Nearest) {
                const auto nx = uint32_t(std::llround(sx));
                const auto ny = uint32_t(std::llround(sy));
                const size_t si = (size_t(ny) * width + nx) * channels;
                for (uint32_t c = 0; c < channels; ++c) out[oi + c] = prev[si + c];
            } else {
                const double fx0 = std::floor(sx);
                const double fy0 = std::floor(sy);
                const auto x0 = uint32_t(fx0);
                const auto y0 = uint32_t(fy0);
                const double ax = sx - fx0;
                const double ay = sy - fy0;
                const double w00 = (1.0 - ay) * (1.0 - ax);
                const double w01 = (1.0 - ay) * ax;
                const double w10 = ay * (1.0 - ax);
                const double w11 = ay * ax;
                const double renorm =
                    std::sqrt(w00 * w00 + w01 * w01 + w10 * w10 + w11 * w11);
                for (uint32_t c = 0; c < channels; ++c) {
                    double acc = 0.0;
                    if (w00 > 0.0) acc += w00 * prev[(size_t(y0) * width + x0) * channels + c];
                    if (w01 > 0.0) acc += w01 * prev[(size_t(y0) * width + x0 + 1) * channels + c];
                    if (w10 > 0.0) acc += w10 * prev[(size_t(y0 + 1) * width + x0) * channels + c];
                    if (w11 > 0.0)
                        acc += w11 * prev[(size_t(y0 + 1) * width + x0 + 1) * channels + c];
                    out[oi + c] = static_cast<float>(acc / renorm);
                }
            }
        }
    }
}

// z = sqrt(lambda) * warped + sqrt(1-lambda) * eps. The endpoints bypass the
// arithmetic so lambda = 1 is a bit-exact copy and lambda = 0 is pure fresh
// noise.
inline void blend_frame(const float* warped, float* out, uint64_t count, const BlendConfig& cfg,
                        const RngStream& fresh) {
    cfg.validate();
    if (cfg.lambda == 1.0) {
        if (out != warped) std::memcpy(out, warped, count * sizeof(float));
        return;
    }
    if (cfg.lambda == 0.0) {
        for (uint64_t i = 0; i < count; ++i) {
            out[i] = static_cast<float>(fresh.gaussian_at(i));
        }
        return;
    }
    const float a = static_cast<float>(std::sqrt(cfg.lambda));
    const float b = static_cast<float>(std::sqrt(1.0 - cfg.lambda));
    for (uint64_t i = 0; i < count; ++i) {
        out[i] = a * warped[i] + b * static_cast<float>(fresh.gaussian_at(i));
    }
}

// Builds the full noise stack: frame 0 is i.i.d. Gaussian, every later frame
// is the previous one pushed through the camera warp and re-blended. The
// substream labels ("init"/"boundary"/"blend", destination frame) make the
// result independent of any intra-frame evaluation order.
inline StructuredNoise generate_camera_noise(const CameraTemplate& tmpl, const GridShape& shape,
                                             const BlendConfig& cfg, uint64_t seed) {
    validate_shape(shape);
    cfg.validate();
    if (tmpl.frames() != shape.frames) {
        throw_validation("shape", "template frame count " + std::to_string(tmpl.frames()) +
                                      " does not match grid frames " +
                                      std::to_string(shape.frames));
    }

    StructuredNoise n;
    n.template_summary = tmpl.summary();
    n.lambda = cfg.lambda;
    n.seed = seed;
    n.warp_mode = cfg.warp_mode;
    n.grid = LatentGrid(shape);

    const uint64_t per_frame = shape.frame_elements();
    {
        RngStream init(seed, "init", 0);
        float* f0 = n.grid.frame(0);
        for (uint64_t i = 0; i < per_frame; ++i) {
            f0[i] = static_cast<float>(init.gaussian_at(i));
        }
    }
    if (shape.frames == 1) return n;

    const WarpField field = build_warp_field(tmpl, shape.frames, shape.height, shape.width);
    std::vector<float> warped(per_frame);
    for (uint32_t t = 1; t < shape.frames; ++t) {
        RngStream boundary(seed, "boundary", t);
        RngStream fresh(seed, "blend", t);
        warp_noise_frame(n.grid.frame(t - 1), warped.data(), field, t - 1, shape.height,
                         shape.width, shape.channels, cfg.warp_mode, boundary);
        blend_frame(warped.data(), n.grid.frame(t), per_frame, cfg, fresh);
    }
    return n;
}

}  // namespace dcdm
