// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "dcdm/error.hpp"
#include "dcdm/rng.hpp"

namespace dcdm {

struct GridShape {
    uint32_t frames = 0;    // T
    uint32_t height = 0;    // H
    uint32_t width = 0;     // W
    uint32_t channels = 0;  // C

    uint64_t frame_elements() const {
        return uint64_t(height) * width * channels;
    }
    uint64_t total_elements() const {
        return uint64_t(frames) * frame_elements();
    }
    bool operator==(const GridShape&) const = default;

    std::string str() const {
        return std::to_string(frames) + "x" + std::to_string(height) + "x" +
               std::to_string(width) + "x" + std::to_string(channels);
    }
};

// Hard cap on grid size; this is a desk-scale tool.
inline constexpr uint64_t kMaxGridElements = uint64_t(1) << 28;

inline void validate_shape(const GridShape& s) {
    if (s.frames == 0 || s.height == 0 || s.width == 0 || s.channels == 0) {
        throw_validation("invalid-shape", "all dimensions must be >= 1, got " + s.str());
    }
    // Guard the product before computing it in 64 bits.
    const uint64_t hw = uint64_t(s.height) * s.width;
    if (hw > kMaxGridElements || hw * s.channels > kMaxGridElements ||
        hw * s.channels * s.frames > kMaxGridElements) {
        throw_validation("capacity", "grid " + s.str() + " exceeds element cap 2^28");
    }
}

// Dense T x H x W x C stack of 32-bit floats, row-major [t][h][w][c].
class LatentGrid {
  public:
    LatentGrid() = default;

    explicit LatentGrid(const GridShape& shape, float fill = 0.0f) : shape_(shape) {
        validate_shape(shape);
        data_.assign(shape.total_elements(), fill);
    }

    const GridShape& shape() const { return shape_; }
    uint32_t frames() const { return shape_.frames; }
    uint32_t height() const { return shape_.height; }
    uint32_t width() const { return shape_.width; }
    uint32_t channels() const { return shape_.channels; }

    size_t size() const { return data_.size(); }
    const float* data() const { return data_.data(); }
    float* data() { return data_.data(); }

    size_t index(uint32_t t, uint32_t h, uint32_t w, uint32_t c) const {
        return ((size_t(t) * shape_.height + h) * shape_.width + w) * shape_.channels + c;
    }
    float at(uint32_t t, uint32_t h, uint32_t w, uint32_t c) const {
        return data_[index(t, h, w, c)];
    }
    float& at(uint32_t t, uint32_t h, uint32_t w, uint32_t c) {
        return data_[index(t, h, w, c)];
    }

    const float* frame(uint32_t t) const { return data_.data() + size_t(t) * shape_.frame_elements(); }
    float* frame(uint32_t t) { return data_.data() + size_t(t) * shape_.frame_elements(); }

    bool all_finite() const {
        for (float v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    bool operator==(const LatentGrid& o) const {
        return shape_ == o.shape_ &&
               std::memcmp(data_.data(), o.data_.data(), data_.size() * sizeof(float)) == 0;
    }

  private:
    GridShape shape_;
    std::vector<float> data_;
};

// Fills frame t from the ("init", t) substream, so per-frame generation order
// cannot change the result.
inline LatentGrid gaussian_grid(const GridShape& shape, uint64_t seed) {
    LatentGrid g(shape);
    const uint64_t per_frame = shape.frame_elements();
    for (uint32_t t = 0; t < shape.frames; ++t) {
        RngStream stream(seed, "init", t);
        float* dst = g.frame(t);
        for (uint64_t i = 0; i < per_frame; ++i) {
            dst[i] = static_cast<float>(stream.gaussian_at(i));
        }
    }
    return g;
}

// --- .dcdn binary format -------------------------------------------------
//
// bytes 0-3   magic "DCDN"
// bytes 4-7   version, u32 LE (= 1)
// bytes 8-23  T, H, W, C as u32 LE
// rest        T*H*W*C IEEE-754 binary32 LE, [t][h][w][c] row-major
//
// No padding, no trailing bytes.

namespace detail {

inline void put_u32_le(std::string& out, uint32_t v) {
    out.push_back(char(v & 0xFF));
    out.push_back(char((v >> 8) & 0xFF));
    out.push_back(char((v >> 16) & 0xFF));
    out.push_back(char((v >> 24) & 0xFF));
}

inline uint32_t get_u32_le(const unsigned char* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

}  // namespace detail

inline void save_grid(const LatentGrid& grid, const std::string& path) {
    std::string header;
    header.reserve(24);
    header += "DCDN";
    detail::put_u32_le(header, 1);
    detail::put_u32_le(header, grid.frames());
    detail::put_u32_le(header, grid.height());
    detail::put_u32_le(header, grid.width());
    detail::put_u32_le(header, grid.channels());

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw_runtime("io", "cannot open for writing: " + path);
    f.write(header.data(), std::streamsize(header.size()));

    if constexpr (std::endian::native == std::endian::little) {
        f.write(reinterpret_cast<const char*>(grid.data()),
                std::streamsize(grid.size() * sizeof(float)));
    } else {
        std::string payload;
        payload.reserve(grid.size() * 4);
        for (size_t i = 0; i < grid.size(); ++i) {
            detail::put_u32_le(payload, std::bit_cast<uint32_t>(grid.data()[i]));
        }
        f.write(payload.data(), std::streamsize(payload.size()));
    }
    if (!f) throw_runtime("io", "write failed: " + path);
}

inline LatentGrid load_grid(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw_runtime("io", "cannot open for reading: " + path);

    unsigned char header[24];
    f.read(reinterpret_cast<char*>(header), 24);
    if (f.gcount() != 24) throw_validation("length", "file shorter than header: " + path);
    if (std::memcmp(header, "DCDN", 4) != 0) {
        throw_validation("format", "bad magic (expected DCDN): " + path);
    }
    const uint32_t version = detail::get_u32_le(header + 4);
    if (version != 1) throw_validation("format", "unsupported version " + std::to_string(version));

    GridShape shape{detail::get_u32_le(header + 8), detail::get_u32_le(header + 12),
                    detail::get_u32_le(header + 16), detail::get_u32_le(header + 20)};
    if (shape.frames == 0 || shape.height == 0 || shape.width == 0 || shape.channels == 0) {
        throw_validation("invalid-shape", "zero dimension in header of " + path);
    }
    const uint64_t hw = uint64_t(shape.height) * shape.width;
    if (hw > kMaxGridElements || hw * shape.channels > kMaxGridElements ||
        hw * shape.channels * shape.frames > kMaxGridElements) {
        throw_validation("capacity", "header dimensions exceed element cap: " + path);
    }

    LatentGrid grid(shape);
    const size_t payload_bytes = grid.size() * sizeof(float);
    f.read(reinterpret_cast<char*>(grid.data()), std::streamsize(payload_bytes));
    if (size_t(f.gcount()) != payload_bytes) {
        throw_validation("length", "truncated payload in " + path);
    }
    if (f.get() != std::ifstream::traits_type::eof()) {
        throw_validation("length", "trailing bytes after payload in " + path);
    }
    if constexpr (std::endian::native != std::endian::little) {
        for (size_t i = 0; i < grid.size(); ++i) {
            uint32_t raw = std::bit_cast<uint32_t>(grid.data()[i]);
            raw = ((raw & 0xFF) << 24) | ((raw & 0xFF00) << 8) | ((raw >> 8) & 0xFF00) | (raw >> 24);
            grid.data()[i] = std::bit_cast<float>(raw);
        }
    }
    if (!grid.all_finite()) {
        throw_validation("format", "non-finite payload values in " + path);
    }
    return grid;
}

}  // namespace dcdm
