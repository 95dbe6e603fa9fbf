// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>

#include "dcdm/error.hpp"

namespace dcdm {

// Row-major 3x3 double matrix; carrier for planar homographies.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return Mat3{}; }

    double operator()(int r, int c) const { return m[size_t(r) * 3 + c]; }
    double& operator()(int r, int c) { return m[size_t(r) * 3 + c]; }

    Mat3 operator*(const Mat3& o) const {
        Mat3 out;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += (*this)(r, k) * o(k, c);
                out(r, c) = s;
            }
        }
        return out;
    }

    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) -
               m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }

    Mat3 inverse() const {
        const double d = det();
        if (std::abs(d) < 1e-12) {
            throw_validation("degenerate-geometry", "matrix is singular (|det| < 1e-12)");
        }
        const double inv = 1.0 / d;
        Mat3 out;
        out.m = {(m[4] * m[8] - m[5] * m[7]) * inv, (m[2] * m[7] - m[1] * m[8]) * inv,
                 (m[1] * m[5] - m[2] * m[4]) * inv, (m[5] * m[6] - m[3] * m[8]) * inv,
                 (m[0] * m[8] - m[2] * m[6]) * inv, (m[2] * m[3] - m[0] * m[5]) * inv,
                 (m[3] * m[7] - m[4] * m[6]) * inv, (m[1] * m[6] - m[0] * m[7]) * inv,
                 (m[0] * m[4] - m[1] * m[3]) * inv};
        return out;
    }

    // Apply to pixel (x, y) as homogeneous (x, y, 1) and dehomogenize.
    void apply(double x, double y, double& ox, double& oy) const {
        const double w = m[6] * x + m[7] * y + m[8];
        ox = (m[0] * x + m[1] * y + m[2]) / w;
        oy = (m[3] * x + m[4] * y + m[5]) / w;
    }

    bool is_identity() const {
        static constexpr std::array<double, 9> id{1, 0, 0, 0, 1, 0, 0, 0, 1};
        return m == id;
    }

    double max_abs_diff(const Mat3& o) const {
        double d = 0.0;
        for (int i = 0; i < 9; ++i) d = std::max(d, std::abs(m[i] - o.m[i]));
        return d;
    }
};

}  // namespace dcdm
