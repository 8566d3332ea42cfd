// Brute-force reference implementations used only by tests. Each oracle
// recomputes its quantity from first principles, independent of the library
// code paths it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "maskeval/mask.hpp"
#include "maskeval/rng.hpp"

namespace oracle {

// IoU of integer-coordinate boxes by counting lattice pixels. A pixel (r, c)
// belongs to a box when c is in [x_min, x_max) and r is in [y_min, y_max).
inline double pixel_box_iou(const maskeval::BoundingBox& a, const maskeval::BoundingBox& b, int frame) {
    long inter = 0, uni = 0;
    for (int r = 0; r < frame; ++r) {
        for (int c = 0; c < frame; ++c) {
            const bool in_a = c >= a.x_min && c < a.x_max && r >= a.y_min && r < a.y_max;
            const bool in_b = c >= b.x_min && c < b.x_max && r >= b.y_min && r < b.y_max;
            inter += in_a && in_b;
            uni += in_a || in_b;
        }
    }
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// Even-odd containment of one point: count edge crossings at or to the right
// of the point (a center sitting exactly on an edge counts as inside).
inline bool point_in_polygon(const maskeval::Polygon& poly, double px, double py) {
    int crossings = 0;
    const size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const double yi = poly[i][1], yj = poly[j][1];
        if ((yi > py) != (yj > py)) {
            const double x = poly[i][0] + (py - yi) * (poly[j][0] - poly[i][0]) / (yj - yi);
            if (px <= x) ++crossings;
        }
    }
    return crossings & 1;
}

inline maskeval::BinaryMask rasterize_by_containment(const maskeval::Polygon& poly,
                                                     const maskeval::ImageDims& dims) {
    maskeval::BinaryMask out(dims);
    for (int r = 0; r < dims.height; ++r) {
        for (int c = 0; c < dims.width; ++c) {
            if (point_in_polygon(poly, c + 0.5, r + 0.5)) out.set(r, c, 1);
        }
    }
    return out;
}

// Bilinear interpolation of a grid whose samples sit at cell centers of the
// box, clamped at the edges; evaluated directly from the definition.
inline double bilinear_value(const maskeval::MaskGrid& grid, const maskeval::BoundingBox& box,
                             double px, double py) {
    const int side = grid.side;
    auto clamp = [&](double v) { return std::min(std::max(v, 0.0), static_cast<double>(side - 1)); };
    const double u = clamp((px - box.x_min) / (box.x_max - box.x_min) * side - 0.5);
    const double v = clamp((py - box.y_min) / (box.y_max - box.y_min) * side - 0.5);
    const int c0 = std::min(static_cast<int>(std::floor(u)), side - 1);
    const int r0 = std::min(static_cast<int>(std::floor(v)), side - 1);
    const int c1 = std::min(c0 + 1, side - 1);
    const int r1 = std::min(r0 + 1, side - 1);
    const double fx = u - c0, fy = v - r0;
    return (1 - fy) * ((1 - fx) * grid.at(r0, c0) + fx * grid.at(r0, c1)) +
           fy * ((1 - fx) * grid.at(r1, c0) + fx * grid.at(r1, c1));
}

inline maskeval::BinaryMask extrapolate_by_pointwise_eval(const maskeval::MaskGrid& grid,
                                                          const maskeval::BoundingBox& box,
                                                          const maskeval::ImageDims& dims,
                                                          double threshold) {
    maskeval::BinaryMask out(dims);
    for (int r = 0; r < dims.height; ++r) {
        for (int c = 0; c < dims.width; ++c) {
            const double px = c + 0.5, py = r + 0.5;
            if (px < box.x_min || px >= box.x_max || py < box.y_min || py >= box.y_max) continue;
            if (bilinear_value(grid, box, px, py) >= threshold) out.set(r, c, 1);
        }
    }
    return out;
}

// 101-point interpolated AP recomputed per sample over every prefix of the
// ranked list: p(r) = max precision among prefixes whose recall reaches r.
inline double brute_force_ap(const std::vector<char>& ranked_tp, long total_gt) {
    double sum = 0;
    for (int k = 0; k <= 100; ++k) {
        const double r = k / 100.0;
        double best = 0;
        long tp = 0;
        for (size_t i = 0; i < ranked_tp.size(); ++i) {
            tp += ranked_tp[i] ? 1 : 0;
            const double recall = static_cast<double>(tp) / static_cast<double>(total_gt);
            const double precision = static_cast<double>(tp) / static_cast<double>(i + 1);
            if (recall >= r) best = std::max(best, precision);
        }
        sum += best;
    }
    return sum / 101.0;
}

inline maskeval::BinaryMask random_mask(maskeval::SplitMix64& rng, int max_side = 64) {
    const int w = rng.uniform_int(1, max_side);
    const int h = rng.uniform_int(1, max_side);
    maskeval::BinaryMask m(maskeval::ImageDims{w, h});
    const double density = rng.uniform();
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (rng.uniform() < density) m.set(r, c, 1);
        }
    }
    return m;
}

inline maskeval::BoundingBox random_int_box(maskeval::SplitMix64& rng, int frame) {
    const int x0 = rng.uniform_int(0, frame);
    const int x1 = rng.uniform_int(x0, frame);
    const int y0 = rng.uniform_int(0, frame);
    const int y1 = rng.uniform_int(y0, frame);
    return maskeval::BoundingBox{static_cast<double>(x0), static_cast<double>(y0),
                                 static_cast<double>(x1), static_cast<double>(y1)};
}

} // namespace oracle
