#pragma once

#include <array>
#include <vector>

#include "maskeval/errors.hpp"

namespace maskeval {

struct ImageDims {
    int width = 0;
    int height = 0;

    bool valid() const { return width >= 1 && height >= 1; }
    long pixels() const { return static_cast<long>(width) * height; }
    bool operator==(const ImageDims&) const = default;
};

// Axis-aligned box in corner form. Coordinates are continuous pixels; the
// center form (cx, cy, w, h) exists only at the conversion boundary.
struct BoundingBox {
    double x_min = 0;
    double y_min = 0;
    double x_max = 0;
    double y_max = 0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    double diagonal() const;
    bool valid() const { return x_min <= x_max && y_min <= y_max; }
    bool operator==(const BoundingBox&) const = default;
};

using Point = std::array<double, 2>;
using Polygon = std::vector<Point>;

// Throws geometry_error on negative width/height.
BoundingBox box_from_center(double cx, double cy, double w, double h);

// Returns {cx, cy, w, h}; exact inverse of box_from_center.
std::array<double, 4> box_to_center(const BoundingBox& b);

// Intersection over union in [0, 1]. Two zero-area boxes give 0.
double box_iou(const BoundingBox& a, const BoundingBox& b);

BoundingBox clip_box(const BoundingBox& b, const ImageDims& dims);

// Tight axis-aligned bounds of a vertex set. Throws on empty input.
BoundingBox tight_bounds(const Polygon& poly);

// Per-axis linear rescale between image resolutions.
Point rescale(const Point& p, const ImageDims& from, const ImageDims& to);
BoundingBox rescale(const BoundingBox& b, const ImageDims& from, const ImageDims& to);
Polygon rescale(const Polygon& poly, const ImageDims& from, const ImageDims& to);

} // namespace maskeval
