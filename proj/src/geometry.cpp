#include "maskeval/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace maskeval {

double BoundingBox::diagonal() const {
    return std::sqrt(width() * width() + height() * height());
}

BoundingBox box_from_center(double cx, double cy, double w, double h) {
    if (w < 0 || h < 0) {
        throw geometry_error("box_from_center: negative extent (w=" + std::to_string(w) +
                             ", h=" + std::to_string(h) + ")");
    }
    return BoundingBox{cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
}

std::array<double, 4> box_to_center(const BoundingBox& b) {
    return {(b.x_min + b.x_max) / 2, (b.y_min + b.y_max) / 2, b.width(), b.height()};
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
    if (!a.valid() || !b.valid()) {
        throw geometry_error("box_iou: invalid box");
    }
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    const double inter = (iw > 0 && ih > 0) ? iw * ih : 0.0;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0) return 0.0;
    return inter / uni;
}

BoundingBox clip_box(const BoundingBox& b, const ImageDims& dims) {
    auto clamp = [](double v, double lo, double hi) { return std::min(std::max(v, lo), hi); };
    BoundingBox out;
    out.x_min = clamp(b.x_min, 0.0, static_cast<double>(dims.width));
    out.x_max = clamp(b.x_max, 0.0, static_cast<double>(dims.width));
    out.y_min = clamp(b.y_min, 0.0, static_cast<double>(dims.height));
    out.y_max = clamp(b.y_max, 0.0, static_cast<double>(dims.height));
    return out;
}

BoundingBox tight_bounds(const Polygon& poly) {
    if (poly.empty()) throw geometry_error("tight_bounds: empty vertex list");
    BoundingBox b{poly[0][0], poly[0][1], poly[0][0], poly[0][1]};
    for (const auto& p : poly) {
        b.x_min = std::min(b.x_min, p[0]);
        b.y_min = std::min(b.y_min, p[1]);
        b.x_max = std::max(b.x_max, p[0]);
        b.y_max = std::max(b.y_max, p[1]);
    }
    return b;
}

Point rescale(const Point& p, const ImageDims& from, const ImageDims& to) {
    if (!from.valid() || !to.valid()) throw geometry_error("rescale: invalid dims");
    const double sx = static_cast<double>(to.width) / from.width;
    const double sy = static_cast<double>(to.height) / from.height;
    return Point{p[0] * sx, p[1] * sy};
}

BoundingBox rescale(const BoundingBox& b, const ImageDims& from, const ImageDims& to) {
    const Point lo = rescale(Point{b.x_min, b.y_min}, from, to);
    const Point hi = rescale(Point{b.x_max, b.y_max}, from, to);
    return BoundingBox{lo[0], lo[1], hi[0], hi[1]};
}

Polygon rescale(const Polygon& poly, const ImageDims& from, const ImageDims& to) {
    Polygon out;
    out.reserve(poly.size());
    for (const auto& p : poly) out.push_back(rescale(p, from, to));
    return out;
}

} // namespace maskeval
