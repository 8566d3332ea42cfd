#include "maskeval/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace maskeval {

BinaryMask::BinaryMask(ImageDims dims, std::uint8_t fill) : dims_(dims) {
    if (!dims.valid()) throw mask_error("BinaryMask: invalid dims");
    bits_.assign(static_cast<size_t>(dims.pixels()), fill);
}

BinaryMask BinaryMask::from_bits(ImageDims dims, std::vector<std::uint8_t> bits) {
    if (!dims.valid()) throw mask_error("BinaryMask: invalid dims");
    if (bits.size() != static_cast<size_t>(dims.pixels())) {
        throw mask_error("BinaryMask: bit count does not match dims");
    }
    BinaryMask m;
    m.dims_ = dims;
    m.bits_ = std::move(bits);
    for (auto b : m.bits_) {
        if (b > 1) throw mask_error("BinaryMask: values must be 0 or 1");
    }
    return m;
}

RleMask make_rle(ImageDims dims, std::vector<std::uint32_t> counts) {
    if (!dims.valid()) throw mask_error("RleMask: invalid dims");
    long sum = 0;
    for (auto c : counts) sum += c;
    if (sum != dims.pixels()) {
        throw mask_error("RleMask: counts sum to " + std::to_string(sum) + ", expected " +
                         std::to_string(dims.pixels()));
    }
    // Canonicalize: drop interior zero-length runs by merging their neighbours.
    std::vector<std::uint32_t> canon;
    canon.reserve(counts.size());
    for (size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0 && i > 0) {
            // A zero-length run means the previous value continues; merge the
            // following run into the previous entry.
            if (i + 1 < counts.size()) {
                canon.back() += counts[i + 1];
                ++i;
            }
            continue;
        }
        canon.push_back(counts[i]);
    }
    while (canon.size() > 1 && canon.back() == 0) canon.pop_back();
    return RleMask{dims, std::move(canon)};
}

RleMask rle_encode(const BinaryMask& mask) {
    const ImageDims d = mask.dims();
    std::vector<std::uint32_t> counts;
    std::uint8_t current = 0;
    std::uint32_t run = 0;
    for (int c = 0; c < d.width; ++c) {
        for (int r = 0; r < d.height; ++r) {
            const std::uint8_t bit = mask.at(r, c);
            if (bit == current) {
                ++run;
            } else {
                counts.push_back(run);
                current = bit;
                run = 1;
            }
        }
    }
    counts.push_back(run);
    return RleMask{d, std::move(counts)};
}

BinaryMask rle_decode(const RleMask& rle) {
    long sum = 0;
    for (auto c : rle.counts) sum += c;
    if (!rle.dims.valid() || sum != rle.dims.pixels()) {
        throw mask_error("rle_decode: counts do not cover the frame");
    }
    BinaryMask out(rle.dims);
    long pos = 0;
    std::uint8_t value = 0;
    for (auto count : rle.counts) {
        if (value == 1) {
            for (std::uint32_t i = 0; i < count; ++i) {
                const long p = pos + i;
                const int col = static_cast<int>(p / rle.dims.height);
                const int row = static_cast<int>(p % rle.dims.height);
                out.set(row, col, 1);
            }
        }
        pos += count;
        value ^= 1;
    }
    return out;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    if (!(a.dims() == b.dims())) throw mask_error("mask_iou: dims mismatch");
    long inter = 0, uni = 0;
    const auto& ba = a.bits();
    const auto& bb = b.bits();
    for (size_t i = 0; i < ba.size(); ++i) {
        inter += ba[i] & bb[i];
        uni += ba[i] | bb[i];
    }
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

// Set-pixel spans as [start, end) positions in column-major order.
std::vector<std::pair<long, long>> one_runs(const RleMask& rle) {
    std::vector<std::pair<long, long>> spans;
    long pos = 0;
    bool ones = false;
    for (auto count : rle.counts) {
        if (ones && count > 0) spans.emplace_back(pos, pos + count);
        pos += count;
        ones = !ones;
    }
    return spans;
}

} // namespace

double mask_iou(const RleMask& a, const RleMask& b) {
    if (!(a.dims == b.dims)) throw mask_error("mask_iou: dims mismatch");
    const auto sa = one_runs(a);
    const auto sb = one_runs(b);
    long area_a = 0, area_b = 0, inter = 0;
    for (const auto& s : sa) area_a += s.second - s.first;
    for (const auto& s : sb) area_b += s.second - s.first;
    size_t i = 0, j = 0;
    while (i < sa.size() && j < sb.size()) {
        const long lo = std::max(sa[i].first, sb[j].first);
        const long hi = std::min(sa[i].second, sb[j].second);
        if (hi > lo) inter += hi - lo;
        if (sa[i].second < sb[j].second) {
            ++i;
        } else {
            ++j;
        }
    }
    const long uni = area_a + area_b - inter;
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask polygon_rasterize(const Polygon& poly, const ImageDims& dims) {
    if (poly.size() < 3) throw mask_error("polygon_rasterize: need at least 3 vertices");
    if (!dims.valid()) throw mask_error("polygon_rasterize: invalid dims");
    BinaryMask out(dims);

    const BoundingBox bounds = tight_bounds(poly);
    const int r0 = std::max(0, static_cast<int>(std::floor(bounds.y_min - 0.5)));
    const int r1 = std::min(dims.height - 1, static_cast<int>(std::ceil(bounds.y_max)));
    const int c0 = std::max(0, static_cast<int>(std::floor(bounds.x_min - 0.5)));
    const int c1 = std::min(dims.width - 1, static_cast<int>(std::ceil(bounds.x_max)));

    const size_t n = poly.size();
    std::vector<double> xints;
    for (int r = r0; r <= r1; ++r) {
        const double py = r + 0.5;
        xints.clear();
        for (size_t i = 0, j = n - 1; i < n; j = i++) {
            const double yi = poly[i][1], yj = poly[j][1];
            if ((yi > py) != (yj > py)) {
                const double xi = poly[i][0], xj = poly[j][0];
                xints.push_back(xi + (py - yi) * (xj - xi) / (yj - yi));
            }
        }
        if (xints.empty()) continue;
        for (int c = c0; c <= c1; ++c) {
            const double px = c + 0.5;
            int crossings = 0;
            for (double x : xints) {
                if (px <= x) ++crossings;
            }
            if (crossings & 1) out.set(r, c, 1);
        }
    }
    return out;
}

namespace {

double bilinear_at(const MaskGrid& grid, double u, double v) {
    // u, v are continuous grid coordinates with samples at integers 0..side-1.
    const int side = grid.side;
    auto clampf = [&](double x) { return std::min(std::max(x, 0.0), static_cast<double>(side - 1)); };
    u = clampf(u);
    v = clampf(v);
    const int c0 = std::min(static_cast<int>(std::floor(u)), side - 1);
    const int r0 = std::min(static_cast<int>(std::floor(v)), side - 1);
    const int c1 = std::min(c0 + 1, side - 1);
    const int r1 = std::min(r0 + 1, side - 1);
    const double fx = u - c0;
    const double fy = v - r0;
    const double top = (1 - fx) * grid.at(r0, c0) + fx * grid.at(r0, c1);
    const double bot = (1 - fx) * grid.at(r1, c0) + fx * grid.at(r1, c1);
    return (1 - fy) * top + fy * bot;
}

} // namespace

BinaryMask grid_extrapolate(const MaskGrid& grid, const BoundingBox& box, const ImageDims& dims,
                            double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw mask_error("grid_extrapolate: threshold must lie in (0, 1)");
    }
    if (grid.side < 1 || grid.values.size() != static_cast<size_t>(grid.side) * grid.side) {
        throw mask_error("grid_extrapolate: malformed grid");
    }
    BinaryMask out(dims);
    const BoundingBox b = clip_box(box, dims);
    if (b.width() <= 0 || b.height() <= 0) return out;

    const int r0 = std::max(0, static_cast<int>(std::floor(b.y_min - 0.5)));
    const int r1 = std::min(dims.height - 1, static_cast<int>(std::ceil(b.y_max)));
    const int c0 = std::max(0, static_cast<int>(std::floor(b.x_min - 0.5)));
    const int c1 = std::min(dims.width - 1, static_cast<int>(std::ceil(b.x_max)));
    for (int r = r0; r <= r1; ++r) {
        const double py = r + 0.5;
        if (py < b.y_min || py >= b.y_max) continue;
        const double v = (py - b.y_min) / b.height() * grid.side - 0.5;
        for (int c = c0; c <= c1; ++c) {
            const double px = c + 0.5;
            if (px < b.x_min || px >= b.x_max) continue;
            const double u = (px - b.x_min) / b.width() * grid.side - 0.5;
            if (bilinear_at(grid, u, v) >= threshold) out.set(r, c, 1);
        }
    }
    return out;
}

long mask_area(const BinaryMask& mask) {
    return std::accumulate(mask.bits().begin(), mask.bits().end(), 0L,
                           [](long a, std::uint8_t b) { return a + b; });
}

Point mask_centroid(const BinaryMask& mask) {
    double sx = 0, sy = 0;
    long n = 0;
    const ImageDims d = mask.dims();
    for (int r = 0; r < d.height; ++r) {
        for (int c = 0; c < d.width; ++c) {
            if (mask.at(r, c)) {
                sx += c + 0.5;
                sy += r + 0.5;
                ++n;
            }
        }
    }
    if (n == 0) throw mask_error("mask_centroid: empty mask");
    return Point{sx / n, sy / n};
}

double elongation(const BinaryMask& mask) {
    const Point mean = mask_centroid(mask); // throws on empty
    double sxx = 0, syy = 0, sxy = 0;
    long n = 0;
    const ImageDims d = mask.dims();
    for (int r = 0; r < d.height; ++r) {
        for (int c = 0; c < d.width; ++c) {
            if (mask.at(r, c)) {
                const double dx = c + 0.5 - mean[0];
                const double dy = r + 0.5 - mean[1];
                sxx += dx * dx;
                syy += dy * dy;
                sxy += dx * dy;
                ++n;
            }
        }
    }
    sxx /= n;
    syy /= n;
    sxy /= n;
    const double tr = sxx + syy;
    const double det = std::sqrt(std::max(0.0, (sxx - syy) * (sxx - syy) + 4 * sxy * sxy));
    constexpr double kFloor = 1.0 / 12.0; // variance of one pixel's own extent
    const double lo = std::max((tr - det) / 2, kFloor);
    const double hi = std::max((tr + det) / 2, kFloor);
    return std::sqrt(hi / lo);
}

BoundingBox mask_tight_bounds(const BinaryMask& mask) {
    const ImageDims d = mask.dims();
    int rmin = d.height, rmax = -1, cmin = d.width, cmax = -1;
    for (int r = 0; r < d.height; ++r) {
        for (int c = 0; c < d.width; ++c) {
            if (mask.at(r, c)) {
                rmin = std::min(rmin, r);
                rmax = std::max(rmax, r);
                cmin = std::min(cmin, c);
                cmax = std::max(cmax, c);
            }
        }
    }
    if (rmax < 0) throw mask_error("mask_tight_bounds: empty mask");
    return BoundingBox{static_cast<double>(cmin), static_cast<double>(rmin),
                       static_cast<double>(cmax + 1), static_cast<double>(rmax + 1)};
}

} // namespace maskeval
