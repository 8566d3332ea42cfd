#pragma once

#include <cstdint>
#include <vector>

#include "maskeval/geometry.hpp"

namespace maskeval {

// Per-instance bitmap, row-major, one byte per pixel holding 0 or 1.
class BinaryMask {
public:
    BinaryMask() = default;
    explicit BinaryMask(ImageDims dims, std::uint8_t fill = 0);
    static BinaryMask from_bits(ImageDims dims, std::vector<std::uint8_t> bits);

    const ImageDims& dims() const { return dims_; }
    std::uint8_t at(int row, int col) const { return bits_[static_cast<size_t>(row) * dims_.width + col]; }
    void set(int row, int col, std::uint8_t v) { bits_[static_cast<size_t>(row) * dims_.width + col] = v; }
    const std::vector<std::uint8_t>& bits() const { return bits_; }
    bool operator==(const BinaryMask&) const = default;

private:
    ImageDims dims_{};
    std::vector<std::uint8_t> bits_;
};

// Run-length encoding in column-major pixel order: alternating run lengths of
// 0s and 1s, starting with the 0-run (which may be length 0). Canonical form
// has no zero count after the first entry.
struct RleMask {
    ImageDims dims{};
    std::vector<std::uint32_t> counts;
    bool operator==(const RleMask&) const = default;
};

// Validates the count sum against dims and canonicalizes interior zero runs.
// Throws mask_error when the counts do not cover the frame exactly.
RleMask make_rle(ImageDims dims, std::vector<std::uint32_t> counts);

// side x side grid of per-pixel certainties in [0, 1], row-major.
struct MaskGrid {
    int side = 0;
    std::vector<double> values;
    double at(int row, int col) const { return values[static_cast<size_t>(row) * side + col]; }
    bool operator==(const MaskGrid&) const = default;
};

RleMask rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(const RleMask& rle);

// |a AND b| / |a OR b|; 0 when both masks are empty. Throws on dims mismatch.
// The RLE overload works directly on the run lists.
double mask_iou(const BinaryMask& a, const BinaryMask& b);
double mask_iou(const RleMask& a, const RleMask& b);

// Even-odd fill at pixel centers (col + 0.5, row + 0.5). A center lying
// exactly on an edge counts as inside. Throws on fewer than 3 vertices.
BinaryMask polygon_rasterize(const Polygon& poly, const ImageDims& dims);

// Bilinearly resamples the grid onto the pixel lattice covering `box` (grid
// samples sit at cell centers, clamp-to-edge outside). A pixel is set iff its
// center lies in [x_min, x_max) x [y_min, y_max) and the resampled certainty
// is >= threshold. Threshold must be inside (0, 1).
BinaryMask grid_extrapolate(const MaskGrid& grid, const BoundingBox& box, const ImageDims& dims,
                            double threshold = 0.5);

long mask_area(const BinaryMask& mask);

// Mean of set-pixel centers. Throws mask_error on an empty mask.
Point mask_centroid(const BinaryMask& mask);

// sqrt(lambda_max / lambda_min) of the covariance of set-pixel centers, both
// eigenvalues floored at 1/12 (the variance of a single pixel's extent).
// Throws mask_error on an empty mask.
double elongation(const BinaryMask& mask);

// Pixel extent of the set pixels as a box. Throws on an empty mask.
BoundingBox mask_tight_bounds(const BinaryMask& mask);

} // namespace maskeval
