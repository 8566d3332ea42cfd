#include <cmath>

#include "doctest.h"

#include "maskeval/mask.hpp"
#include "oracles.hpp"

using namespace maskeval;

namespace {

BinaryMask mask_from_rows(const std::vector<std::string>& rows) {
    const ImageDims dims{static_cast<int>(rows[0].size()), static_cast<int>(rows.size())};
    BinaryMask m(dims);
    for (int r = 0; r < dims.height; ++r) {
        for (int c = 0; c < dims.width; ++c) {
            if (rows[r][c] == '1') m.set(r, c, 1);
        }
    }
    return m;
}

} // namespace

TEST_CASE("rle encode fixtures") {
    CHECK(rle_encode(BinaryMask(ImageDims{4, 4})).counts == std::vector<std::uint32_t>{16});
    CHECK(rle_encode(BinaryMask(ImageDims{4, 4}, 1)).counts == std::vector<std::uint32_t>{0, 16});

    // 2x2 with only (row 0, col 1) set: column-major bits are 0,0,1,0.
    BinaryMask m(ImageDims{2, 2});
    m.set(0, 1, 1);
    CHECK(rle_encode(m).counts == std::vector<std::uint32_t>{2, 1, 1});
}

TEST_CASE("rle validation and canonicalization") {
    CHECK_THROWS_AS(make_rle(ImageDims{4, 4}, {5}), mask_error);
    CHECK_THROWS_AS(make_rle(ImageDims{4, 4}, {20}), mask_error);

    // Interior zero runs merge away without changing the decoded bits.
    const RleMask canon = make_rle(ImageDims{4, 4}, {3, 0, 4, 0, 9});
    CHECK(canon.counts == std::vector<std::uint32_t>{16});
    const RleMask ones = make_rle(ImageDims{2, 2}, {0, 2, 0, 2});
    CHECK(ones.counts == std::vector<std::uint32_t>{0, 4});
}

TEST_CASE("rle round-trip on random masks") {
    SplitMix64 rng(21);
    for (int i = 0; i < 500; ++i) {
        const BinaryMask m = oracle::random_mask(rng);
        CHECK(rle_decode(rle_encode(m)) == m);
    }
}

TEST_CASE("mask_iou fixtures") {
    const BinaryMask left = mask_from_rows({"1100", "1100", "1100", "1100"});
    const BinaryMask top = mask_from_rows({"1111", "1111", "0000", "0000"});
    CHECK(mask_iou(left, top) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(mask_iou(left, left) == 1.0);

    const BinaryMask empty(ImageDims{4, 4});
    CHECK(mask_iou(empty, empty) == 0.0);
    const BinaryMask other = mask_from_rows({"0011", "0011", "0000", "0000"});
    CHECK(mask_iou(left, other) == 0.0);

    CHECK_THROWS_AS(mask_iou(left, BinaryMask(ImageDims{3, 3})), mask_error);
}

TEST_CASE("rle mask_iou equals bitmap mask_iou exactly") {
    SplitMix64 rng(22);
    for (int i = 0; i < 500; ++i) {
        const int w = rng.uniform_int(1, 64);
        const int h = rng.uniform_int(1, 64);
        const ImageDims dims{w, h};
        BinaryMask a(dims), b(dims);
        const double da = rng.uniform(), db = rng.uniform();
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                if (rng.uniform() < da) a.set(r, c, 1);
                if (rng.uniform() < db) b.set(r, c, 1);
            }
        }
        CHECK(mask_iou(rle_encode(a), rle_encode(b)) == mask_iou(a, b));
    }
}

TEST_CASE("polygon_rasterize fixtures") {
    const Polygon square{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
    CHECK(mask_area(polygon_rasterize(square, ImageDims{4, 4})) == 16);

    const BinaryMask on8 = polygon_rasterize(square, ImageDims{8, 8});
    CHECK(mask_area(on8) == 16);
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
            CHECK(on8.at(r, c) == (r < 4 && c < 4 ? 1 : 0));
        }
    }

    // Triangle over half the frame; centers on the hypotenuse count as inside,
    // so the kept set is {c + r <= 7}: 36 pixels (frozen from the oracle).
    const Polygon tri{{0, 0}, {8, 0}, {0, 8}};
    const BinaryMask tmask = polygon_rasterize(tri, ImageDims{8, 8});
    CHECK(mask_area(tmask) == 36);
    CHECK(tmask == oracle::rasterize_by_containment(tri, ImageDims{8, 8}));

    CHECK_THROWS_AS(polygon_rasterize(Polygon{{0, 0}, {1, 1}}, ImageDims{4, 4}), mask_error);
}

TEST_CASE("polygon_rasterize agrees with the containment oracle") {
    SplitMix64 rng(23);
    for (int i = 0; i < 120; ++i) {
        const int w = rng.uniform_int(4, 32);
        const int h = rng.uniform_int(4, 32);
        const int n = rng.uniform_int(3, 8);
        Polygon poly;
        for (int v = 0; v < n; ++v) {
            poly.push_back(Point{rng.uniform(0, w), rng.uniform(0, h)});
        }
        const ImageDims dims{w, h};
        CHECK(polygon_rasterize(poly, dims) == oracle::rasterize_by_containment(poly, dims));
    }
}

TEST_CASE("grid_extrapolate fixtures") {
    const MaskGrid ones{2, {1, 1, 1, 1}};
    const BoundingBox box{0, 0, 8, 8};
    const BinaryMask full = grid_extrapolate(ones, box, ImageDims{8, 8}, 0.5);
    CHECK(mask_area(full) == 64);

    CHECK_THROWS_AS(grid_extrapolate(ones, box, ImageDims{8, 8}, 1.0 + 1e-9), mask_error);
    CHECK_THROWS_AS(grid_extrapolate(ones, box, ImageDims{8, 8}, 0.0), mask_error);

    // Empty box is an empty mask, not an error.
    CHECK(mask_area(grid_extrapolate(ones, BoundingBox{3, 3, 3, 3}, ImageDims{8, 8}, 0.5)) == 0);

    // Single hot corner: the kept set is exactly what pointwise bilinear says.
    const MaskGrid corner{2, {1, 0, 0, 0}};
    const BinaryMask patch = grid_extrapolate(corner, box, ImageDims{8, 8}, 0.5);
    CHECK(patch == oracle::extrapolate_by_pointwise_eval(corner, box, ImageDims{8, 8}, 0.5));
    CHECK(mask_area(patch) > 0);
    CHECK(mask_area(patch) < 64);
}

TEST_CASE("grid_extrapolate properties") {
    SplitMix64 rng(24);
    for (int side : {15, 33}) {
        for (int i = 0; i < 20; ++i) {
            MaskGrid grid;
            grid.side = side;
            grid.values.resize(static_cast<size_t>(side) * side);
            for (auto& v : grid.values) v = rng.uniform();
            const BoundingBox box{rng.uniform(0, 20), rng.uniform(0, 20), rng.uniform(30, 64),
                                  rng.uniform(30, 64)};
            const ImageDims dims{64, 64};

            const BinaryMask lo = grid_extrapolate(grid, box, dims, 0.3);
            const BinaryMask hi = grid_extrapolate(grid, box, dims, 0.7);
            for (int r = 0; r < 64; ++r) {
                for (int c = 0; c < 64; ++c) {
                    if (hi.at(r, c)) CHECK(lo.at(r, c)); // threshold monotonicity
                    if (lo.at(r, c)) {
                        const double px = c + 0.5, py = r + 0.5; // box containment
                        CHECK(px >= box.x_min);
                        CHECK(px < box.x_max);
                        CHECK(py >= box.y_min);
                        CHECK(py < box.y_max);
                    }
                }
            }
            CHECK(lo == oracle::extrapolate_by_pointwise_eval(grid, box, dims, 0.3));
            CHECK(hi == oracle::extrapolate_by_pointwise_eval(grid, box, dims, 0.7));
        }
    }
}

TEST_CASE("mask statistics fixtures") {
    BinaryMask single(ImageDims{5, 5});
    single.set(2, 3, 1);
    CHECK(mask_area(single) == 1);
    CHECK(mask_centroid(single) == Point{3.5, 2.5});
    CHECK(elongation(single) == doctest::Approx(1.0).epsilon(1e-12));

    // 1x10 strip: column variance (10^2 - 1)/12 against the floored 1/12.
    BinaryMask strip(ImageDims{10, 1}, 1);
    const double expected = std::sqrt((99.0 / 12.0) / (1.0 / 12.0));
    CHECK(elongation(strip) == doctest::Approx(expected).epsilon(1e-12));

    BinaryMask square(ImageDims{10, 10}, 1);
    CHECK(elongation(square) == doctest::Approx(1.0).epsilon(1e-12));

    const BinaryMask empty(ImageDims{4, 4});
    CHECK_THROWS_AS(mask_centroid(empty), mask_error);
    CHECK_THROWS_AS(elongation(empty), mask_error);
}

TEST_CASE("elongation is rotation invariant and stable under integer scaling") {
    SplitMix64 rng(25);
    for (int i = 0; i < 40; ++i) {
        // Solid rectangles with min thickness 5 avoid the single-pixel floor.
        const int w = rng.uniform_int(5, 20);
        const int h = rng.uniform_int(5, 20);
        BinaryMask m(ImageDims{w, h}, 1);

        BinaryMask rotated(ImageDims{h, w});
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                if (m.at(r, c)) rotated.set(c, h - 1 - r, 1);
            }
        }
        CHECK(elongation(rotated) == doctest::Approx(elongation(m)).epsilon(1e-9));

        const int s = rng.uniform_int(2, 3);
        BinaryMask scaled(ImageDims{w * s, h * s});
        for (int r = 0; r < h * s; ++r) {
            for (int c = 0; c < w * s; ++c) {
                if (m.at(r / s, c / s)) scaled.set(r, c, 1);
            }
        }
        CHECK(elongation(scaled) == doctest::Approx(elongation(m)).epsilon(0.05));
    }
}
