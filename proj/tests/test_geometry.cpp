#include "doctest.h"

#include "maskeval/geometry.hpp"
#include "oracles.hpp"

using namespace maskeval;

TEST_CASE("box_from_center corner conversion") {
    const BoundingBox b = box_from_center(5, 5, 10, 10);
    CHECK(b == BoundingBox{0, 0, 10, 10});

    const BoundingBox degenerate = box_from_center(0, 0, 0, 0);
    CHECK(degenerate.area() == 0.0);
    CHECK(degenerate == BoundingBox{0, 0, 0, 0});

    // Full frame at the working resolution.
    CHECK(box_from_center(480, 270, 960, 540) == BoundingBox{0, 0, 960, 540});

    CHECK_THROWS_AS(box_from_center(0, 0, -1, 2), geometry_error);
    CHECK_THROWS_AS(box_from_center(0, 0, 2, -0.5), geometry_error);
}

TEST_CASE("center conversion round-trips") {
    SplitMix64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const double cx = rng.uniform(-100, 100);
        const double cy = rng.uniform(-100, 100);
        const double w = rng.uniform(0, 50);
        const double h = rng.uniform(0, 50);
        const auto c = box_to_center(box_from_center(cx, cy, w, h));
        CHECK(c[0] == doctest::Approx(cx).epsilon(0).scale(1e-9));
        CHECK(c[1] == doctest::Approx(cy).epsilon(0).scale(1e-9));
        CHECK(c[2] == doctest::Approx(w).epsilon(0).scale(1e-9));
        CHECK(c[3] == doctest::Approx(h).epsilon(0).scale(1e-9));
    }
}

TEST_CASE("box_iou basics") {
    const BoundingBox a{0, 0, 10, 10};
    CHECK(box_iou(a, a) == 1.0);
    CHECK(box_iou(a, BoundingBox{20, 20, 30, 30}) == 0.0);
    CHECK(box_iou(a, BoundingBox{5, 5, 15, 15}) == doctest::Approx(25.0 / 175.0).epsilon(1e-12));

    // Two degenerate boxes: union is empty, IoU defined as 0.
    const BoundingBox point{3, 3, 3, 3};
    CHECK(box_iou(point, point) == 0.0);
}

TEST_CASE("box_iou symmetry, range, and identity") {
    SplitMix64 rng(12);
    for (int i = 0; i < 500; ++i) {
        const BoundingBox a = oracle::random_int_box(rng, 64);
        const BoundingBox b = oracle::random_int_box(rng, 64);
        const double iou = box_iou(a, b);
        CHECK(iou == box_iou(b, a));
        CHECK(iou >= 0.0);
        CHECK(iou <= 1.0);
        if (a.area() > 0) CHECK(box_iou(a, a) == 1.0);
    }
}

TEST_CASE("box_iou equals the pixel-count oracle on integer boxes") {
    SplitMix64 rng(13);
    for (int i = 0; i < 1000; ++i) {
        const BoundingBox a = oracle::random_int_box(rng, 64);
        const BoundingBox b = oracle::random_int_box(rng, 64);
        CHECK(box_iou(a, b) == oracle::pixel_box_iou(a, b, 64));
    }
}

TEST_CASE("rescale") {
    const ImageDims full{3840, 2160};
    const ImageDims train{960, 540};
    const Point corner = rescale(Point{3840, 2160}, full, train);
    CHECK(corner[0] == 960.0);
    CHECK(corner[1] == 540.0);

    const BoundingBox b{0, 0, 100, 100};
    CHECK(rescale(b, ImageDims{1000, 1000}, ImageDims{500, 250}) == BoundingBox{0, 0, 50, 25});
    CHECK(rescale(b, full, full) == b);
}

TEST_CASE("rescale round-trips within 1e-9") {
    SplitMix64 rng(14);
    const ImageDims from{3840, 2160};
    const ImageDims to{960, 540};
    for (int i = 0; i < 200; ++i) {
        const Point p{rng.uniform(0, 3840), rng.uniform(0, 2160)};
        const Point back = rescale(rescale(p, from, to), to, from);
        CHECK(back[0] == doctest::Approx(p[0]).epsilon(0).scale(1e-9));
        CHECK(back[1] == doctest::Approx(p[1]).epsilon(0).scale(1e-9));
    }
}

TEST_CASE("clip and tight bounds") {
    CHECK(clip_box(BoundingBox{-5, -5, 20, 8}, ImageDims{10, 10}) == BoundingBox{0, 0, 10, 8});
    CHECK(tight_bounds(Polygon{{1, 2}, {5, 1}, {3, 7}}) == BoundingBox{1, 1, 5, 7});
    CHECK_THROWS_AS(tight_bounds(Polygon{}), geometry_error);
}
