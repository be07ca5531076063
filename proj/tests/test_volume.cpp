#include "doctest.h"
#include "oracles.hpp"

#include "maskslic/volume.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace maskslic;

namespace {

template <class F>
ErrorCode code_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

Mask single_voxel(const Shape& shape, const Index3& c)
{
    std::vector<std::uint8_t> bits(shape.size(), 0);
    bits[shape.index(c)] = 1;
    return Mask(shape, bits);
}

}  // namespace

TEST_CASE("shape pads to three axes with last axis fastest")
{
    const Shape s{3, 4};
    CHECK(s.ndim() == 2);
    CHECK(s.size() == 12);
    CHECK(s.dims() == Index3{3, 4, 1});
    CHECK(s.index({1, 2, 0}) == 6);
    CHECK(s.coord(7) == Index3{1, 3, 0});
    const Shape v{2, 3, 4};
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v.index(v.coord(i)) == i);
    CHECK(code_of([] { Shape{0, 3}; }) == ErrorCode::InvalidArgument);
}

TEST_CASE("feature volume validation")
{
    CHECK(code_of([] { FeatureVolume(Shape{2, 2}, 1, {1, 2, 3}); }) == ErrorCode::DimsMismatch);
    CHECK(code_of([] { FeatureVolume(Shape{2, 2}, 1, {1, 2, 3, std::nan("")}); }) == ErrorCode::NonFinite);
    CHECK(code_of([] {
              FeatureVolume(Shape{2, 2}, 1, {1, 2, 3, std::numeric_limits<double>::infinity()});
          }) == ErrorCode::NonFinite);
    CHECK(code_of([] { FeatureVolume(Shape{2, 2}, 1, {1, 2, 3, 4}, {1.0, 0.0, 1.0}); }) == ErrorCode::InvalidArgument);
    const FeatureVolume v(Shape{2, 2}, 2, {1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(v.at(2)[0] == 5);
    CHECK(v.at(2)[1] == 6);
}

TEST_CASE("validate_pair")
{
    const FeatureVolume v(Shape{4, 4}, 1, std::vector<double>(16, 0.0));
    CHECK_NOTHROW(validate_pair(v, single_voxel(Shape{4, 4}, {1, 1, 0})));
    CHECK(code_of([&] { validate_pair(v, Mask::full(Shape{4, 5})); }) == ErrorCode::DimsMismatch);
    CHECK(code_of([] { Mask(Shape{4, 4}, std::vector<std::uint8_t>(16, 0)); }) == ErrorCode::EmptyMask);
}

TEST_CASE("translate_mask")
{
    const Shape s{4, 4};
    const Mask m = single_voxel(s, {1, 1, 0});
    CHECK(translate_mask(m, {2, 0, 0}) == single_voxel(s, {3, 1, 0}));
    CHECK(translate_mask(m, {0, 0, 0}) == m);

    std::vector<std::uint8_t> block(16, 0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) block[s.index({i, j, 0})] = 1;
    CHECK(code_of([&] { translate_mask(Mask(s, block), {2, 2, 0}); }) == ErrorCode::OutOfBounds);
}

TEST_CASE("translate_mask round trip preserves the mask")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const Shape s{12, 10, 6};
        const Mask inner = oracle::random_connected_mask(Shape{6, 5, 3}, 20, rng);
        std::vector<std::uint8_t> bits(s.size(), 0);
        for (std::size_t i = 0; i < inner.shape().size(); ++i)
            if (inner[i]) {
                Index3 c = inner.shape().coord(i);
                bits[s.index({c[0] + 3, c[1] + 2, c[2] + 1})] = 1;
            }
        const Mask m(s, bits);
        std::uniform_int_distribution<int> o0(-3, 3), o1(-2, 3), o2(-1, 2);
        const Offset t{o0(rng), o1(rng), o2(rng)};
        const Mask moved = translate_mask(m, t);
        CHECK(moved.count() == m.count());
        CHECK(translate_mask(moved, {-t[0], -t[1], -t[2]}) == m);
    }
}

TEST_CASE("labeling invariants")
{
    const Shape s{2, 2};
    CHECK_NOTHROW(Labeling(s, {0, 1, -1, 0}));
    CHECK(code_of([&] { Labeling(s, {0, 2, -1, 0}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { Labeling(s, {0, -2, -1, 0}); }) == ErrorCode::InvalidArgument);
    const Labeling l(s, {0, 1, -1, 0});
    CHECK(l.num_regions() == 2);
    CHECK(l.region_sizes() == std::vector<std::size_t>{2, 1});
    CHECK_NOTHROW(l.check_against(Mask(s, {1, 1, 0, 1})));
    CHECK_THROWS_AS(l.check_against(Mask::full(s)), Error);

    const Labeling c = compact_labels(s, {7, 3, -1, 7});
    CHECK(c.labels() == std::vector<std::int32_t>{1, 0, -1, 1});
    CHECK(foreground_of(c) == Mask(s, {1, 1, 0, 1}));
}

TEST_CASE("seed set checks")
{
    const Mask m(Shape{3, 3}, {0, 1, 1, 0, 1, 1, 0, 0, 0});
    CHECK_NOTHROW(check_seeds(m, SeedSet{{{0, 1, 0}, {1, 2, 0}}}));
    CHECK(code_of([&] { check_seeds(m, SeedSet{{{0, 0, 0}}}); }) == ErrorCode::OutOfBounds);
    CHECK(code_of([&] { check_seeds(m, SeedSet{{{0, 1, 0}, {0.2, 1.1, 0}}}); }) == ErrorCode::InvalidArgument);
    CHECK(round_to_voxel({1.4, 1.6, 0.0}) == Index3{1, 2, 0});
}

TEST_CASE("slic params and backend names")
{
    SlicParams p;
    CHECK_NOTHROW(p.validate());
    p.n_regions = 0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.compactness = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    for (Backend b : {Backend::MaskSlic, Backend::NaiveWholeImage, Backend::NaiveGridFiltered})
        CHECK(backend_from_string(to_string(b)) == b);
    CHECK_THROWS_AS(backend_from_string("slic"), Error);
}

TEST_CASE("bounding box")
{
    const Mask m(Shape{4, 5}, {0, 0, 0, 0, 0,  //
                               0, 1, 0, 0, 0,  //
                               0, 0, 0, 1, 0,  //
                               0, 0, 0, 0, 0});
    const BoundingBox b = bounding_box(m);
    CHECK(b.lo == Index3{1, 1, 0});
    CHECK(b.hi == Index3{3, 4, 1});
    CHECK(b.shape(2) == Shape{2, 3});
}
