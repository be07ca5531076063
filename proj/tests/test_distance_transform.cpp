#include "doctest.h"
#include "oracles.hpp"

#include "maskslic/distance_transform.hpp"

#include <cmath>
#include <random>

using namespace maskslic;

TEST_CASE("3x3 full mask: centre 2, corner 1")
{
    const auto f = exact_edt(Mask::full(Shape{3, 3}), {});
    CHECK(f.at({1, 1, 0}) == 2.0);
    CHECK(f.at({0, 0, 0}) == 1.0);
}

TEST_CASE("1x5 row: middle voxel sees the border above and below")
{
    const auto f = exact_edt(Mask::full(Shape{1, 5}), {});
    CHECK(f.at({0, 2, 0}) == 1.0);
}

TEST_CASE("zero points read zero")
{
    const Mask m = Mask::full(Shape{6, 7});
    const SeedSet s{{{2, 3, 0}, {5, 6, 0}}};
    const auto f = exact_edt(m, s);
    CHECK(f.at({2, 3, 0}) == 0.0);
    CHECK(f.at({5, 6, 0}) == 0.0);
}

TEST_CASE("farthest point examples")
{
    const Mask m = Mask::full(Shape{5, 5});
    const auto f0 = exact_edt(m, {});
    CHECK(farthest_point(f0, m) == Index3{2, 2, 0});
    CHECK(f0.at({2, 2, 0}) == 3.0);

    const auto f1 = exact_edt(m, SeedSet{{{2, 2, 0}}});
    CHECK(farthest_point(f1, m) == Index3{1, 1, 0});
    CHECK(f1.at({1, 1, 0}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    const Mask one(Shape{4, 4}, {0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0});
    CHECK(farthest_point(exact_edt(one, {}), one) == Index3{1, 2, 0});
}

TEST_CASE("matches the brute-force definition on random masks and spacings")
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> d2(1, 14), d3(1, 7), npts(0, 3);
    std::uniform_real_distribution<double> sp(0.4, 2.5), fill(0.3, 0.95);
    for (int trial = 0; trial < 60; ++trial) {
        const bool three = trial % 2;
        const Shape shape = three ? Shape{d3(rng), d3(rng), d3(rng)} : Shape{d2(rng), d2(rng)};
        const Mask mask = oracle::random_mask(shape, fill(rng), rng);
        const Spacing spacing{sp(rng), sp(rng), three ? sp(rng) : 1.0};
        std::vector<Index3> zeros;
        SeedSet seeds;
        for (int k = npts(rng); k > 0; --k) {
            const Index3 c = shape.coord(std::uniform_int_distribution<std::size_t>(0, shape.size() - 1)(rng));
            zeros.push_back(c);
            seeds.points.push_back({double(c[0]), double(c[1]), double(c[2])});
        }
        const auto fast = exact_edt(mask, seeds, spacing);
        const auto slow = oracle::edt(mask, zeros, spacing);
        for (std::size_t i = 0; i < shape.size(); ++i) REQUIRE(fast.values[i] == doctest::Approx(slow[i]).epsilon(1e-12));
        CHECK(shape.index(farthest_point(fast, mask)) == oracle::argmax(slow, mask));
    }
}

TEST_CASE("adding a zero point never increases distances")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        const Shape shape{9, 8, 5};
        const Mask mask = oracle::random_mask(shape, 0.8, rng);
        SeedSet seeds;
        auto before = exact_edt(mask, seeds).values;
        for (int k = 0; k < 4; ++k) {
            const Index3 c = shape.coord(std::uniform_int_distribution<std::size_t>(0, shape.size() - 1)(rng));
            seeds.points.push_back({double(c[0]), double(c[1]), double(c[2])});
            const auto after = exact_edt(mask, seeds).values;
            for (std::size_t i = 0; i < after.size(); ++i) REQUIRE(after[i] <= before[i]);
            before = after;
        }
    }
}

TEST_CASE("distance field is 1-Lipschitz between face neighbours")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> sp(0.5, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Shape shape{10, 9, 7};
        const Spacing spacing{sp(rng), sp(rng), sp(rng)};
        const Mask mask = oracle::random_mask(shape, 0.85, rng);
        const auto f = exact_edt(mask, {}, spacing);
        for (std::size_t i = 0; i < shape.size(); ++i) {
            const Index3 c = shape.coord(i);
            for (int a = 0; a < 3; ++a) {
                Index3 n = c;
                ++n[a];
                if (!shape.contains(n)) continue;
                REQUIRE(std::abs(f.values[i] - f.at(n)) <= spacing[a] + 1e-12);
            }
        }
    }
}

TEST_CASE("incremental lowering equals recomputation bit for bit")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> sp(0.5, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Shape shape = trial % 2 ? Shape{11, 9, 6} : Shape{20, 17};
        const Spacing spacing = checked_spacing(shape, {sp(rng), sp(rng), sp(rng)});
        const Mask mask = oracle::random_mask(shape, 0.9, rng);
        std::vector<double> field = squared_edt(mask, {}, spacing);
        std::vector<Index3> zeros;
        for (int k = 0; k < 6; ++k) {
            double top = 0.0;
            for (std::size_t i = 0; i < field.size(); ++i)
                if (mask[i]) top = std::max(top, field[i]);
            const Index3 p = shape.coord(std::uniform_int_distribution<std::size_t>(0, shape.size() - 1)(rng));
            zeros.push_back(p);
            lower_with_point(field, shape, p, spacing, top);
            const auto fresh = squared_edt(mask, zeros, spacing);
            for (std::size_t i = 0; i < field.size(); ++i)
                REQUIRE(field[i] == fresh[i]);
        }
    }
}

TEST_CASE("squared distance helper")
{
    CHECK(squared_distance({0, 0, 0}, {3, 4, 0}, kUnitSpacing) == 25.0);
    CHECK(squared_distance({0, 0, 0}, {1, 1, 1}, {2.0, 3.0, 0.5}) == 4.0 + 9.0 + 0.25);
}

TEST_CASE("errors")
{
    const Mask m = Mask::full(Shape{3, 3});
    CHECK_THROWS_AS(farthest_point(exact_edt(m, {}), Mask::full(Shape{3, 4})), Error);
    CHECK_THROWS_AS(squared_edt(m, std::vector<Index3>{{5, 0, 0}}, kUnitSpacing), Error);
}
