#include "maskslic/seeding.hpp"

#include "maskslic/distance_transform.hpp"
#include "maskslic/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maskslic {

namespace {

constexpr std::size_t kChunk = 4096;

double squared_gap(const Index3& c, const Index3& origin, const Point& p, const Spacing& sp) noexcept
{
    double acc = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double t = sp[a] * (static_cast<double>(c[a] - origin[a]) - p[a]);
        acc += t * t;
    }
    return acc;
}

// Nearest in-mask voxel to p, where p is expressed relative to `origin`.
// Grows a search box until the best hit is provably global.
Index3 nearest_in_mask(const Mask& mask, const Point& p, const Index3& origin, const Spacing& sp,
                       const std::vector<std::uint8_t>& occupied)
{
    const Shape& shape = mask.shape();
    double reach = *std::min_element(sp.begin(), sp.begin() + std::max(1, shape.ndim()));
    for (;;) {
        Index3 lo{}, hi{};
        bool covers_grid = true;
        for (int a = 0; a < 3; ++a) {
            const double centre = p[a] + origin[a];
            const double r = reach / sp[a];
            lo[a] = std::max(0, static_cast<int>(std::ceil(centre - r)));
            hi[a] = std::min(shape[a], static_cast<int>(std::floor(centre + r)) + 1);
            covers_grid = covers_grid && lo[a] == 0 && hi[a] == shape[a];
        }
        double best_d2 = std::numeric_limits<double>::infinity();
        Index3 best{-1, -1, -1};
        Index3 c{};
        for (c[0] = lo[0]; c[0] < hi[0]; ++c[0])
            for (c[1] = lo[1]; c[1] < hi[1]; ++c[1])
                for (c[2] = lo[2]; c[2] < hi[2]; ++c[2]) {
                    const std::size_t i = shape.index(c);
                    if (!mask[i] || (!occupied.empty() && occupied[i])) continue;
                    const double d2 = squared_gap(c, origin, p, sp);
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = c;
                    }
                }
        if (best[0] >= 0 && (best_d2 <= reach * reach || covers_grid)) return best;
        if (covers_grid) throw Error(ErrorCode::TooManySeeds, "no free in-mask voxel left for a seed");
        reach *= 2.0;
    }
}

}  // namespace

Index3 nearest_mask_voxel(const Mask& mask, const Point& p, const Spacing& spacing,
                          const std::vector<std::uint8_t>& occupied)
{
    return nearest_in_mask(mask, p, Index3{0, 0, 0}, checked_spacing(mask.shape(), spacing), occupied);
}

SeedSet place_seeds(const Mask& mask, int n_regions, const Spacing& spacing, std::vector<double>* placement_distances)
{
    if (mask.count() == 0) throw Error(ErrorCode::EmptyMask, "mask has no foreground voxel");
    if (n_regions < 1) throw Error(ErrorCode::InvalidArgument, "n_regions must be >= 1");
    if (static_cast<std::size_t>(n_regions) > mask.count())
        throw Error(ErrorCode::TooManySeeds, "more seeds requested than mask voxels");

    const Shape& shape = mask.shape();
    const Spacing sp = checked_spacing(shape, spacing);
    std::vector<double> field = squared_edt(mask, {}, sp);

    SeedSet seeds;
    seeds.points.reserve(n_regions);
    if (placement_distances) placement_distances->clear();
    for (int k = 0; k < n_regions; ++k) {
        std::size_t best = shape.size();
        for (std::size_t i = 0; i < field.size(); ++i) {
            if (!mask[i]) continue;
            if (best == shape.size() || field[i] > field[best]) best = i;
        }
        const Index3 p = shape.coord(best);
        const double max_sq = field[best];
        seeds.points.push_back({double(p[0]), double(p[1]), double(p[2])});
        if (placement_distances) placement_distances->push_back(std::sqrt(max_sq));
        lower_with_point(field, shape, p, sp, max_sq);
    }
    return seeds;
}

SeedSet relax_seeds(const Mask& mask, const SeedSet& seeds, const Spacing& spacing, int max_iters)
{
    if (mask.count() == 0) throw Error(ErrorCode::EmptyMask, "mask has no foreground voxel");
    check_seeds(mask, seeds);
    const Shape& shape = mask.shape();
    const Spacing sp = checked_spacing(shape, spacing);
    const std::size_t n = seeds.size();
    if (n == 0) return seeds;

    // Work relative to the mask's bounding box so the arithmetic is
    // identical for translated copies of the same mask.
    const Index3 origin = bounding_box(mask).lo;
    std::vector<Index3> voxels;
    voxels.reserve(mask.count());
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (!mask[i]) continue;
        Index3 c = shape.coord(i);
        for (int a = 0; a < 3; ++a) c[a] -= origin[a];
        voxels.push_back(c);
    }

    std::vector<Point> centres(n);
    for (std::size_t k = 0; k < n; ++k)
        for (int a = 0; a < 3; ++a) centres[k][a] = seeds.points[k][a] - origin[a];

    const std::size_t chunks = chunk_count(voxels.size(), kChunk);
    std::vector<double> partial(chunks * n * 4);
    for (int iter = 0; iter < max_iters; ++iter) {
        std::fill(partial.begin(), partial.end(), 0.0);
        parallel_chunks(voxels.size(), kChunk, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            double* acc = partial.data() + chunk * n * 4;
            for (std::size_t v = begin; v < end; ++v) {
                const Index3& c = voxels[v];
                std::size_t nearest = 0;
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < n; ++k) {
                    const double d2 = squared_gap(c, Index3{0, 0, 0}, centres[k], sp);
                    if (d2 < best) {
                        best = d2;
                        nearest = k;
                    }
                }
                double* slot = acc + nearest * 4;
                slot[0] += c[0];
                slot[1] += c[1];
                slot[2] += c[2];
                slot[3] += 1.0;
            }
        });

        double max_move = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double sum[4] = {0, 0, 0, 0};
            for (std::size_t chunk = 0; chunk < chunks; ++chunk)
                for (int j = 0; j < 4; ++j) sum[j] += partial[(chunk * n + k) * 4 + j];
            if (sum[3] == 0.0) continue;  // empty cluster keeps its position
            Point next{sum[0] / sum[3], sum[1] / sum[3], sum[2] / sum[3]};
            double move2 = 0.0;
            for (int a = 0; a < 3; ++a) move2 += (next[a] - centres[k][a]) * (next[a] - centres[k][a]);
            max_move = std::max(max_move, std::sqrt(move2));
            centres[k] = next;
        }
        if (max_move < 0.5) break;
    }

    SeedSet out;
    out.points.reserve(n);
    std::vector<std::uint8_t> occupied(shape.size(), 0);
    for (const Point& c : centres) {
        const Index3 v = nearest_in_mask(mask, c, origin, sp, occupied);
        occupied[shape.index(v)] = 1;
        out.points.push_back({double(v[0]), double(v[1]), double(v[2])});
    }
    return out;
}

SeedSet seed_grid(const Shape& shape, int n_regions, const Spacing& spacing)
{
    if (n_regions < 1) throw Error(ErrorCode::InvalidArgument, "n_regions must be >= 1");
    const Spacing sp = checked_spacing(shape, spacing);
    const int nd = shape.ndim();
    double volume = 1.0;
    for (int a = 0; a < nd; ++a) volume *= shape[a] * sp[a];
    const double step = std::pow(volume / n_regions, 1.0 / nd);

    Index3 counts{1, 1, 1};
    std::array<double, 3> steps{1.0, 1.0, 1.0};
    for (int a = 0; a < nd; ++a) {
        counts[a] = std::clamp(static_cast<int>(std::lround(shape[a] * sp[a] / step)), 1, shape[a]);
        steps[a] = static_cast<double>(shape[a]) / counts[a];
    }

    SeedSet seeds;
    Index3 k{};
    for (k[0] = 0; k[0] < counts[0]; ++k[0])
        for (k[1] = 0; k[1] < counts[1]; ++k[1])
            for (k[2] = 0; k[2] < counts[2]; ++k[2]) {
                Point p{0.0, 0.0, 0.0};
                for (int a = 0; a < nd; ++a) p[a] = std::floor(k[a] * steps[a] + steps[a] / 2.0);
                seeds.points.push_back(p);
            }
    return seeds;
}

}  // namespace maskslic
