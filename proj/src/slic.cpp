#include "maskslic/slic.hpp"

#include "maskslic/parallel.hpp"
#include "maskslic/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace maskslic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kVoxelChunk = 4096;

struct Crop {
    BoundingBox box;
    FeatureVolume volume;
    Mask mask;
};

Crop crop_to_mask(const FeatureVolume& volume, const Mask& mask)
{
    const BoundingBox box = bounding_box(mask);
    const Shape local = box.shape(mask.shape().ndim());
    const int c = volume.channels();
    std::vector<double> data(local.size() * c);
    std::vector<std::uint8_t> bits(local.size());
    for (std::size_t i = 0; i < local.size(); ++i) {
        Index3 g = local.coord(i);
        for (int a = 0; a < 3; ++a) g[a] += box.lo[a];
        const std::size_t gi = mask.shape().index(g);
        bits[i] = mask[gi];
        auto f = volume.at(gi);
        std::copy(f.begin(), f.end(), data.begin() + i * c);
    }
    return {box, FeatureVolume(local, c, std::move(data), volume.spacing()), Mask(local, std::move(bits))};
}

std::vector<std::int32_t> paste_labels(const Shape& full, const BoundingBox& box, const Labeling& local)
{
    std::vector<std::int32_t> out(full.size(), Labeling::kBackground);
    for (std::size_t i = 0; i < local.shape().size(); ++i) {
        Index3 g = local.shape().coord(i);
        for (int a = 0; a < 3; ++a) g[a] += box.lo[a];
        out[full.index(g)] = local[i];
    }
    return out;
}

class Engine {
public:
    Engine(const FeatureVolume& volume, const Mask& mask, const SlicParams& params, double scale)
        : volume_(volume), mask_(mask), shape_(mask.shape()), sp_(volume.spacing()), channels_(volume.channels()),
          inv_r2_(1.0 / (params.compactness * params.compactness))
    {
        for (std::size_t i = 0; i < shape_.size(); ++i)
            if (mask_[i]) voxels_.push_back(i);
        for (int a = 0; a < 3; ++a) window_[a] = a < shape_.ndim() ? 2.0 * scale / sp_[a] : 0.0;
    }

    double distance2(std::size_t voxel, const ClusterCentre& c) const
    {
        auto f = volume_.at(voxel);
        double df2 = 0.0;
        for (int j = 0; j < channels_; ++j) {
            const double t = f[j] - c.features[j];
            df2 += t * t;
        }
        const Index3 x = shape_.coord(voxel);
        double ds2 = 0.0;
        for (int a = 0; a < 3; ++a) {
            const double t = sp_[a] * (x[a] - c.position[a]);
            ds2 += t * t;
        }
        return df2 + ds2 * inv_r2_;
    }

    ClusterState run(const SeedSet& seeds, const SlicParams& params)
    {
        const std::size_t n = seeds.size();
        centres_.assign(n, {});
        for (std::size_t k = 0; k < n; ++k) {
            centres_[k].position = seeds.points[k];
            auto f = volume_.at(shape_.index(round_to_voxel(seeds.points[k])));
            centres_[k].features.assign(f.begin(), f.end());
        }

        label_.assign(shape_.size(), -1);
        dist_.assign(shape_.size(), kInf);
        ClusterState state;
        for (int iter = 0; iter < params.max_iters; ++iter) {
            assign();
            fill_empty_clusters();
            state.objective_trace.push_back(objective());
            const double residual = update();
            state.iterations = iter + 1;
            if (params.residual_tol > 0.0 && residual <= params.residual_tol) break;
        }

        state.centres = centres_;
        state.objective = objective_for_centres();
        std::vector<std::int32_t> labels(shape_.size(), Labeling::kBackground);
        for (std::size_t v : voxels_) labels[v] = label_[v];
        state.assignments = Labeling(shape_, std::move(labels));
        return state;
    }

private:
    void assign()
    {
        const std::vector<std::int32_t> previous = label_;
        std::fill(dist_.begin(), dist_.end(), kInf);
        std::fill(label_.begin(), label_.end(), -1);
        const std::size_t n = centres_.size();

        // Slabs along the first axis; every voxel's outcome is independent of
        // the slab split, so the result does not depend on the worker count.
        parallel_chunks(static_cast<std::size_t>(shape_[0]), 4, [&](std::size_t, std::size_t r0, std::size_t r1) {
            for (std::size_t k = 0; k < n; ++k) {
                const Point& c = centres_[k].position;
                Index3 lo{}, hi{};
                bool empty = false;
                for (int a = 0; a < 3; ++a) {
                    lo[a] = std::max(0, static_cast<int>(std::ceil(c[a] - window_[a])));
                    hi[a] = std::min(shape_[a], static_cast<int>(std::floor(c[a] + window_[a])) + 1);
                }
                lo[0] = std::max(lo[0], static_cast<int>(r0));
                hi[0] = std::min(hi[0], static_cast<int>(r1));
                for (int a = 0; a < 3; ++a) empty = empty || lo[a] >= hi[a];
                if (empty) continue;
                Index3 x{};
                for (x[0] = lo[0]; x[0] < hi[0]; ++x[0])
                    for (x[1] = lo[1]; x[1] < hi[1]; ++x[1])
                        for (x[2] = lo[2]; x[2] < hi[2]; ++x[2]) {
                            const std::size_t v = shape_.index(x);
                            if (!mask_[v]) continue;
                            const double d2 = distance2(v, centres_[k]);
                            if (d2 < dist_[v]) {
                                dist_[v] = d2;
                                label_[v] = static_cast<std::int32_t>(k);
                            }
                        }
            }
        });

        parallel_chunks(voxels_.size(), kVoxelChunk, [&](std::size_t, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const std::size_t v = voxels_[i];
                const std::int32_t prev = previous[v];
                if (prev >= 0) {
                    const double d2 = distance2(v, centres_[prev]);
                    if (d2 < dist_[v] || (d2 == dist_[v] && prev < label_[v])) {
                        dist_[v] = d2;
                        label_[v] = prev;
                    }
                }
                if (label_[v] < 0) {
                    // outside every window
                    for (std::size_t k = 0; k < centres_.size(); ++k) {
                        const double d2 = distance2(v, centres_[k]);
                        if (d2 < dist_[v]) {
                            dist_[v] = d2;
                            label_[v] = static_cast<std::int32_t>(k);
                        }
                    }
                }
            }
        });
    }

    void fill_empty_clusters()
    {
        std::vector<std::size_t> counts(centres_.size(), 0);
        for (std::size_t v : voxels_) ++counts[label_[v]];
        for (std::size_t k = 0; k < centres_.size(); ++k) {
            if (counts[k] != 0) continue;
            std::size_t worst = shape_.size();
            for (std::size_t v : voxels_) {
                if (counts[label_[v]] <= 1) continue;
                if (worst == shape_.size() || dist_[v] > dist_[worst]) worst = v;
            }
            if (worst == shape_.size()) break;  // fewer voxels than centres
            --counts[label_[worst]];
            label_[worst] = static_cast<std::int32_t>(k);
            dist_[worst] = 0.0;
            counts[k] = 1;
            const Index3 x = shape_.coord(worst);
            centres_[k].position = {double(x[0]), double(x[1]), double(x[2])};
            auto f = volume_.at(worst);
            centres_[k].features.assign(f.begin(), f.end());
        }
    }

    double objective() const
    {
        std::vector<double> partial(chunk_count(voxels_.size(), kVoxelChunk), 0.0);
        parallel_chunks(voxels_.size(), kVoxelChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
            double acc = 0.0;
            for (std::size_t i = b; i < e; ++i) acc += dist_[voxels_[i]];
            partial[c] = acc;
        });
        return std::accumulate(partial.begin(), partial.end(), 0.0);
    }

    double objective_for_centres() const
    {
        double total = 0.0;
        for (std::size_t v : voxels_) total += distance2(v, centres_[label_[v]]);
        return total;
    }

    // Centroid update; returns the mean spacing-scaled centre movement.
    double update()
    {
        const std::size_t n = centres_.size();
        const std::size_t width = 4 + channels_;
        const std::size_t chunks = chunk_count(voxels_.size(), kVoxelChunk);
        std::vector<double> partial(chunks * n * width, 0.0);
        parallel_chunks(voxels_.size(), kVoxelChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
            double* acc = partial.data() + c * n * width;
            for (std::size_t i = b; i < e; ++i) {
                const std::size_t v = voxels_[i];
                double* slot = acc + label_[v] * width;
                const Index3 x = shape_.coord(v);
                slot[0] += x[0];
                slot[1] += x[1];
                slot[2] += x[2];
                slot[3] += 1.0;
                auto f = volume_.at(v);
                for (int j = 0; j < channels_; ++j) slot[4 + j] += f[j];
            }
        });

        double moved = 0.0;
        std::vector<double> sum(width);
        for (std::size_t k = 0; k < n; ++k) {
            std::fill(sum.begin(), sum.end(), 0.0);
            for (std::size_t c = 0; c < chunks; ++c)
                for (std::size_t j = 0; j < width; ++j) sum[j] += partial[(c * n + k) * width + j];
            if (sum[3] == 0.0) continue;
            Point next{sum[0] / sum[3], sum[1] / sum[3], sum[2] / sum[3]};
            double m2 = 0.0;
            for (int a = 0; a < 3; ++a) {
                const double t = sp_[a] * (next[a] - centres_[k].position[a]);
                m2 += t * t;
            }
            moved += std::sqrt(m2);
            centres_[k].position = next;
            for (int j = 0; j < channels_; ++j) centres_[k].features[j] = sum[4 + j] / sum[3];
        }
        return n ? moved / n : 0.0;
    }

    const FeatureVolume& volume_;
    const Mask& mask_;
    Shape shape_;
    Spacing sp_;
    int channels_;
    double inv_r2_;
    std::array<double, 3> window_{};
    std::vector<std::size_t> voxels_;
    std::vector<ClusterCentre> centres_;
    std::vector<std::int32_t> label_;
    std::vector<double> dist_;
};

void check_inputs(const FeatureVolume& volume, const Mask& mask, const SlicParams& params)
{
    validate_pair(volume, mask);
    params.validate();
}

}  // namespace

double slic_distance(std::span<const double> feature_delta, std::span<const double> spatial_delta, double r,
                     const Spacing& spacing)
{
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "compactness must be > 0");
    if (spatial_delta.size() > 3) throw Error(ErrorCode::InvalidArgument, "at most three spatial axes");
    double df2 = 0.0;
    for (double t : feature_delta) df2 += t * t;
    double ds2 = 0.0;
    for (std::size_t a = 0; a < spatial_delta.size(); ++a) {
        const double t = spacing[a] * spatial_delta[a];
        ds2 += t * t;
    }
    const double ds = std::sqrt(ds2);
    return std::sqrt(df2 + (ds / r) * (ds / r));
}

double region_scale(const Mask& mask, int n_regions, const Spacing& spacing)
{
    const Spacing sp = checked_spacing(mask.shape(), spacing);
    double voxel_volume = 1.0;
    for (int a = 0; a < mask.shape().ndim(); ++a) voxel_volume *= sp[a];
    return std::pow(static_cast<double>(mask.count()) * voxel_volume / n_regions, 1.0 / mask.shape().ndim());
}

ClusterState local_kmeans(const FeatureVolume& volume, const Mask& mask, const SeedSet& seeds,
                          const SlicParams& params, double scale)
{
    check_inputs(volume, mask, params);
    if (seeds.size() == 0) throw Error(ErrorCode::NoSeedsInMask, "no seeds to cluster from");
    check_seeds(mask, seeds);
    Engine engine(volume, mask, params, scale);
    return engine.run(seeds, params);
}

namespace {

struct CroppedRun {
    Crop crop;
    ClusterState state;  // in crop coordinates
};

CroppedRun run_in_mask_frame(const FeatureVolume& volume, const Mask& mask, const SlicParams& params)
{
    check_inputs(volume, mask, params);
    if (static_cast<std::size_t>(params.n_regions) > mask.count())
        throw Error(ErrorCode::TooManySeeds, "n_regions exceeds the number of mask voxels");

    Crop crop = crop_to_mask(volume, mask);
    const Spacing& sp = volume.spacing();
    SeedSet seeds = place_seeds(crop.mask, params.n_regions, sp);
    seeds = relax_seeds(crop.mask, seeds, sp, params.max_iters);
    ClusterState state = local_kmeans(crop.volume, crop.mask, seeds, params,
                                      region_scale(crop.mask, params.n_regions, sp));
    return {std::move(crop), std::move(state)};
}

}  // namespace

ClusterState mask_slic_state(const FeatureVolume& volume, const Mask& mask, const SlicParams& params)
{
    auto [crop, state] = run_in_mask_frame(volume, mask, params);
    for (auto& c : state.centres)
        for (int a = 0; a < 3; ++a) c.position[a] += crop.box.lo[a];
    state.assignments = Labeling(mask.shape(), paste_labels(mask.shape(), crop.box, state.assignments));
    return state;
}

Labeling mask_slic(const FeatureVolume& volume, const Mask& mask, const SlicParams& params)
{
    // Connectivity is resolved inside the crop too, so the result depends on
    // the mask-relative frame only.
    auto [crop, state] = run_in_mask_frame(volume, mask, params);
    Labeling local = params.enforce_connectivity ? enforce_connectivity(state.assignments, crop.mask)
                                                 : state.assignments;
    return Labeling(mask.shape(), paste_labels(mask.shape(), crop.box, local));
}

Labeling naive_whole_image(const FeatureVolume& volume, const Mask& mask, const SlicParams& params)
{
    check_inputs(volume, mask, params);
    const Mask everything = Mask::full(volume.shape());
    const SeedSet seeds = seed_grid(volume.shape(), params.n_regions, volume.spacing());
    ClusterState state = local_kmeans(volume, everything, seeds, params,
                                      region_scale(everything, static_cast<int>(seeds.size()), volume.spacing()));
    Labeling whole = params.enforce_connectivity ? enforce_connectivity(state.assignments, everything)
                                                 : state.assignments;
    std::vector<std::int32_t> labels = whole.labels();
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (!mask[i]) labels[i] = Labeling::kBackground;
    return compact_labels(mask.shape(), std::move(labels));
}

Labeling naive_grid_filtered(const FeatureVolume& volume, const Mask& mask, const SlicParams& params)
{
    check_inputs(volume, mask, params);
    SeedSet inside;
    for (const Point& p : seed_grid(volume.shape(), params.n_regions, volume.spacing()).points)
        if (mask.at(round_to_voxel(p))) inside.points.push_back(p);
    if (inside.size() == 0) throw Error(ErrorCode::NoSeedsInMask, "no grid seed falls inside the mask");

    ClusterState state = local_kmeans(volume, mask, inside, params,
                                      region_scale(mask, static_cast<int>(inside.size()), volume.spacing()));
    return params.enforce_connectivity ? enforce_connectivity(state.assignments, mask) : state.assignments;
}

Labeling segment(const FeatureVolume& volume, const Mask& mask, const SlicParams& params)
{
    switch (params.backend) {
    case Backend::MaskSlic: return mask_slic(volume, mask, params);
    case Backend::NaiveWholeImage: return naive_whole_image(volume, mask, params);
    case Backend::NaiveGridFiltered: return naive_grid_filtered(volume, mask, params);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown backend");
}

Labeling enforce_connectivity(const Labeling& labeling, const Mask& mask)
{
    labeling.check_against(mask);
    const Shape& shape = labeling.shape();
    const std::size_t size = shape.size();
    const int nd = shape.ndim();

    auto for_each_neighbour = [&](std::size_t v, auto&& fn) {
        const Index3 x = shape.coord(v);
        for (int a = 0; a < nd; ++a)
            for (int step : {-1, 1}) {
                Index3 y = x;
                y[a] += step;
                if (shape.contains(y)) fn(shape.index(y));
            }
    };

    // Face-connected fragments, numbered in order of their first voxel.
    std::vector<std::int32_t> comp(size, -1);
    std::vector<std::int32_t> comp_label;
    std::vector<std::size_t> comp_size;
    std::vector<std::size_t> order;  // voxels grouped by fragment
    std::vector<std::size_t> comp_begin;
    order.reserve(mask.count());
    for (std::size_t s = 0; s < size; ++s) {
        if (labeling[s] < 0 || comp[s] >= 0) continue;
        const auto id = static_cast<std::int32_t>(comp_label.size());
        const std::int32_t label = labeling[s];
        comp_begin.push_back(order.size());
        comp[s] = id;
        order.push_back(s);
        for (std::size_t head = comp_begin.back(); head < order.size(); ++head) {
            for_each_neighbour(order[head], [&](std::size_t w) {
                if (comp[w] < 0 && labeling[w] == label) {
                    comp[w] = id;
                    order.push_back(w);
                }
            });
        }
        comp_label.push_back(label);
        comp_size.push_back(order.size() - comp_begin.back());
    }
    comp_begin.push_back(order.size());
    const std::size_t n_comp = comp_label.size();

    std::vector<std::int32_t> main_comp(labeling.num_regions(), -1);
    for (std::size_t c = 0; c < n_comp; ++c) {
        std::int32_t& m = main_comp[comp_label[c]];
        if (m < 0 || comp_size[c] > comp_size[m]) m = static_cast<std::int32_t>(c);
    }
    std::vector<std::uint8_t> resolved(n_comp, 0);
    for (std::int32_t m : main_comp)
        if (m >= 0) resolved[m] = 1;

    std::vector<std::size_t> faces(labeling.num_regions());
    for (bool changed = true; changed;) {
        changed = false;
        std::vector<std::pair<std::size_t, std::int32_t>> moves;
        for (std::size_t c = 0; c < n_comp; ++c) {
            if (resolved[c]) continue;
            std::fill(faces.begin(), faces.end(), 0);
            for (std::size_t i = comp_begin[c]; i < comp_begin[c + 1]; ++i)
                for_each_neighbour(order[i], [&](std::size_t w) {
                    if (comp[w] >= 0 && resolved[comp[w]]) ++faces[comp_label[comp[w]]];
                });
            std::int32_t best = -1;
            for (std::size_t l = 0; l < faces.size(); ++l)
                if (faces[l] > 0 && (best < 0 || faces[l] > faces[best])) best = static_cast<std::int32_t>(l);
            if (best >= 0) moves.emplace_back(c, best);
        }
        for (auto [c, label] : moves) {
            comp_label[c] = label;
            resolved[c] = 1;
            changed = true;
        }
        if (changed) continue;
        // What is left lies in mask islands holding no kept fragment. Keep the
        // largest such fragment as is and let the rest of its island merge in.
        std::size_t pick = n_comp;
        for (std::size_t c = 0; c < n_comp; ++c)
            if (!resolved[c] && (pick == n_comp || comp_size[c] > comp_size[pick])) pick = c;
        if (pick < n_comp) {
            resolved[pick] = 1;
            changed = true;
        }
    }

    std::vector<std::int32_t> out(size, Labeling::kBackground);
    for (std::size_t v = 0; v < size; ++v)
        if (comp[v] >= 0) out[v] = comp_label[comp[v]];
    return compact_labels(shape, std::move(out));
}

}  // namespace maskslic
