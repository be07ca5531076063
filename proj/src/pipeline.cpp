#include "maskslic/pipeline.hpp"

#include "maskslic/io.hpp"
#include "maskslic/seeding.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace maskslic {

SlicParams with_relative_compactness(SlicParams params, const Mask& mask, const Spacing& spacing)
{
    params.validate();
    double scale = 0.0;
    switch (params.backend) {
    case Backend::MaskSlic: scale = region_scale(mask, params.n_regions, spacing); break;
    case Backend::NaiveWholeImage: {
        const auto seeds = seed_grid(mask.shape(), params.n_regions, spacing);
        scale = region_scale(Mask::full(mask.shape()), static_cast<int>(seeds.size()), spacing);
        break;
    }
    case Backend::NaiveGridFiltered: {
        int inside = 0;
        for (const Point& p : seed_grid(mask.shape(), params.n_regions, spacing).points)
            inside += mask.at(round_to_voxel(p));
        scale = region_scale(mask, std::max(inside, 1), spacing);
        break;
    }
    }
    params.compactness *= scale;
    return params;
}

std::string_view to_string(CohortMode mode)
{
    return mode == CohortMode::Supervoxel ? "supervoxel" : "voxel";
}

CohortMode cohort_mode_from_string(std::string_view name)
{
    if (name == "supervoxel") return CohortMode::Supervoxel;
    if (name == "voxel") return CohortMode::Voxel;
    throw Error(ErrorCode::InvalidArgument, "mode must be supervoxel or voxel");
}

CohortResult run_cohort(const std::vector<CohortCase>& cases, const CohortOptions& options)
{
    if (cases.empty()) throw Error(ErrorCode::TooFewItems, "cohort has no cases");
    CohortResult result;
    std::vector<std::vector<double>> items;
    std::vector<std::size_t> first_item;
    std::size_t channels = 0;

    for (const CohortCase& c : cases) {
        if (!(c.series.shape() == c.mask.shape()))
            throw Error(ErrorCode::DimsMismatch, "case " + c.id + ": series and mask dims differ");
        const FeatureVolume scores = temporal_pca(c.series, c.mask, options.pca_components);
        const FeatureVolume& features = c.features ? *c.features : scores;
        validate_pair(features, c.mask);
        if (channels == 0) channels = static_cast<std::size_t>(features.channels());
        if (static_cast<std::size_t>(features.channels()) != channels)
            throw Error(ErrorCode::DimsMismatch, "cases carry different feature channel counts");

        first_item.push_back(items.size());
        if (options.mode == CohortMode::Supervoxel) {
            SlicParams p = options.slic;
            p.backend = Backend::MaskSlic;
            p.n_regions = std::min<int>(p.n_regions, static_cast<int>(c.mask.count()));
            if (options.relative_compactness) p = with_relative_compactness(p, c.mask, scores.spacing());
            Labeling sv = mask_slic(scores, c.mask, p);
            auto desc = extract_descriptors(features, sv, c.id);
            for (const auto& d : desc) items.push_back(d.feature_means);
            result.supervoxels.push_back(std::move(sv));
            result.descriptors.push_back(std::move(desc));
        } else {
            for (std::size_t i = 0; i < features.voxels(); ++i)
                if (c.mask[i]) items.emplace_back(features.at(i).begin(), features.at(i).end());
        }
    }

    if (options.standardize) standardize(items);
    result.clustering = kmeans_cohort(items, options.k, options.kmeans);

    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        if (options.mode == CohortMode::Supervoxel) {
            result.maps.push_back(propagate_labels(result.clustering, result.supervoxels[ci], result.descriptors[ci],
                                                   first_item[ci]));
        } else {
            const Mask& mask = cases[ci].mask;
            LabelGrid map{mask.shape(), std::vector<std::int32_t>(mask.shape().size(), Labeling::kBackground)};
            std::size_t item = first_item[ci];
            for (std::size_t i = 0; i < map.labels.size(); ++i)
                if (mask[i]) map.labels[i] = result.clustering.assignment[item++];
            result.maps.push_back(std::move(map));
        }
    }
    return result;
}

double permutation_agreement(const LabelGrid& predicted, const LabelGrid& truth, const Mask& mask)
{
    if (!(predicted.shape == mask.shape()) || !(truth.shape == mask.shape()))
        throw Error(ErrorCode::DimsMismatch, "label grids and mask dims differ");
    std::int32_t kp = 0, kt = 0;
    for (std::size_t i = 0; i < predicted.labels.size(); ++i) {
        if (!mask[i]) continue;
        kp = std::max(kp, predicted.labels[i] + 1);
        kt = std::max(kt, truth.labels[i] + 1);
    }
    const int k = std::max(kp, kt);
    if (k > 9) throw Error(ErrorCode::InvalidArgument, "permutation agreement supports at most 9 labels");
    std::vector<std::size_t> confusion(static_cast<std::size_t>(k) * k, 0);
    for (std::size_t i = 0; i < predicted.labels.size(); ++i) {
        if (!mask[i] || predicted.labels[i] < 0 || truth.labels[i] < 0) continue;
        ++confusion[predicted.labels[i] * k + truth.labels[i]];
    }
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
        std::size_t hits = 0;
        for (int p = 0; p < k; ++p) hits += confusion[p * k + perm[p]];
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(mask.count());
}

BenchTiming time_segment(const FeatureVolume& volume, const Mask& mask, const SlicParams& params, int repeats,
                         Labeling* last)
{
    if (repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
    BenchTiming t;
    t.backend = params.backend;
    t.n_regions = params.n_regions;
    for (int r = 0; r < repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        Labeling out = segment(volume, mask, params);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        t.seconds.push_back(elapsed.count());
        t.regions_in_mask = out.num_regions();
        if (last && r == 0) *last = std::move(out);
    }
    std::vector<double> sorted = t.seconds;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    t.median_seconds = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    return t;
}

std::vector<BenchTiming> bench_matched(const FeatureVolume& volume, const Mask& mask, const SlicParams& params,
                                       int repeats, bool relative_compactness)
{
    SlicParams naive = params;
    naive.backend = Backend::NaiveWholeImage;
    if (relative_compactness) naive = with_relative_compactness(naive, mask, volume.spacing());
    BenchTiming baseline = time_segment(volume, mask, naive, repeats);

    SlicParams ours = params;
    ours.backend = Backend::MaskSlic;
    ours.n_regions = baseline.regions_in_mask;
    if (relative_compactness) ours = with_relative_compactness(ours, mask, volume.spacing());
    BenchTiming masked = time_segment(volume, mask, ours, repeats);
    return {masked, baseline};
}

}  // namespace maskslic
