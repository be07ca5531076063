#pragma once
// End-to-end experiment drivers shared by the command-line tool and the
// acceptance suite: the cohort subregion pipeline, label agreement under
// the best permutation, and repeat timing of the segmentation backends.

#include "maskslic/cohort.hpp"
#include "maskslic/slic.hpp"
#include "maskslic/volume.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace maskslic {

/// Sets r = compactness * S, with S the region scale the backend will use.
/// naive1 measures S over the whole grid, the masked backends over the mask.
SlicParams with_relative_compactness(SlicParams params, const Mask& mask, const Spacing& spacing);

struct CohortCase {
    std::string id;
    TemporalSeries series;
    Mask mask;
    /// Channels fed to clustering; the PCA scores are used when absent.
    std::optional<FeatureVolume> features;
};

enum class CohortMode { Supervoxel, Voxel };

std::string_view to_string(CohortMode mode);
CohortMode cohort_mode_from_string(std::string_view name);

struct CohortOptions {
    int k = 3;
    int pca_components = 3;
    CohortMode mode = CohortMode::Supervoxel;
    /// Supervoxel extraction on the PCA scores; compactness is relative
    /// (r = compactness * S) when relative_compactness is set.
    SlicParams slic{};
    bool relative_compactness = true;
    bool standardize = true;
    KMeansOptions kmeans{};
};

struct CohortResult {
    CohortClustering clustering;
    std::vector<LabelGrid> maps;                             // per case; -1 off-mask
    std::vector<std::vector<RegionDescriptor>> descriptors;  // supervoxel mode only
    std::vector<Labeling> supervoxels;                       // supervoxel mode only
};

/// Per case: temporal PCA over the mask, then (supervoxel mode) maskSLIC on
/// the scores and one descriptor per supervoxel, or (voxel mode) one item
/// per in-mask voxel. Items from all cases are pooled, optionally z-scored
/// and clustered into k labels which are painted back onto each case.
CohortResult run_cohort(const std::vector<CohortCase>& cases, const CohortOptions& options);

/// Fraction of mask voxels whose predicted label matches the truth after the
/// best one-to-one relabelling of predicted ids (at most 9 distinct ids per
/// side; labels < 0 inside the mask count as mismatches).
double permutation_agreement(const LabelGrid& predicted, const LabelGrid& truth, const Mask& mask);

struct BenchTiming {
    Backend backend = Backend::MaskSlic;
    int n_regions = 0;         // requested N
    int regions_in_mask = 0;   // labels in the output
    std::vector<double> seconds;
    double median_seconds = 0.0;
};

/// Times `repeats` runs of segment(). The first result is kept in `last`
/// when given.
BenchTiming time_segment(const FeatureVolume& volume, const Mask& mask, const SlicParams& params, int repeats,
                         Labeling* last = nullptr);

/// naive1 at params.n_regions over the whole image, then maskSLIC at the
/// region count naive1 left inside the mask.
std::vector<BenchTiming> bench_matched(const FeatureVolume& volume, const Mask& mask, const SlicParams& params,
                                       int repeats, bool relative_compactness);

}  // namespace maskslic
