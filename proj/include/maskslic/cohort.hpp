#pragma once

// Supervoxel-then-cluster analysis of 4D (3D + time) series: temporal PCA
// features, per-region descriptors and cohort-wide k-means.

#include "maskslic/volume.hpp"

#include <string>
#include <vector>

namespace maskslic {

/// Time curves on a spatial grid. Values are stored voxel-major with the
/// frame index innermost.
class TemporalSeries {
public:
    TemporalSeries() = default;
    TemporalSeries(Shape shape, int frames, std::vector<double> values, Spacing spacing = kUnitSpacing);

    const Shape& shape() const noexcept { return shape_; }
    int frames() const noexcept { return frames_; }
    const Spacing& spacing() const noexcept { return spacing_; }
    std::span<const double> curve(std::size_t voxel) const noexcept
    {
        return {values_.data() + voxel * frames_, static_cast<std::size_t>(frames_)};
    }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    Shape shape_;
    int frames_ = 0;
    Spacing spacing_ = kUnitSpacing;
    std::vector<double> values_;
};

struct PcaResult {
    FeatureVolume scores;                        // one channel per component; zero off-mask
    std::vector<std::vector<double>> components;  // unit vectors of length T
    std::vector<double> eigenvalues;             // decreasing
    std::vector<double> mean_curve;
};

/// Principal components of the in-mask time curves. Component signs are
/// fixed so that each component's largest-magnitude entry is positive.
PcaResult temporal_pca_full(const TemporalSeries& series, const Mask& mask, int n_components);

FeatureVolume temporal_pca(const TemporalSeries& series, const Mask& mask, int n_components);

struct RegionDescriptor {
    std::string case_id;
    int region_id = 0;
    std::vector<double> feature_means;
    std::size_t voxel_count = 0;
};

std::vector<RegionDescriptor> extract_descriptors(const FeatureVolume& volume, const Labeling& labeling,
                                                  const std::string& case_id = "");

struct CohortClustering {
    int k = 0;
    std::vector<std::vector<double>> centroids;
    std::vector<int> assignment;
    double inertia = 0.0;
    std::vector<double> inertia_trace;  // after each assignment step
    int iterations = 0;
};

struct KMeansOptions {
    int max_iters = 100;
};

/// Lloyd's k-means with a deterministic farthest-point start: the item
/// closest to the mean first, then repeatedly the item farthest from the
/// chosen centroids (ties go to the lowest index).
CohortClustering kmeans_cohort(const std::vector<std::vector<double>>& items, int k,
                               const KMeansOptions& options = {});

/// Z-scores each feature column in place over all items. Constant columns
/// are centred only.
void standardize(std::vector<std::vector<double>>& items);

/// Paints each supervoxel with the cohort cluster of its descriptor.
/// `first_item` is the index of this case's first descriptor in the
/// clustering's assignment list.
LabelGrid propagate_labels(const CohortClustering& clustering, const Labeling& labeling,
                          const std::vector<RegionDescriptor>& descriptors, std::size_t first_item = 0);

}  // namespace maskslic
