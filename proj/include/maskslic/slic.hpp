#pragma once

// Masked SLIC clustering and the two whole-image baselines it is compared
// against.

#include "maskslic/volume.hpp"

#include <span>
#include <vector>

namespace maskslic {

/// sqrt(d_f^2 + (d_s / r)^2) with d_f the Euclidean feature norm and d_s the
/// spacing-scaled spatial norm.
double slic_distance(std::span<const double> feature_delta, std::span<const double> spatial_delta, double r,
                     const Spacing& spacing = kUnitSpacing);

struct ClusterCentre {
    Point position{};
    std::vector<double> features;
};

struct ClusterState {
    std::vector<ClusterCentre> centres;
    Labeling assignments;
    double objective = 0.0;
    /// Objective after each assignment step, first iteration first.
    std::vector<double> objective_trace;
    int iterations = 0;
};

/// Region scale S = (physical in-mask volume / n)^(1/ndim).
double region_scale(const Mask& mask, int n_regions, const Spacing& spacing);

/// Local k-means over in-mask voxels with the combined distance. Each voxel
/// considers the centres whose +-2S window covers it plus the centre it held
/// last iteration; voxels reached by no window fall back to the globally
/// nearest centre. Empty clusters are re-seeded at the worst-fitting voxel so
/// every centre keeps at least one member.
ClusterState local_kmeans(const FeatureVolume& volume, const Mask& mask, const SeedSet& seeds,
                          const SlicParams& params, double scale);

/// Full masked pipeline without connectivity enforcement: farthest-point
/// seeds, spatial relaxation and local k-means, all evaluated in the frame
/// of the mask's bounding box.
ClusterState mask_slic_state(const FeatureVolume& volume, const Mask& mask, const SlicParams& params);

Labeling mask_slic(const FeatureVolume& volume, const Mask& mask, const SlicParams& params);

/// Grid-seeded SLIC over the whole image, intersected with the mask.
Labeling naive_whole_image(const FeatureVolume& volume, const Mask& mask, const SlicParams& params);

/// Grid seeds that fall inside the mask, then masked k-means. Throws
/// NoSeedsInMask when the grid misses the mask entirely.
Labeling naive_grid_filtered(const FeatureVolume& volume, const Mask& mask, const SlicParams& params);

/// Dispatches on params.backend.
Labeling segment(const FeatureVolume& volume, const Mask& mask, const SlicParams& params);

/// Keeps the largest face-connected fragment of every label (ties: the
/// fragment holding the first voxel in row-major order) and merges each
/// other fragment into the neighbouring label it shares the most faces with
/// (ties: lowest label). In a separate mask component that holds no kept
/// fragment, the largest fragment keeps its label and the rest merge into it.
Labeling enforce_connectivity(const Labeling& labeling, const Mask& mask);

}  // namespace maskslic
