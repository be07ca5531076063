#pragma once

#include "maskslic/volume.hpp"

#include <vector>

namespace maskslic {

/// Iterative farthest-point placement of n seeds inside the mask. Each new
/// seed is the in-mask voxel maximizing the distance to the background, the
/// virtual grid border and all seeds placed so far (row-major tie-break).
///
/// If placement_distances is given it receives D(p*) for each placed seed,
/// in placement order.
SeedSet place_seeds(const Mask& mask, int n_regions, const Spacing& spacing = kUnitSpacing,
                    std::vector<double>* placement_distances = nullptr);

/// Spatial-only k-means relaxation of the seeds over the in-mask voxels.
/// Every in-mask voxel joins its globally nearest seed; seeds move to the
/// centroid of their members until no seed moves by 0.5 voxel or more, then
/// snap back to distinct in-mask voxels.
SeedSet relax_seeds(const Mask& mask, const SeedSet& seeds, const Spacing& spacing = kUnitSpacing,
                    int max_iters = 10);

/// Equidistant grid over the whole image. The reported count is the
/// product of the per-axis counts and is only approximately n_regions.
SeedSet seed_grid(const Shape& shape, int n_regions, const Spacing& spacing = kUnitSpacing);

/// Nearest in-mask voxel to p (spacing-scaled, row-major tie-break),
/// skipping voxels flagged in `occupied` when it is non-empty.
Index3 nearest_mask_voxel(const Mask& mask, const Point& p, const Spacing& spacing,
                          const std::vector<std::uint8_t>& occupied = {});

}  // namespace maskslic
