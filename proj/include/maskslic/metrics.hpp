#pragma once

#include "maskslic/volume.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace maskslic {

/// Dice coefficient 2|a n b| / (|a| + |b|) of two sorted, duplicate-free
/// voxel index lists. Two empty sets score 0.
double dsc(std::span<const std::size_t> a, std::span<const std::size_t> b);

struct OverlapReport {
    std::vector<double> per_region_delta;  // best Dice of each S1 region against S2
    double c_s = 0.0;
    int n_regions = 0;
};

/// Translation consistency of two supervoxel partitions. Each region p of
/// s1 is shifted by `offset` and scored by its best Dice against any region
/// of s2; C_s is the mean of (1 - best). Voxels shifted off the grid count
/// toward |p| but cannot overlap anything.
OverlapReport consistency_score(const Labeling& s1, const Labeling& s2, const Offset& offset = {0, 0, 0});

enum class LcAggregation { VoxelMean, RegionMean, RegionMedian };

std::string_view to_string(LcAggregation agg);
LcAggregation lc_aggregation_from_string(std::string_view name);

struct ConsistencyReport {
    std::vector<double> per_region_lc;
    std::vector<std::size_t> region_sizes;
    double summary_lc = 0.0;
    double e = 0.0;
};

/// Per-region fraction of voxels carrying the region's majority ground-truth
/// label, restricted to mask voxels.
ConsistencyReport label_consistency(const Labeling& labeling, const LabelGrid& ground_truth, const Mask& mask,
                                    LcAggregation agg = LcAggregation::VoxelMean);

/// Percentage error increase 100 (e_baseline - e_method) / e_method.
/// Throws DivisionByZero when e_method is 0.
double error_increase(double e_baseline, double e_method);

}  // namespace maskslic
