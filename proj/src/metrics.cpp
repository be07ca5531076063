#include "maskslic/metrics.hpp"

#include <algorithm>
#include <iterator>
#include <unordered_map>

namespace maskslic {

double dsc(std::span<const std::size_t> a, std::span<const std::size_t> b)
{
    if (a.empty() && b.empty()) return 0.0;
    std::size_t common = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++common;
            ++ia;
            ++ib;
        }
    }
    return 2.0 * static_cast<double>(common) / static_cast<double>(a.size() + b.size());
}

OverlapReport consistency_score(const Labeling& s1, const Labeling& s2, const Offset& offset)
{
    if (!(s1.shape() == s2.shape())) throw Error(ErrorCode::DimsMismatch, "labelings have different dims");
    const Shape& shape = s1.shape();
    const auto n1 = static_cast<std::size_t>(s1.num_regions());
    const auto n2 = static_cast<std::uint64_t>(s2.num_regions());

    const std::vector<std::size_t> size1 = s1.region_sizes();
    const std::vector<std::size_t> size2 = s2.region_sizes();

    // Sparse joint histogram of (p, q) overlaps.
    std::unordered_map<std::uint64_t, std::size_t> joint;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        const std::int32_t p = s1[i];
        if (p < 0) continue;
        Index3 c = shape.coord(i);
        for (int a = 0; a < 3; ++a) c[a] += offset[a];
        if (!shape.contains(c)) continue;
        const std::int32_t q = s2[shape.index(c)];
        if (q < 0) continue;
        ++joint[static_cast<std::uint64_t>(p) * n2 + static_cast<std::uint64_t>(q)];
    }

    OverlapReport report;
    report.n_regions = static_cast<int>(n1);
    report.per_region_delta.assign(n1, 0.0);
    for (const auto& [key, count] : joint) {
        const std::size_t p = key / n2;
        const std::size_t q = key % n2;
        const double d = 2.0 * static_cast<double>(count) / static_cast<double>(size1[p] + size2[q]);
        report.per_region_delta[p] = std::max(report.per_region_delta[p], d);
    }
    double total = 0.0;
    for (double d : report.per_region_delta) total += 1.0 - d;
    report.c_s = n1 ? total / static_cast<double>(n1) : 0.0;
    return report;
}

std::string_view to_string(LcAggregation agg)
{
    switch (agg) {
    case LcAggregation::VoxelMean: return "voxel-mean";
    case LcAggregation::RegionMean: return "region-mean";
    case LcAggregation::RegionMedian: return "region-median";
    }
    return "voxel-mean";
}

LcAggregation lc_aggregation_from_string(std::string_view name)
{
    if (name == "voxel-mean") return LcAggregation::VoxelMean;
    if (name == "region-mean") return LcAggregation::RegionMean;
    if (name == "region-median") return LcAggregation::RegionMedian;
    throw Error(ErrorCode::InvalidArgument, "unknown l_c aggregation '" + std::string(name) + "'");
}

ConsistencyReport label_consistency(const Labeling& labeling, const LabelGrid& ground_truth, const Mask& mask,
                                    LcAggregation agg)
{
    const Shape& shape = labeling.shape();
    if (!(ground_truth.shape == shape) || ground_truth.labels.size() != shape.size() || !(mask.shape() == shape))
        throw Error(ErrorCode::DimsMismatch, "ground truth, mask and labeling dims differ");

    const auto n = static_cast<std::size_t>(labeling.num_regions());
    std::vector<std::unordered_map<std::int32_t, std::size_t>> votes(n);
    ConsistencyReport report;
    report.region_sizes.assign(n, 0);
    for (std::size_t i = 0; i < shape.size(); ++i) {
        const std::int32_t l = labeling[i];
        if (l < 0 || !mask[i]) continue;
        ++votes[l][ground_truth.labels[i]];
        ++report.region_sizes[l];
    }

    report.per_region_lc.assign(n, 0.0);
    std::size_t majority_total = 0, voxel_total = 0;
    std::vector<double> present;
    for (std::size_t r = 0; r < n; ++r) {
        if (report.region_sizes[r] == 0) continue;
        std::size_t majority = 0;
        for (const auto& [label, count] : votes[r]) majority = std::max(majority, count);
        report.per_region_lc[r] = static_cast<double>(majority) / static_cast<double>(report.region_sizes[r]);
        majority_total += majority;
        voxel_total += report.region_sizes[r];
        present.push_back(report.per_region_lc[r]);
    }

    if (present.empty()) throw Error(ErrorCode::EmptyMask, "no labelled voxel inside the mask");
    switch (agg) {
    case LcAggregation::VoxelMean:
        report.summary_lc = static_cast<double>(majority_total) / static_cast<double>(voxel_total);
        break;
    case LcAggregation::RegionMean: {
        double sum = 0.0;
        for (double v : present) sum += v;
        report.summary_lc = sum / static_cast<double>(present.size());
        break;
    }
    case LcAggregation::RegionMedian: {
        std::sort(present.begin(), present.end());
        const std::size_t m = present.size();
        report.summary_lc = m % 2 ? present[m / 2] : 0.5 * (present[m / 2 - 1] + present[m / 2]);
        break;
    }
    }
    report.e = 1.0 - report.summary_lc;
    return report;
}

double error_increase(double e_baseline, double e_method)
{
    if (e_method == 0.0) throw Error(ErrorCode::DivisionByZero, "method error is zero; improvement is unbounded");
    return 100.0 * (e_baseline - e_method) / e_method;
}

}  // namespace maskslic
