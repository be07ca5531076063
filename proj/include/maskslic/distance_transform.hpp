#pragma once

// Exact Euclidean distance transform of a mask with respect to the label
// set L = background + virtual out-of-grid border + extra zero points.

#include "maskslic/volume.hpp"

#include <span>
#include <vector>

namespace maskslic {

struct DistanceField {
    Shape shape;
    std::vector<double> values;

    double at(const Index3& c) const { return values[shape.index(c)]; }
};

/// Squared spacing-scaled distances, computed with a separable
/// lower-envelope scheme (Felzenszwalb & Huttenlocher) over a grid padded
/// by one background voxel on every real axis.
std::vector<double> squared_edt(const Mask& mask, std::span<const Index3> zero_points,
                                const Spacing& spacing);

DistanceField exact_edt(const Mask& mask, const SeedSet& extra_zero_points,
                        const Spacing& spacing = kUnitSpacing);

/// Squared spacing-scaled distance between two voxels. The summation order
/// matches squared_edt so the two agree bit for bit on the same pair.
double squared_distance(const Index3& a, const Index3& b, const Spacing& spacing) noexcept;

/// Lowers a squared field in place with the distance to point p.
/// Voxels farther than sqrt(bound_sq) from p are skipped; pass the current
/// field maximum to keep the update local without changing the result.
void lower_with_point(std::vector<double>& squared_field, const Shape& shape, const Index3& p,
                      const Spacing& spacing, double bound_sq);

/// In-mask voxel with the largest value; ties go to the first in row-major order.
Index3 farthest_point(const DistanceField& field, const Mask& mask);

}  // namespace maskslic
