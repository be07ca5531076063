#include "maskslic/distance_transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maskslic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D lower envelope of parabolas f(q) + (s (p - q))^2 along one line.
// Infinite sites are skipped; an all-infinite line stays infinite.
void envelope_1d(const double* f, double* out, int n, double s, std::vector<int>& v, std::vector<double>& z)
{
    v.resize(n);
    z.resize(n + 1);
    const double s2 = s * s;
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        // z[0] is -inf, so the pop loop always stops at k == 0.
        double inter = 0.0;
        for (;;) {
            const int r = v[k];
            inter = ((f[q] + s2 * q * q) - (f[r] + s2 * r * r)) / (2.0 * s2 * (q - r));
            if (inter > z[k]) break;
            --k;
        }
        ++k;
        v[k] = q;
        z[k] = inter;
        z[k + 1] = kInf;
    }
    if (k < 0) {
        std::fill(out, out + n, kInf);
        return;
    }
    int j = 0;
    for (int p = 0; p < n; ++p) {
        while (z[j + 1] < p) ++j;
        const double t = s * static_cast<double>(p - v[j]);
        out[p] = f[v[j]] + t * t;
    }
}

}  // namespace

double squared_distance(const Index3& a, const Index3& b, const Spacing& spacing) noexcept
{
    const double t0 = spacing[0] * static_cast<double>(a[0] - b[0]);
    const double t1 = spacing[1] * static_cast<double>(a[1] - b[1]);
    const double t2 = spacing[2] * static_cast<double>(a[2] - b[2]);
    return (t0 * t0 + t1 * t1) + t2 * t2;
}

std::vector<double> squared_edt(const Mask& mask, std::span<const Index3> zero_points, const Spacing& spacing)
{
    const Shape& shape = mask.shape();
    const int nd = shape.ndim();
    const Spacing sp = checked_spacing(shape, spacing);

    // Pad each real axis by one voxel on both sides: the ring stands in for
    // the virtual out-of-grid border.
    Index3 pd = shape.dims();
    for (int a = 0; a < nd; ++a) pd[a] += 2;
    const std::size_t total = static_cast<std::size_t>(pd[0]) * pd[1] * pd[2];
    auto pidx = [&](int i, int j, int k) { return (static_cast<std::size_t>(i) * pd[1] + j) * pd[2] + k; };
    const int off0 = nd > 0 ? 1 : 0, off1 = nd > 1 ? 1 : 0, off2 = nd > 2 ? 1 : 0;

    std::vector<double> g(total, 0.0);
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (!mask[i]) continue;
        Index3 c = shape.coord(i);
        g[pidx(c[0] + off0, c[1] + off1, c[2] + off2)] = kInf;
    }
    for (const Index3& z : zero_points) {
        if (!shape.contains(z)) throw Error(ErrorCode::OutOfBounds, "zero point outside the grid");
        g[pidx(z[0] + off0, z[1] + off1, z[2] + off2)] = 0.0;
    }

    std::vector<double> line_in, line_out;
    std::vector<int> v;
    std::vector<double> zz;
    for (int axis = 0; axis < nd; ++axis) {
        const int n = pd[axis];
        line_in.resize(n);
        line_out.resize(n);
        const int o1 = (axis + 1) % 3, o2 = (axis + 2) % 3;
        for (int a = 0; a < pd[o1]; ++a) {
            for (int b = 0; b < pd[o2]; ++b) {
                Index3 c{};
                c[o1] = a;
                c[o2] = b;
                for (int p = 0; p < n; ++p) {
                    c[axis] = p;
                    line_in[p] = g[pidx(c[0], c[1], c[2])];
                }
                envelope_1d(line_in.data(), line_out.data(), n, sp[axis], v, zz);
                for (int p = 0; p < n; ++p) {
                    c[axis] = p;
                    g[pidx(c[0], c[1], c[2])] = line_out[p];
                }
            }
        }
    }

    std::vector<double> out(shape.size());
    for (std::size_t i = 0; i < shape.size(); ++i) {
        Index3 c = shape.coord(i);
        out[i] = g[pidx(c[0] + off0, c[1] + off1, c[2] + off2)];
    }
    return out;
}

DistanceField exact_edt(const Mask& mask, const SeedSet& extra_zero_points, const Spacing& spacing)
{
    if (mask.count() == 0) throw Error(ErrorCode::EmptyMask, "mask has no foreground voxel");
    std::vector<Index3> zeros;
    zeros.reserve(extra_zero_points.size());
    for (const Point& p : extra_zero_points.points) zeros.push_back(round_to_voxel(p));
    DistanceField field{mask.shape(), squared_edt(mask, zeros, spacing)};
    for (double& v : field.values) v = std::sqrt(v);
    return field;
}

void lower_with_point(std::vector<double>& squared_field, const Shape& shape, const Index3& p,
                      const Spacing& spacing, double bound_sq)
{
    Index3 lo{}, hi{};
    const double reach = std::sqrt(std::max(bound_sq, 0.0));
    for (int a = 0; a < 3; ++a) {
        const int r = std::isfinite(reach) ? static_cast<int>(std::floor(reach / spacing[a])) + 1 : shape[a];
        lo[a] = std::max(0, p[a] - r);
        hi[a] = std::min(shape[a], p[a] + r + 1);
    }
    Index3 c{};
    for (c[0] = lo[0]; c[0] < hi[0]; ++c[0])
        for (c[1] = lo[1]; c[1] < hi[1]; ++c[1])
            for (c[2] = lo[2]; c[2] < hi[2]; ++c[2]) {
                double& f = squared_field[shape.index(c)];
                f = std::min(f, squared_distance(c, p, spacing));
            }
}

Index3 farthest_point(const DistanceField& field, const Mask& mask)
{
    if (mask.count() == 0) throw Error(ErrorCode::EmptyMask, "mask has no foreground voxel");
    if (!(field.shape == mask.shape())) throw Error(ErrorCode::DimsMismatch, "field and mask dims differ");
    std::size_t best = mask.shape().size();
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        if (!mask[i]) continue;
        if (best == mask.shape().size() || field.values[i] > field.values[best]) best = i;
    }
    return mask.shape().coord(best);
}

}  // namespace maskslic
