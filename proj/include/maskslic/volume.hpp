#pragma once

// Core grid types shared by every stage of the pipeline.
//
// Grids are 2D or 3D. Internally every shape carries three extents; a 2D
// grid (H, W) is stored as (H, W, 1) so the linear order (last axis
// fastest) is the same for both cases. Points and offsets likewise carry
// three components with the unused trailing one left at zero.

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace maskslic {

enum class ErrorCode {
    InvalidArgument,
    DimsMismatch,
    EmptyMask,
    NonFinite,
    OutOfBounds,
    TooManySeeds,
    NoSeedsInMask,
    DegenerateData,
    TooFewItems,
    DivisionByZero,
    BadMagic,
    VersionUnsupported,
    TruncatedPayload,
    BadSpec,
    IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

using Index3 = std::array<int, 3>;
using Offset = std::array<int, 3>;
using Point = std::array<double, 3>;
using Spacing = std::array<double, 3>;

inline constexpr Spacing kUnitSpacing{1.0, 1.0, 1.0};

class Shape {
public:
    Shape() = default;
    Shape(std::initializer_list<int> dims);
    explicit Shape(std::span<const int> dims);

    int ndim() const noexcept { return ndim_; }
    const Index3& dims() const noexcept { return dims_; }
    int operator[](int axis) const noexcept { return dims_[axis]; }
    std::size_t size() const noexcept
    {
        return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    }

    std::size_t index(const Index3& c) const noexcept
    {
        return (static_cast<std::size_t>(c[0]) * dims_[1] + c[1]) * dims_[2] + c[2];
    }
    Index3 coord(std::size_t i) const noexcept
    {
        Index3 c{};
        c[2] = static_cast<int>(i % dims_[2]);
        i /= dims_[2];
        c[1] = static_cast<int>(i % dims_[1]);
        c[0] = static_cast<int>(i / dims_[1]);
        return c;
    }
    bool contains(const Index3& c) const noexcept
    {
        for (int a = 0; a < 3; ++a)
            if (c[a] < 0 || c[a] >= dims_[a]) return false;
        return true;
    }

    friend bool operator==(const Shape&, const Shape&) = default;

    std::string to_string() const;

private:
    int ndim_ = 0;
    Index3 dims_{1, 1, 1};
};

/// Spacing with the unused trailing axis forced to 1. Throws on
/// non-positive or non-finite entries.
Spacing checked_spacing(const Shape& shape, const Spacing& spacing);

class FeatureVolume {
public:
    FeatureVolume() = default;
    FeatureVolume(Shape shape, int channels, std::vector<double> data,
                  Spacing spacing = kUnitSpacing);

    const Shape& shape() const noexcept { return shape_; }
    int channels() const noexcept { return channels_; }
    const Spacing& spacing() const noexcept { return spacing_; }
    std::size_t voxels() const noexcept { return shape_.size(); }

    std::span<const double> at(std::size_t voxel) const noexcept
    {
        return {data_.data() + voxel * channels_, static_cast<std::size_t>(channels_)};
    }
    const std::vector<double>& data() const noexcept { return data_; }

private:
    Shape shape_;
    int channels_ = 0;
    Spacing spacing_ = kUnitSpacing;
    std::vector<double> data_;
};

class Mask {
public:
    Mask() = default;
    /// Rejects masks with no foreground voxel.
    Mask(Shape shape, std::vector<std::uint8_t> bits);

    static Mask full(const Shape& shape);

    const Shape& shape() const noexcept { return shape_; }
    bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
    bool at(const Index3& c) const noexcept { return bits_[shape_.index(c)] != 0; }
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
    std::size_t count() const noexcept { return count_; }

    friend bool operator==(const Mask& a, const Mask& b)
    {
        return a.shape_ == b.shape_ && a.bits_ == b.bits_;
    }

private:
    Shape shape_;
    std::vector<std::uint8_t> bits_;
    std::size_t count_ = 0;
};

/// Inclusive-exclusive axis-aligned box of foreground voxels.
struct BoundingBox {
    Index3 lo{};
    Index3 hi{};
    Shape shape(int ndim) const;
};

BoundingBox bounding_box(const Mask& mask);

struct SeedSet {
    std::vector<Point> points;

    std::size_t size() const noexcept { return points.size(); }
    friend bool operator==(const SeedSet&, const SeedSet&) = default;
};

Index3 round_to_voxel(const Point& p) noexcept;

/// Throws unless every point rounds to a distinct in-mask voxel.
void check_seeds(const Mask& mask, const SeedSet& seeds);

class Labeling {
public:
    static constexpr std::int32_t kBackground = -1;

    Labeling() = default;
    /// Validates that labels are >= -1 and that 0..max are all present.
    Labeling(Shape shape, std::vector<std::int32_t> labels);

    const Shape& shape() const noexcept { return shape_; }
    std::int32_t operator[](std::size_t i) const noexcept { return labels_[i]; }
    const std::vector<std::int32_t>& labels() const noexcept { return labels_; }
    int num_regions() const noexcept { return num_regions_; }

    /// Voxel count per region.
    std::vector<std::size_t> region_sizes() const;

    /// Throws DimsMismatch/InvalidArgument unless labels are -1 exactly off-mask.
    void check_against(const Mask& mask) const;

    friend bool operator==(const Labeling& a, const Labeling& b)
    {
        return a.shape_ == b.shape_ && a.labels_ == b.labels_;
    }

private:
    Shape shape_;
    std::vector<std::int32_t> labels_;
    int num_regions_ = 0;
};

/// Plain integer grid without the contiguity rule of Labeling; holds
/// ground-truth label maps and cohort subregion maps whose ids are shared
/// across cases.
struct LabelGrid {
    Shape shape;
    std::vector<std::int32_t> labels;

    friend bool operator==(const LabelGrid&, const LabelGrid&) = default;
};

/// Relabels non-negative ids to 0..k-1 preserving their relative order.
Labeling compact_labels(const Shape& shape, std::vector<std::int32_t> labels);

/// Mask of voxels carrying a non-negative label.
Mask foreground_of(const Labeling& labeling);

enum class Backend { MaskSlic, NaiveWholeImage, NaiveGridFiltered };

std::string_view to_string(Backend backend);
Backend backend_from_string(std::string_view name);

struct SlicParams {
    int n_regions = 100;
    double compactness = 1.0;
    int max_iters = 10;
    double residual_tol = 0.0;
    bool enforce_connectivity = true;
    Backend backend = Backend::MaskSlic;

    void validate() const;
};

void validate_pair(const FeatureVolume& volume, const Mask& mask);

Mask translate_mask(const Mask& mask, const Offset& offset);

/// Shifts a labeling by offset; voxels shifted in from outside are background.
/// Throws OutOfBounds if a labelled voxel would leave the grid.
Labeling translate_labeling(const Labeling& labeling, const Offset& offset);

}  // namespace maskslic
