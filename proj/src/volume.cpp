#include "maskslic/volume.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace maskslic {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimsMismatch: return "DimsMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::TooManySeeds: return "TooManySeeds";
    case ErrorCode::NoSeedsInMask: return "NoSeedsInMask";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::TooFewItems: return "TooFewItems";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(what), code_(code)
{
}

Shape::Shape(std::initializer_list<int> dims)
    : Shape(std::span<const int>(dims.begin(), dims.size()))
{
}

Shape::Shape(std::span<const int> dims)
{
    if (dims.size() < 1 || dims.size() > 3)
        throw Error(ErrorCode::InvalidArgument, "grid must have 1 to 3 axes");
    ndim_ = static_cast<int>(dims.size());
    for (std::size_t a = 0; a < dims.size(); ++a) {
        if (dims[a] <= 0) throw Error(ErrorCode::InvalidArgument, "grid extents must be positive");
        dims_[a] = dims[a];
    }
}

std::string Shape::to_string() const
{
    std::ostringstream os;
    os << '(';
    for (int a = 0; a < ndim_; ++a) os << (a ? "," : "") << dims_[a];
    os << ')';
    return os.str();
}

Spacing checked_spacing(const Shape& shape, const Spacing& spacing)
{
    Spacing out = kUnitSpacing;
    for (int a = 0; a < shape.ndim(); ++a) {
        if (!std::isfinite(spacing[a]) || spacing[a] <= 0.0)
            throw Error(ErrorCode::InvalidArgument, "spacing must be finite and positive");
        out[a] = spacing[a];
    }
    return out;
}

FeatureVolume::FeatureVolume(Shape shape, int channels, std::vector<double> data, Spacing spacing)
    : shape_(shape), channels_(channels), spacing_(checked_spacing(shape, spacing)), data_(std::move(data))
{
    if (channels_ <= 0) throw Error(ErrorCode::InvalidArgument, "channel count must be positive");
    if (data_.size() != shape_.size() * static_cast<std::size_t>(channels_))
        throw Error(ErrorCode::DimsMismatch, "feature data length does not match dims x channels");
    for (double v : data_)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "feature volume contains NaN or Inf");
}

Mask::Mask(Shape shape, std::vector<std::uint8_t> bits)
    : shape_(shape), bits_(std::move(bits))
{
    if (bits_.size() != shape_.size())
        throw Error(ErrorCode::DimsMismatch, "mask length does not match dims");
    for (auto& b : bits_) {
        b = b ? 1 : 0;
        count_ += b;
    }
    if (count_ == 0) throw Error(ErrorCode::EmptyMask, "mask has no foreground voxel");
}

Mask Mask::full(const Shape& shape)
{
    return Mask(shape, std::vector<std::uint8_t>(shape.size(), 1));
}

Shape BoundingBox::shape(int ndim) const
{
    std::array<int, 3> d{};
    for (int a = 0; a < ndim; ++a) d[a] = hi[a] - lo[a];
    return Shape(std::span<const int>(d.data(), ndim));
}

BoundingBox bounding_box(const Mask& mask)
{
    const Shape& s = mask.shape();
    BoundingBox box{{s[0], s[1], s[2]}, {0, 0, 0}};
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!mask[i]) continue;
        Index3 c = s.coord(i);
        for (int a = 0; a < 3; ++a) {
            box.lo[a] = std::min(box.lo[a], c[a]);
            box.hi[a] = std::max(box.hi[a], c[a] + 1);
        }
    }
    return box;
}

Index3 round_to_voxel(const Point& p) noexcept
{
    return {static_cast<int>(std::lround(p[0])), static_cast<int>(std::lround(p[1])),
            static_cast<int>(std::lround(p[2]))};
}

void check_seeds(const Mask& mask, const SeedSet& seeds)
{
    std::vector<std::size_t> seen;
    seen.reserve(seeds.size());
    for (const Point& p : seeds.points) {
        Index3 v = round_to_voxel(p);
        if (!mask.shape().contains(v) || !mask.at(v))
            throw Error(ErrorCode::OutOfBounds, "seed lies outside the mask");
        seen.push_back(mask.shape().index(v));
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw Error(ErrorCode::InvalidArgument, "two seeds share a voxel");
}

Labeling::Labeling(Shape shape, std::vector<std::int32_t> labels)
    : shape_(shape), labels_(std::move(labels))
{
    if (labels_.size() != shape_.size())
        throw Error(ErrorCode::DimsMismatch, "label length does not match dims");
    std::int32_t max_label = -1;
    for (std::int32_t l : labels_) {
        if (l < kBackground) throw Error(ErrorCode::InvalidArgument, "labels must be >= -1");
        max_label = std::max(max_label, l);
    }
    num_regions_ = max_label + 1;
    std::vector<std::uint8_t> present(num_regions_, 0);
    for (std::int32_t l : labels_)
        if (l >= 0) present[l] = 1;
    if (std::find(present.begin(), present.end(), 0) != present.end())
        throw Error(ErrorCode::InvalidArgument, "label ids must be contiguous from 0");
}

std::vector<std::size_t> Labeling::region_sizes() const
{
    std::vector<std::size_t> sizes(num_regions_, 0);
    for (std::int32_t l : labels_)
        if (l >= 0) ++sizes[l];
    return sizes;
}

void Labeling::check_against(const Mask& mask) const
{
    if (!(mask.shape() == shape_)) throw Error(ErrorCode::DimsMismatch, "labeling and mask dims differ");
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if ((labels_[i] >= 0) != mask[i])
            throw Error(ErrorCode::InvalidArgument, "labeling foreground differs from mask");
}

Labeling compact_labels(const Shape& shape, std::vector<std::int32_t> labels)
{
    std::int32_t max_label = -1;
    for (std::int32_t l : labels) max_label = std::max(max_label, l);
    std::vector<std::int32_t> remap(max_label + 1, -1);
    for (std::int32_t l : labels)
        if (l >= 0) remap[l] = 0;
    std::int32_t next = 0;
    for (auto& r : remap)
        if (r == 0) r = next++;
    for (auto& l : labels)
        if (l >= 0) l = remap[l];
    return Labeling(shape, std::move(labels));
}

Mask foreground_of(const Labeling& labeling)
{
    std::vector<std::uint8_t> bits(labeling.shape().size());
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = labeling[i] >= 0;
    return Mask(labeling.shape(), std::move(bits));
}

std::string_view to_string(Backend backend)
{
    switch (backend) {
    case Backend::MaskSlic: return "maskslic";
    case Backend::NaiveWholeImage: return "naive1";
    case Backend::NaiveGridFiltered: return "naive2";
    }
    return "maskslic";
}

Backend backend_from_string(std::string_view name)
{
    if (name == "maskslic") return Backend::MaskSlic;
    if (name == "naive1") return Backend::NaiveWholeImage;
    if (name == "naive2") return Backend::NaiveGridFiltered;
    throw Error(ErrorCode::InvalidArgument, "unknown backend '" + std::string(name) + "'");
}

void SlicParams::validate() const
{
    if (n_regions < 1) throw Error(ErrorCode::InvalidArgument, "n_regions must be >= 1");
    if (!(compactness > 0.0) || !std::isfinite(compactness))
        throw Error(ErrorCode::InvalidArgument, "compactness must be > 0");
    if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
    if (!(residual_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "residual_tol must be >= 0");
}

void validate_pair(const FeatureVolume& volume, const Mask& mask)
{
    if (!(volume.shape() == mask.shape()))
        throw Error(ErrorCode::DimsMismatch,
                    "volume dims " + volume.shape().to_string() + " differ from mask dims " +
                        mask.shape().to_string());
    if (mask.count() == 0) throw Error(ErrorCode::EmptyMask, "mask has no foreground voxel");
}

namespace {

template <typename T, typename IsForeground>
std::vector<T> shift_grid(const Shape& s, const std::vector<T>& in, const Offset& offset, T fill,
                          IsForeground fg)
{
    std::vector<T> out(in.size(), fill);
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (!fg(in[i])) continue;
        Index3 c = s.coord(i);
        for (int a = 0; a < 3; ++a) c[a] += offset[a];
        if (!s.contains(c)) throw Error(ErrorCode::OutOfBounds, "translation moves foreground off the grid");
        out[s.index(c)] = in[i];
    }
    return out;
}

void check_offset(const Shape& s, const Offset& offset)
{
    for (int a = s.ndim(); a < 3; ++a)
        if (offset[a] != 0) throw Error(ErrorCode::InvalidArgument, "offset has more axes than the grid");
}

}  // namespace

Mask translate_mask(const Mask& mask, const Offset& offset)
{
    check_offset(mask.shape(), offset);
    return Mask(mask.shape(), shift_grid<std::uint8_t>(mask.shape(), mask.bits(), offset, 0,
                                                       [](std::uint8_t b) { return b != 0; }));
}

Labeling translate_labeling(const Labeling& labeling, const Offset& offset)
{
    check_offset(labeling.shape(), offset);
    return Labeling(labeling.shape(),
                    shift_grid<std::int32_t>(labeling.shape(), labeling.labels(), offset, Labeling::kBackground,
                                             [](std::int32_t l) { return l >= 0; }));
}

}  // namespace maskslic
