#pragma once

// MSLC raw volume files, PGM/PNG convenience input, descriptor tables and
// JSON reports.
//
// MSLC layout (all integers little-endian):
//   char[4]  magic "MSLC"
//   u32      version (1)
//   u8       ndim (2 or 3)
//   u32      dims[ndim]
//   u32      channels
//   u32      frames (1 unless temporal)
//   f32      spacing[ndim]
//   u8       dtype (0 = u8, 1 = i32, 2 = f32)
//   payload  frame outermost, then spatial C-order, channel innermost

#include "maskslic/cohort.hpp"
#include "maskslic/metrics.hpp"
#include "maskslic/volume.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace maskslic::io {

inline constexpr std::uint32_t kFormatVersion = 1;

enum class SampleType : std::uint8_t { U8 = 0, I32 = 1, F32 = 2 };

std::size_t sample_size(SampleType type);

struct VolumeFile {
    Shape shape;
    std::uint32_t channels = 1;
    std::uint32_t frames = 1;
    std::array<float, 3> spacing{1.0f, 1.0f, 1.0f};
    SampleType dtype = SampleType::F32;
    std::vector<double> samples;  // file order; exact for every dtype
};

std::vector<std::uint8_t> encode(const VolumeFile& file);
VolumeFile decode(std::span<const std::uint8_t> bytes);

void write_file(const VolumeFile& file, const std::filesystem::path& path);
VolumeFile read_file(const std::filesystem::path& path);

VolumeFile to_file(const FeatureVolume& volume);
VolumeFile to_file(const TemporalSeries& series);
VolumeFile to_file(const Mask& mask);
VolumeFile to_file(const Labeling& labeling);
VolumeFile to_file(const LabelGrid& grid);

FeatureVolume feature_volume_from(const VolumeFile& file);
TemporalSeries temporal_series_from(const VolumeFile& file);
Mask mask_from(const VolumeFile& file);
Labeling labeling_from(const VolumeFile& file);
LabelGrid label_grid_from(const VolumeFile& file);

void write_volume(const FeatureVolume& volume, const std::filesystem::path& path);
void write_volume(const TemporalSeries& series, const std::filesystem::path& path);
void write_volume(const Mask& mask, const std::filesystem::path& path);
void write_volume(const Labeling& labeling, const std::filesystem::path& path);
void write_volume(const LabelGrid& grid, const std::filesystem::path& path);

/// MSLC, or a single-channel 2D image when the extension is .pgm or .png.
FeatureVolume read_feature_volume(const std::filesystem::path& path);
Mask read_mask(const std::filesystem::path& path);
Labeling read_labeling(const std::filesystem::path& path);
LabelGrid read_label_grid(const std::filesystem::path& path);
TemporalSeries read_temporal_series(const std::filesystem::path& path);

/// 8-bit grayscale PGM (P2 or P5) and PNG (any colour type, converted to gray).
FeatureVolume read_pgm(const std::filesystem::path& path);
FeatureVolume read_png(const std::filesystem::path& path);

/// Rounds to nine significant digits so JSON output carries no more.
double round_sig9(double v);

nlohmann::json to_json(const OverlapReport& report);
nlohmann::json to_json(const ConsistencyReport& report);

void write_descriptor_table(const std::vector<RegionDescriptor>& rows, std::ostream& out);
std::vector<RegionDescriptor> read_descriptor_table(std::istream& in);

/// Per-channel z-scoring over the mask; off-mask values are passed through.
FeatureVolume standardize_channels(const FeatureVolume& volume, const Mask& mask);

}  // namespace maskslic::io
