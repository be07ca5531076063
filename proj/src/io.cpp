#include "maskslic/io.hpp"

#include <png.h>

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace maskslic::io {

namespace {

class Writer {
public:
    void bytes(const void* p, std::size_t n)
    {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    void need(std::size_t n) const
    {
        if (pos_ + n > in_.size()) throw Error(ErrorCode::TruncatedPayload, "file ends before the data it declares");
    }
    std::uint8_t u8()
    {
        need(1);
        return in_[pos_++];
    }
    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    float f32() { return std::bit_cast<float>(u32()); }
    std::size_t remaining() const { return in_.size() - pos_; }
    std::span<const std::uint8_t> take(std::size_t n)
    {
        need(n);
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::array<float, 3> file_spacing(const Shape& shape, const Spacing& spacing)
{
    std::array<float, 3> out{1.0f, 1.0f, 1.0f};
    for (int a = 0; a < shape.ndim(); ++a) out[a] = static_cast<float>(spacing[a]);
    return out;
}

Spacing volume_spacing(const VolumeFile& file)
{
    Spacing out = kUnitSpacing;
    for (int a = 0; a < file.shape.ndim(); ++a) out[a] = file.spacing[a];
    return out;
}

std::string lower_extension(const std::filesystem::path& path)
{
    std::string ext = path.extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

}  // namespace

std::size_t sample_size(SampleType type)
{
    switch (type) {
    case SampleType::U8: return 1;
    case SampleType::I32: return 4;
    case SampleType::F32: return 4;
    }
    throw Error(ErrorCode::BadSpec, "unknown dtype");
}

std::vector<std::uint8_t> encode(const VolumeFile& file)
{
    const int nd = file.shape.ndim();
    if (nd != 2 && nd != 3) throw Error(ErrorCode::InvalidArgument, "MSLC volumes are 2D or 3D");
    const std::size_t expected = file.shape.size() * file.channels * file.frames;
    if (file.samples.size() != expected)
        throw Error(ErrorCode::DimsMismatch, "sample count does not match dims x channels x frames");

    Writer w;
    w.bytes("MSLC", 4);
    w.u32(kFormatVersion);
    w.u8(static_cast<std::uint8_t>(nd));
    for (int a = 0; a < nd; ++a) w.u32(static_cast<std::uint32_t>(file.shape[a]));
    w.u32(file.channels);
    w.u32(file.frames);
    for (int a = 0; a < nd; ++a) w.f32(file.spacing[a]);
    w.u8(static_cast<std::uint8_t>(file.dtype));
    for (double v : file.samples) {
        switch (file.dtype) {
        case SampleType::U8: w.u8(static_cast<std::uint8_t>(v)); break;
        case SampleType::I32: w.i32(static_cast<std::int32_t>(v)); break;
        case SampleType::F32: w.f32(static_cast<float>(v)); break;
        }
    }
    return w.take();
}

VolumeFile decode(std::span<const std::uint8_t> bytes)
{
    Reader r(bytes);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "MSLC", 4) != 0)
        throw Error(ErrorCode::BadMagic, "not an MSLC volume (bad magic)");
    r.take(4);
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion)
        throw Error(ErrorCode::VersionUnsupported, "unsupported MSLC version " + std::to_string(version));
    const int nd = r.u8();
    if (nd != 2 && nd != 3) throw Error(ErrorCode::BadSpec, "MSLC ndim must be 2 or 3");
    std::array<int, 3> dims{};
    for (int a = 0; a < nd; ++a) {
        const std::uint32_t d = r.u32();
        if (d == 0 || d > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
            throw Error(ErrorCode::BadSpec, "invalid extent in MSLC header");
        dims[a] = static_cast<int>(d);
    }
    VolumeFile file;
    file.shape = Shape(std::span<const int>(dims.data(), nd));
    file.channels = r.u32();
    file.frames = r.u32();
    if (file.channels == 0 || file.frames == 0) throw Error(ErrorCode::BadSpec, "channels and frames must be >= 1");
    for (int a = 0; a < nd; ++a) file.spacing[a] = r.f32();
    const std::uint8_t dtype = r.u8();
    if (dtype > 2) throw Error(ErrorCode::BadSpec, "unknown MSLC dtype " + std::to_string(dtype));
    file.dtype = static_cast<SampleType>(dtype);

    const std::size_t count = file.shape.size() * file.channels * file.frames;
    const std::size_t payload = count * sample_size(file.dtype);
    if (r.remaining() < payload) throw Error(ErrorCode::TruncatedPayload, "payload shorter than the header declares");
    if (r.remaining() > payload) throw Error(ErrorCode::BadSpec, "trailing bytes after the payload");
    file.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        switch (file.dtype) {
        case SampleType::U8: file.samples[i] = r.u8(); break;
        case SampleType::I32: file.samples[i] = r.i32(); break;
        case SampleType::F32: file.samples[i] = r.f32(); break;
        }
    }
    return file;
}

void write_file(const VolumeFile& file, const std::filesystem::path& path)
{
    const auto bytes = encode(file);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

VolumeFile read_file(const std::filesystem::path& path)
{
    const auto bytes = slurp(path);
    return decode(bytes);
}

VolumeFile to_file(const FeatureVolume& volume)
{
    VolumeFile f;
    f.shape = volume.shape();
    f.channels = static_cast<std::uint32_t>(volume.channels());
    f.spacing = file_spacing(volume.shape(), volume.spacing());
    f.dtype = SampleType::F32;
    f.samples = volume.data();
    return f;
}

VolumeFile to_file(const TemporalSeries& series)
{
    VolumeFile f;
    f.shape = series.shape();
    f.frames = static_cast<std::uint32_t>(series.frames());
    f.spacing = file_spacing(series.shape(), series.spacing());
    f.dtype = SampleType::F32;
    const std::size_t v = series.shape().size();
    f.samples.resize(v * series.frames());
    for (std::size_t i = 0; i < v; ++i) {
        auto c = series.curve(i);
        for (int t = 0; t < series.frames(); ++t) f.samples[t * v + i] = c[t];
    }
    return f;
}

VolumeFile to_file(const Mask& mask)
{
    VolumeFile f;
    f.shape = mask.shape();
    f.dtype = SampleType::U8;
    f.samples.assign(mask.bits().begin(), mask.bits().end());
    return f;
}

VolumeFile to_file(const Labeling& labeling)
{
    return to_file(LabelGrid{labeling.shape(), labeling.labels()});
}

VolumeFile to_file(const LabelGrid& grid)
{
    VolumeFile f;
    f.shape = grid.shape;
    f.dtype = SampleType::I32;
    f.samples.assign(grid.labels.begin(), grid.labels.end());
    return f;
}

FeatureVolume feature_volume_from(const VolumeFile& file)
{
    if (file.frames != 1) throw Error(ErrorCode::BadSpec, "expected a single-frame volume");
    return FeatureVolume(file.shape, static_cast<int>(file.channels), file.samples, volume_spacing(file));
}

TemporalSeries temporal_series_from(const VolumeFile& file)
{
    if (file.channels != 1) throw Error(ErrorCode::BadSpec, "temporal series must have one channel");
    const std::size_t v = file.shape.size();
    const std::size_t frames = file.frames;
    std::vector<double> values(v * frames);
    for (std::size_t t = 0; t < frames; ++t)
        for (std::size_t i = 0; i < v; ++i) values[i * frames + t] = file.samples[t * v + i];
    return TemporalSeries(file.shape, static_cast<int>(frames), std::move(values), volume_spacing(file));
}

Mask mask_from(const VolumeFile& file)
{
    if (file.channels != 1 || file.frames != 1) throw Error(ErrorCode::BadSpec, "mask must be single-channel");
    std::vector<std::uint8_t> bits(file.samples.size());
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = file.samples[i] != 0.0;
    return Mask(file.shape, std::move(bits));
}

LabelGrid label_grid_from(const VolumeFile& file)
{
    if (file.channels != 1 || file.frames != 1) throw Error(ErrorCode::BadSpec, "label volume must be single-channel");
    if (file.dtype == SampleType::F32) throw Error(ErrorCode::BadSpec, "label volume must have an integer dtype");
    LabelGrid grid{file.shape, std::vector<std::int32_t>(file.samples.size())};
    for (std::size_t i = 0; i < grid.labels.size(); ++i) grid.labels[i] = static_cast<std::int32_t>(file.samples[i]);
    return grid;
}

Labeling labeling_from(const VolumeFile& file)
{
    LabelGrid grid = label_grid_from(file);
    return Labeling(grid.shape, std::move(grid.labels));
}

void write_volume(const FeatureVolume& volume, const std::filesystem::path& path) { write_file(to_file(volume), path); }
void write_volume(const TemporalSeries& series, const std::filesystem::path& path) { write_file(to_file(series), path); }
void write_volume(const Mask& mask, const std::filesystem::path& path) { write_file(to_file(mask), path); }
void write_volume(const Labeling& labeling, const std::filesystem::path& path) { write_file(to_file(labeling), path); }
void write_volume(const LabelGrid& grid, const std::filesystem::path& path) { write_file(to_file(grid), path); }

FeatureVolume read_feature_volume(const std::filesystem::path& path)
{
    const std::string ext = lower_extension(path);
    if (ext == ".pgm") return read_pgm(path);
    if (ext == ".png") return read_png(path);
    return feature_volume_from(read_file(path));
}

Mask read_mask(const std::filesystem::path& path)
{
    const std::string ext = lower_extension(path);
    if (ext == ".pgm" || ext == ".png") {
        const FeatureVolume img = ext == ".pgm" ? read_pgm(path) : read_png(path);
        std::vector<std::uint8_t> bits(img.voxels());
        for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = img.at(i)[0] != 0.0;
        return Mask(img.shape(), std::move(bits));
    }
    return mask_from(read_file(path));
}

Labeling read_labeling(const std::filesystem::path& path) { return labeling_from(read_file(path)); }
LabelGrid read_label_grid(const std::filesystem::path& path) { return label_grid_from(read_file(path)); }
TemporalSeries read_temporal_series(const std::filesystem::path& path) { return temporal_series_from(read_file(path)); }

FeatureVolume read_pgm(const std::filesystem::path& path)
{
    const auto bytes = slurp(path);
    std::size_t pos = 0;
    auto skip_space = [&] {
        for (;;) {
            while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
            if (pos < bytes.size() && bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                continue;
            }
            return;
        }
    };
    auto number = [&] {
        skip_space();
        if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw Error(ErrorCode::BadSpec, "malformed PGM header");
        long v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2'))
        throw Error(ErrorCode::BadMagic, "not a P2/P5 PGM file");
    const bool binary = bytes[1] == '5';
    pos = 2;
    const long width = number(), height = number(), maxval = number();
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
        throw Error(ErrorCode::BadSpec, "only 8-bit PGM images are supported");
    const std::size_t n = static_cast<std::size_t>(width) * height;
    std::vector<double> data(n);
    if (binary) {
        ++pos;  // single whitespace before the raster
        if (pos + n > bytes.size()) throw Error(ErrorCode::TruncatedPayload, "PGM raster is truncated");
        for (std::size_t i = 0; i < n; ++i) data[i] = bytes[pos + i];
    } else {
        for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<double>(number());
    }
    return FeatureVolume(Shape{static_cast<int>(height), static_cast<int>(width)}, 1, std::move(data));
}

FeatureVolume read_png(const std::filesystem::path& path)
{
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str()))
        throw Error(ErrorCode::BadMagic, "cannot read PNG " + path.string() + ": " + image.message);
    image.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> raster(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, raster.data(), 0, nullptr)) {
        png_image_free(&image);
        throw Error(ErrorCode::TruncatedPayload, std::string("cannot decode PNG: ") + image.message);
    }
    std::vector<double> data(raster.begin(), raster.end());
    return FeatureVolume(Shape{static_cast<int>(image.height), static_cast<int>(image.width)}, 1, std::move(data));
}

double round_sig9(double v)
{
    if (!std::isfinite(v) || v == 0.0) return v;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::strtod(buf, nullptr);
}

nlohmann::json to_json(const OverlapReport& report)
{
    nlohmann::json j;
    j["c_s"] = round_sig9(report.c_s);
    j["n_regions"] = report.n_regions;
    auto& deltas = j["delta_s"] = nlohmann::json::array();
    for (double d : report.per_region_delta) deltas.push_back(round_sig9(d));
    return j;
}

nlohmann::json to_json(const ConsistencyReport& report)
{
    nlohmann::json j;
    j["lc_summary"] = round_sig9(report.summary_lc);
    j["e"] = round_sig9(report.e);
    auto& per = j["per_region"] = nlohmann::json::array();
    for (double v : report.per_region_lc) per.push_back(round_sig9(v));
    return j;
}

void write_descriptor_table(const std::vector<RegionDescriptor>& rows, std::ostream& out)
{
    const std::size_t channels = rows.empty() ? 0 : rows.front().feature_means.size();
    out << "case_id,region_id,voxel_count";
    for (std::size_t j = 0; j < channels; ++j) out << ",f" << j;
    out << '\n';
    char buf[64];
    for (const auto& r : rows) {
        out << r.case_id << ',' << r.region_id << ',' << r.voxel_count;
        for (double v : r.feature_means) {
            std::snprintf(buf, sizeof buf, "%.9g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

std::vector<RegionDescriptor> read_descriptor_table(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("case_id,region_id,voxel_count", 0) != 0)
        throw Error(ErrorCode::BadSpec, "descriptor table lacks the expected header");
    std::vector<RegionDescriptor> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        RegionDescriptor r;
        std::getline(ss, r.case_id, ',');
        if (!std::getline(ss, field, ',')) throw Error(ErrorCode::BadSpec, "short descriptor row");
        r.region_id = std::stoi(field);
        if (!std::getline(ss, field, ',')) throw Error(ErrorCode::BadSpec, "short descriptor row");
        r.voxel_count = std::stoul(field);
        while (std::getline(ss, field, ',')) r.feature_means.push_back(std::stod(field));
        rows.push_back(std::move(r));
    }
    return rows;
}

FeatureVolume standardize_channels(const FeatureVolume& volume, const Mask& mask)
{
    validate_pair(volume, mask);
    const int c = volume.channels();
    std::vector<double> data = volume.data();
    const double n = static_cast<double>(mask.count());
    for (int j = 0; j < c; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < volume.voxels(); ++i)
            if (mask[i]) mean += data[i * c + j];
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < volume.voxels(); ++i)
            if (mask[i]) var += (data[i * c + j] - mean) * (data[i * c + j] - mean);
        const double sd = std::sqrt(var / n);
        for (std::size_t i = 0; i < volume.voxels(); ++i)
            if (mask[i]) data[i * c + j] = sd > 0.0 ? (data[i * c + j] - mean) / sd : data[i * c + j] - mean;
    }
    return FeatureVolume(volume.shape(), c, std::move(data), volume.spacing());
}

}  // namespace maskslic::io
