#include "doctest.h"
#include "oracles.hpp"

#include "maskslic/io.hpp"
#include "maskslic/metrics.hpp"
#include "maskslic/phantom.hpp"
#include "maskslic/slic.hpp"

#include <png.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace maskslic;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "maskslic_test_io";
    fs::create_directories(dir);
    return dir / name;
}

ErrorCode decode_error(const std::vector<std::uint8_t>& bytes)
{
    try {
        io::decode(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

std::vector<std::uint8_t> file_bytes(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("header layout is bit exact")
{
    io::VolumeFile f;
    f.shape = Shape{2, 3};
    f.channels = 1;
    f.spacing = {0.5f, 2.0f, 1.0f};
    f.dtype = io::SampleType::I32;
    f.samples = {-1, 0, 1, 2, 3, 258};
    const auto bytes = io::encode(f);
    const std::vector<std::uint8_t> header{'M', 'S', 'L', 'C', 1, 0, 0, 0, 2, 2, 0, 0, 0, 3, 0, 0, 0,
                                           1,   0,   0,   0,   1, 0, 0, 0, 0, 0, 0, 0x3f, 0, 0, 0, 0x40, 1};
    REQUIRE(bytes.size() == header.size() + 24);
    CHECK(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + header.size()) == header);
    // -1 then 258 little-endian
    CHECK(bytes[header.size() + 0] == 0xff);
    CHECK(bytes[header.size() + 3] == 0xff);
    CHECK(bytes[header.size() + 20] == 0x02);
    CHECK(bytes[header.size() + 21] == 0x01);
}

TEST_CASE("volumes, masks and labelings round-trip")
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    const Shape shape{4, 5, 3};
    std::vector<double> data(shape.size() * 2);
    for (double& v : data) v = static_cast<float>(g(rng));
    const FeatureVolume v(shape, 2, data, {0.5, 1.25, 3.0});
    io::write_volume(v, scratch("v.mslc"));
    const FeatureVolume back = io::read_feature_volume(scratch("v.mslc"));
    CHECK(back.data() == v.data());
    CHECK(back.spacing() == v.spacing());
    CHECK(back.channels() == 2);
    io::write_volume(back, scratch("v2.mslc"));
    CHECK(file_bytes(scratch("v.mslc")) == file_bytes(scratch("v2.mslc")));

    const Mask m = oracle::random_mask(shape, 0.5, rng);
    io::write_volume(m, scratch("m.mslc"));
    CHECK(io::read_mask(scratch("m.mslc")) == m);

    const Labeling l = oracle::random_labeling(m, 7, rng);
    io::write_volume(l, scratch("l.mslc"));
    CHECK(io::read_labeling(scratch("l.mslc")) == l);

    const LabelGrid grid{shape, std::vector<std::int32_t>(shape.size(), -5)};
    io::write_volume(grid, scratch("g.mslc"));
    CHECK(io::read_label_grid(scratch("g.mslc")) == grid);
}

TEST_CASE("temporal series round-trip with frames outermost on disk")
{
    const Shape shape{2, 2};
    std::vector<double> values;
    for (int i = 0; i < 4; ++i)
        for (int t = 0; t < 3; ++t) values.push_back(10 * i + t);
    const TemporalSeries s(shape, 3, values);
    const io::VolumeFile f = io::to_file(s);
    CHECK(f.frames == 3);
    CHECK(f.samples[0] == 0);
    CHECK(f.samples[1] == 10);
    CHECK(f.samples[4] == 1);
    io::write_volume(s, scratch("s.mslc"));
    const TemporalSeries back = io::read_temporal_series(scratch("s.mslc"));
    CHECK(back.values() == s.values());
    CHECK(back.frames() == 3);
}

TEST_CASE("decode error paths")
{
    io::VolumeFile f;
    f.shape = Shape{2, 2};
    f.dtype = io::SampleType::U8;
    f.samples = {1, 0, 1, 1};
    const auto good = io::encode(f);
    CHECK_NOTHROW(io::decode(good));

    auto bad_magic = good;
    std::memcpy(bad_magic.data(), "XXXX", 4);
    CHECK(decode_error(bad_magic) == ErrorCode::BadMagic);

    auto bad_version = good;
    bad_version[4] = 2;
    CHECK(decode_error(bad_version) == ErrorCode::VersionUnsupported);

    auto short_payload = good;
    short_payload.pop_back();
    CHECK(decode_error(short_payload) == ErrorCode::TruncatedPayload);
    CHECK(decode_error(std::vector<std::uint8_t>(good.begin(), good.begin() + 10)) == ErrorCode::TruncatedPayload);

    auto trailing = good;
    trailing.push_back(0);
    CHECK(decode_error(trailing) == ErrorCode::BadSpec);

    auto bad_dtype = good;
    bad_dtype[good.size() - 5] = 7;
    CHECK(decode_error(bad_dtype) == ErrorCode::BadSpec);

    auto bad_ndim = good;
    bad_ndim[8] = 4;
    CHECK(decode_error(bad_ndim) == ErrorCode::BadSpec);

    CHECK_THROWS_AS(io::read_file(scratch("does_not_exist.mslc")), Error);
}

TEST_CASE("PGM and PNG inputs")
{
    {
        std::ofstream p5(scratch("img.pgm"), std::ios::binary);
        p5 << "P5\n# comment\n3 2\n255\n";
        const unsigned char raster[6] = {0, 10, 20, 30, 40, 255};
        p5.write(reinterpret_cast<const char*>(raster), 6);
    }
    const FeatureVolume a = io::read_feature_volume(scratch("img.pgm"));
    CHECK(a.shape() == Shape{2, 3});
    CHECK(a.data() == std::vector<double>{0, 10, 20, 30, 40, 255});

    {
        std::ofstream p2(scratch("ascii.pgm"));
        p2 << "P2 2 2 255\n0 1\n2 3\n";
    }
    CHECK(io::read_feature_volume(scratch("ascii.pgm")).data() == std::vector<double>{0, 1, 2, 3});
    CHECK(io::read_mask(scratch("ascii.pgm")).count() == 3);

    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = 4;
    image.height = 2;
    image.format = PNG_FORMAT_GRAY;
    const std::uint8_t raster[8] = {1, 2, 3, 4, 50, 60, 70, 80};
    REQUIRE(png_image_write_to_file(&image, scratch("img.png").string().c_str(), 0, raster, 0, nullptr));
    const FeatureVolume b = io::read_feature_volume(scratch("img.png"));
    CHECK(b.shape() == Shape{2, 4});
    CHECK(b.data() == std::vector<double>{1, 2, 3, 4, 50, 60, 70, 80});
}

TEST_CASE("JSON reports use fixed keys and nine significant digits")
{
    CHECK(io::round_sig9(1.0 / 3.0) == 0.333333333);
    CHECK(io::round_sig9(123456789012.0) == 123456789000.0);
    CHECK(io::round_sig9(0.0) == 0.0);

    OverlapReport o;
    o.c_s = 1.0 / 3.0;
    o.n_regions = 2;
    o.per_region_delta = {2.0 / 3.0, 2.0 / 3.0};
    const auto j = io::to_json(o);
    CHECK(j.dump() == R"({"c_s":0.333333333,"delta_s":[0.666666667,0.666666667],"n_regions":2})");

    ConsistencyReport c;
    c.summary_lc = 0.75;
    c.e = 0.25;
    c.per_region_lc = {1.0, 0.5};
    CHECK(io::to_json(c).dump() == R"({"e":0.25,"lc_summary":0.75,"per_region":[1.0,0.5]})");
}

TEST_CASE("descriptor table round-trip")
{
    std::vector<RegionDescriptor> rows{{"a", 0, {1.5, -2.0}, 10}, {"b", 3, {0.125, 7.0}, 2}};
    std::stringstream ss;
    io::write_descriptor_table(rows, ss);
    CHECK(ss.str().rfind("case_id,region_id,voxel_count,f0,f1\n", 0) == 0);
    const auto back = io::read_descriptor_table(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[1].case_id == "b");
    CHECK(back[1].region_id == 3);
    CHECK(back[1].voxel_count == 2);
    CHECK(back[0].feature_means == rows[0].feature_means);
}

TEST_CASE("channel standardization over the mask")
{
    const Shape shape{1, 4};
    const FeatureVolume v(shape, 1, {1, 3, 100, 5});
    const Mask m(shape, {1, 1, 0, 0});
    const FeatureVolume z = io::standardize_channels(v, m);
    CHECK(z.data() == std::vector<double>{-1, 1, 100, 5});
}

TEST_CASE("phantoms are deterministic and well formed")
{
    for (auto kind : {PhantomKind::BlobImage, PhantomKind::TumourVolume, PhantomKind::PerfusionSeries}) {
        PhantomSpec spec;
        spec.kind = kind;
        const Phantom a = make_phantom(spec, 12);
        const Phantom b = make_phantom(spec, 12);
        const Phantom c = make_phantom(spec, 13);
        CHECK(a.volume.data() == b.volume.data());
        CHECK(a.mask == b.mask);
        CHECK(a.truth == b.truth);
        CHECK(a.volume.data() != c.volume.data());
        CHECK(a.truth.shape == a.mask.shape());
        CHECK(a.series.has_value() == (kind == PhantomKind::PerfusionSeries));
    }
    CHECK(phantom_kind_from_string("b") == PhantomKind::TumourVolume);
    CHECK_THROWS_AS(phantom_kind_from_string("d"), Error);
    PhantomSpec bad;
    bad.size = 3;
    CHECK_THROWS_AS(make_phantom(bad, 1), Error);
}

TEST_CASE("phantom b carries four labels on at most a fifth of the volume")
{
    PhantomSpec spec;
    spec.kind = PhantomKind::TumourVolume;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Phantom p = make_phantom(spec, seed);
        std::set<int> labels;
        for (std::size_t i = 0; i < p.mask.shape().size(); ++i) {
            CHECK((p.truth.labels[i] > 0) == p.mask[i]);
            if (p.mask[i]) labels.insert(p.truth.labels[i]);
        }
        CHECK(labels == std::set<int>{1, 2, 3, 4});
        CHECK(p.mask.count() <= p.mask.shape().size() / 5);
    }
}

TEST_CASE("noiseless phantom b is recovered with pure supervoxels")
{
    // Connectivity enforcement is off: absorbing a stray fragment into a
    // neighbour of another tissue class would cost purity by construction.
    PhantomSpec spec;
    spec.kind = PhantomKind::TumourVolume;
    spec.noise = 0.0;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const Phantom p = make_phantom(spec, seed);
        for (int n : {10, 40}) {
            SlicParams params;
            params.n_regions = n;
            params.compactness = 20.0;
            params.max_iters = 20;
            params.enforce_connectivity = false;
            const Labeling l = mask_slic(p.volume, p.mask, params);
            CHECK(label_consistency(l, p.truth, p.mask).summary_lc == 1.0);
        }
    }
}

TEST_CASE("phantom a translates content and mask together")
{
    PhantomSpec spec;
    const Phantom a = make_phantom(spec, 5);
    spec.offset = {0, 9, 0};
    const Phantom b = make_phantom(spec, 5);
    CHECK(translate_mask(a.mask, spec.offset) == b.mask);
    const Shape& s = a.mask.shape();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!a.mask[i]) continue;
        const Index3 c = s.coord(i);
        CHECK(b.volume.at(s.index({c[0], c[1] + 9, 0}))[0] == a.volume.at(i)[0]);
    }
    spec.offset = {0, 120, 0};
    CHECK_THROWS_AS(make_phantom(spec, 5), Error);
}
