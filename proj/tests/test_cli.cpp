#include "doctest.h"

#include "cli.hpp"
#include "maskslic/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace maskslic;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "maskslic");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path dir()
{
    static const fs::path d = [] {
        const fs::path p = fs::temp_directory_path() / "maskslic_test_cli";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return d;
}

std::string at(const std::string& name) { return (dir() / name).string(); }

std::vector<char> bytes_of(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool single_line(const std::string& s) { return !s.empty() && s.find('\n') == s.size() - 1; }

}  // namespace

TEST_CASE("phantom then segment with N=1 gives one label")
{
    Run r = run({"phantom", "--spec", "a", "--seed", "3", "--out-dir", at("a")});
    REQUIRE(r.code == 0);
    r = run({"segment", "--volume", at("a/volume.mslc"), "--mask", at("a/mask.mslc"), "--out", at("one.mslc"),
             "--backend", "maskslic", "--n-regions", "1"});
    REQUIRE(r.code == 0);
    const Labeling l = io::read_labeling(at("one.mslc"));
    CHECK(l.num_regions() == 1);
    CHECK(nlohmann::json::parse(r.out)["n_regions"] == 1);
}

TEST_CASE("segment output is byte identical across runs and thread counts")
{
    REQUIRE(run({"phantom", "--spec", "b", "--seed", "1", "--out-dir", at("b")}).code == 0);
    const std::vector<std::string> common{"segment", "--volume", at("b/volume.mslc"), "--mask", at("b/mask.mslc"),
                                          "--n-regions", "30", "--compactness", "0.5", "--relative-compactness",
                                          "--standardize"};
    auto with = [&](std::vector<std::string> extra) {
        auto a = common;
        a.insert(a.end(), extra.begin(), extra.end());
        return run(a);
    };
    REQUIRE(with({"--out", at("s1.mslc")}).code == 0);
    REQUIRE(with({"--out", at("s2.mslc")}).code == 0);
    auto threaded = common;
    threaded.insert(threaded.begin(), {"--threads", "4"});
    threaded.insert(threaded.end(), {"--out", at("s3.mslc")});
    REQUIRE(run(threaded).code == 0);
    CHECK(bytes_of(at("s1.mslc")) == bytes_of(at("s2.mslc")));
    CHECK(bytes_of(at("s1.mslc")) == bytes_of(at("s3.mslc")));
}

TEST_CASE("naive2 on a mask without grid seeds fails with NoSeedsInMask")
{
    const Shape shape{16, 16};
    std::vector<std::uint8_t> bits(shape.size(), 0);
    for (int i = 6; i < 10; ++i)
        for (int j = 6; j < 10; ++j) bits[shape.index({i, j, 0})] = 1;
    io::write_volume(Mask(shape, bits), at("gap_mask.mslc"));
    io::write_volume(FeatureVolume(shape, 1, std::vector<double>(shape.size(), 1.0)), at("flat.mslc"));
    const Run r = run({"segment", "--backend", "naive2", "--n-regions", "4", "--volume", at("flat.mslc"), "--mask",
                       at("gap_mask.mslc"), "--out", at("never.mslc")});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error[NoSeedsInMask]: ", 0) == 0);
    CHECK(single_line(r.err));
    CHECK_FALSE(fs::exists(at("never.mslc")));
}

TEST_CASE("metrics cs against itself is zero")
{
    REQUIRE(run({"phantom", "--spec", "a", "--seed", "2", "--out-dir", at("a2")}).code == 0);
    REQUIRE(run({"segment", "--volume", at("a2/volume.mslc"), "--mask", at("a2/mask.mslc"), "--out", at("l.mslc"),
                 "--n-regions", "20"})
                .code == 0);
    const Run r = run({"metrics", "cs", "--a", at("l.mslc"), "--b", at("l.mslc"), "--offset", "0,0"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["c_s"] == 0.0);
    CHECK(r.out.find("\"c_s\":0.0") != std::string::npos);
    CHECK(j["delta_s"].size() == 20);
}

TEST_CASE("metrics cs on a translated pair")
{
    REQUIRE(run({"phantom", "--spec", "a", "--seed", "2", "--offset", "0,7", "--out-dir", at("a2t")}).code == 0);
    REQUIRE(run({"segment", "--volume", at("a2t/volume.mslc"), "--mask", at("a2t/mask.mslc"), "--out",
                 at("lt.mslc"), "--n-regions", "20"})
                .code == 0);
    const Run r = run({"metrics", "cs", "--a", at("l.mslc"), "--b", at("lt.mslc"), "--offset", "0,7", "--out",
                       at("cs.json")});
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["c_s"] == 0.0);
    CHECK(fs::exists(at("cs.json")));
}

TEST_CASE("metrics lc")
{
    REQUIRE(run({"phantom", "--spec", "b", "--seed", "4", "--out-dir", at("b4")}).code == 0);
    REQUIRE(run({"segment", "--volume", at("b4/volume.mslc"), "--mask", at("b4/mask.mslc"), "--out",
                 at("b4m.mslc"), "--n-regions", "40"})
                .code == 0);
    REQUIRE(run({"segment", "--backend", "naive1", "--volume", at("b4/volume.mslc"), "--mask", at("b4/mask.mslc"),
                 "--out", at("b4n.mslc"), "--n-regions", "1000"})
                .code == 0);
    for (const std::string agg : {"voxel-mean", "region-mean", "region-median"}) {
        const Run r = run({"metrics", "lc", "--labels", at("b4m.mslc"), "--truth", at("b4/truth.mslc"), "--mask",
                           at("b4/mask.mslc"), "--lc-agg", agg, "--baseline", at("b4n.mslc")});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(j.contains("lc_summary"));
        CHECK(j.contains("e"));
        CHECK(j.contains("per_region"));
        CHECK(j.contains("error_increase_pct"));
        CHECK(j["e"].get<double>() == doctest::Approx(1.0 - j["lc_summary"].get<double>()).epsilon(1e-8));
    }
}

TEST_CASE("cluster-cohort in both modes")
{
    REQUIRE(run({"phantom", "--spec", "c", "--seed", "1", "--size", "16", "--out-dir", at("c1")}).code == 0);
    REQUIRE(run({"phantom", "--spec", "c", "--seed", "2", "--size", "16", "--out-dir", at("c2")}).code == 0);
    fs::copy_file(at("c1/series.mslc"), at("c1/case1.mslc"));
    fs::copy_file(at("c2/series.mslc"), at("c2/case2.mslc"));
    for (const std::string mode : {"supervoxel", "voxel"}) {
        const Run r = run({"cluster-cohort", "--series", at("c1/case1.mslc") + "," + at("c2/case2.mslc"), "--mask",
                           at("c1/mask.mslc") + "," + at("c2/mask.mslc"), "--features",
                           at("c1/volume.mslc") + "," + at("c2/volume.mslc"), "--k", "3", "--mode", mode,
                           "--out-dir", at("co_" + mode)});
        REQUIRE(r.code == 0);
        CHECK(nlohmann::json::parse(r.out)["k"] == 3);
        const LabelGrid g = io::read_label_grid(at("co_" + mode + "/case1_subregions.mslc"));
        CHECK(g.shape == Shape{16, 16, 16});
    }
    CHECK(fs::exists(at("co_supervoxel/descriptors.csv")));
    CHECK(fs::exists(at("co_supervoxel/case2_supervoxels.mslc")));
}

TEST_CASE("bench reports medians")
{
    const Run r = run({"bench", "--volume", at("b4/volume.mslc"), "--mask", at("b4/mask.mslc"), "--n-regions",
                       "200", "--repeats", "3", "--matched"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j["timings"].size() == 2);
    CHECK(j["timings"][0]["backend"] == "maskslic");
    CHECK(j["timings"][1]["backend"] == "naive1");
    CHECK(j["timings"][0]["runs_s"].size() == 3);
    CHECK(j.contains("masked_not_slower"));
}

TEST_CASE("usage and data errors map to exit codes 2 and 1")
{
    Run r = run({});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error[Usage]: ", 0) == 0);
    CHECK(single_line(r.err));

    r = run({"segment", "--volume", "x"});
    CHECK(r.code == 2);
    r = run({"segment", "--backend", "slic", "--volume", "a", "--mask", "b", "--out", "c"});
    CHECK(r.code == 2);
    r = run({"metrics", "cs", "--a", at("l.mslc"), "--b", at("l.mslc"), "--offset", "1"});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error[Usage]: ", 0) == 0);

    r = run({"segment", "--volume", at("missing.mslc"), "--mask", at("missing.mslc"), "--out", at("o.mslc")});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error[IoError]: ", 0) == 0);

    {
        std::ofstream bad(at("bad.mslc"), std::ios::binary);
        bad << "XXXXjunk";
    }
    r = run({"metrics", "cs", "--a", at("bad.mslc"), "--b", at("bad.mslc")});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error[BadMagic]: ", 0) == 0);
    CHECK(single_line(r.err));

    r = run({"phantom", "--spec", "q", "--out-dir", at("q")});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error[BadSpec]: ", 0) == 0);

    r = run({"segment", "--volume", at("a/volume.mslc"), "--mask", at("a/mask.mslc"), "--out", at("z.mslc"),
             "--n-regions", "0"});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error[InvalidArgument]: ", 0) == 0);

    r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("segment") != std::string::npos);
}
