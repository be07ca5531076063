#include "cli.hpp"

#include "maskslic/io.hpp"
#include "maskslic/metrics.hpp"
#include "maskslic/parallel.hpp"
#include "maskslic/phantom.hpp"
#include "maskslic/pipeline.hpp"
#include "maskslic/slic.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace maskslic {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Offset parse_offset(const std::string& text)
{
    Offset off{0, 0, 0};
    std::stringstream ss(text);
    std::string part;
    int n = 0;
    while (std::getline(ss, part, ',')) {
        if (n == 3) throw UsageError("--offset takes two or three comma-separated integers");
        std::size_t used = 0;
        try {
            off[n] = std::stoi(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != part.size()) throw UsageError("--offset component '" + part + "' is not an integer");
        ++n;
    }
    if (n < 2) throw UsageError("--offset takes two or three comma-separated integers");
    return off;
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ','))
        if (!part.empty()) parts.push_back(part);
    return parts;
}

void emit(const nlohmann::json& j, const std::string& path, std::ostream& out)
{
    if (!path.empty()) {
        std::ofstream f(path);
        if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
        f << j.dump(2) << '\n';
    }
    out << j.dump() << '\n';
}

nlohmann::json timing_json(const BenchTiming& t)
{
    nlohmann::json j;
    j["backend"] = std::string(to_string(t.backend));
    j["n_regions"] = t.n_regions;
    j["regions_in_mask"] = t.regions_in_mask;
    j["median_s"] = io::round_sig9(t.median_seconds);
    auto& runs = j["runs_s"] = nlohmann::json::array();
    for (double s : t.seconds) runs.push_back(io::round_sig9(s));
    return j;
}

struct SegmentFlags {
    std::string backend = "maskslic";
    int n_regions = 100;
    double compactness = 1.0;
    bool relative = false;
    int max_iters = 10;
    double residual_tol = 0.0;
    bool no_connectivity = false;
    bool standardize = false;

    void add_to(CLI::App* cmd)
    {
        cmd->add_option("--backend", backend, "maskslic | naive1 | naive2")
            ->check(CLI::IsMember({"maskslic", "naive1", "naive2"}));
        cmd->add_option("--n-regions", n_regions, "Requested region count N");
        cmd->add_option("--compactness", compactness, "Compactness r (or the factor on S with --relative-compactness)");
        cmd->add_flag("--relative-compactness", relative, "Use r = compactness * S");
        cmd->add_option("--max-iters", max_iters, "k-means iterations");
        cmd->add_option("--residual-tol", residual_tol, "Stop once the mean centre movement falls below this");
        cmd->add_flag("--no-connectivity", no_connectivity, "Skip connectivity enforcement");
        cmd->add_flag("--standardize", standardize, "Z-score each feature channel over the mask first");
    }

    SlicParams params() const
    {
        SlicParams p;
        p.backend = backend_from_string(backend);
        p.n_regions = n_regions;
        p.compactness = compactness;
        p.max_iters = max_iters;
        p.residual_tol = residual_tol;
        p.enforce_connectivity = !no_connectivity;
        return p;
    }
};

}  // namespace

int cli_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Masked supervoxel segmentation, metrics and cohort clustering"};
    app.name("maskslic");
    app.require_subcommand(1);
    int threads = -1;
    app.add_option("--threads", threads, "Worker threads (0 = MSLIC_THREADS or all cores)");

    // segment
    auto* seg = app.add_subcommand("segment", "Label the voxels inside a mask");
    std::string seg_volume, seg_mask, seg_out;
    SegmentFlags seg_flags;
    seg->add_option("--volume", seg_volume, "Feature volume (.mslc, .pgm, .png)")->required();
    seg->add_option("--mask", seg_mask, "Mask volume")->required();
    seg->add_option("--out", seg_out, "Output label volume (.mslc, i32)")->required();
    seg_flags.add_to(seg);

    // metrics
    auto* metrics = app.add_subcommand("metrics", "Evaluate labelings");
    metrics->require_subcommand(1);
    auto* cs = metrics->add_subcommand("cs", "Translation consistency C_s of two labelings");
    std::string cs_a, cs_b, cs_offset = "0,0", cs_out;
    cs->add_option("--a", cs_a, "Labeling before translation")->required();
    cs->add_option("--b", cs_b, "Labeling after translation")->required();
    cs->add_option("--offset", cs_offset, "Translation dx,dy[,dz] in axis order");
    cs->add_option("--out", cs_out, "Also write the report here");

    auto* lc = metrics->add_subcommand("lc", "Label consistency against a ground-truth grid");
    std::string lc_labels, lc_truth, lc_mask, lc_agg = "voxel-mean", lc_baseline, lc_out;
    lc->add_option("--labels", lc_labels, "Labeling to score")->required();
    lc->add_option("--truth", lc_truth, "Ground-truth label grid")->required();
    lc->add_option("--mask", lc_mask, "Mask (defaults to the labelled voxels)");
    lc->add_option("--lc-agg", lc_agg, "voxel-mean | region-mean | region-median")
        ->check(CLI::IsMember({"voxel-mean", "region-mean", "region-median"}));
    lc->add_option("--baseline", lc_baseline, "Baseline labeling; adds the percentage error increase");
    lc->add_option("--out", lc_out, "Also write the report here");

    // cluster-cohort
    auto* cohort = app.add_subcommand("cluster-cohort", "Cluster a cohort of time series into shared subregions");
    std::string co_series, co_masks, co_features, co_out, co_mode = "supervoxel";
    CohortOptions co;
    bool co_raw = false;
    SegmentFlags co_flags;
    co_flags.n_regions = 50;
    co_flags.relative = true;
    cohort->add_option("--series", co_series, "Comma-separated temporal series files")->required();
    cohort->add_option("--mask", co_masks, "Comma-separated masks, one per series")->required();
    cohort->add_option("--features", co_features, "Comma-separated feature volumes for clustering (default: PCA scores)");
    cohort->add_option("--out-dir", co_out, "Output directory")->required();
    cohort->add_option("--k", co.k, "Number of cohort labels");
    cohort->add_option("--pca-components", co.pca_components, "Temporal principal components");
    cohort->add_option("--mode", co_mode, "supervoxel | voxel")->check(CLI::IsMember({"supervoxel", "voxel"}));
    cohort->add_option("--n-regions", co_flags.n_regions, "Supervoxels per case");
    cohort->add_option("--compactness", co_flags.compactness, "Compactness factor on S");
    cohort->add_option("--max-iters", co_flags.max_iters, "Supervoxel k-means iterations");
    cohort->add_flag("--no-standardize", co_raw, "Cluster raw descriptor values");

    // phantom
    auto* ph = app.add_subcommand("phantom", "Write a synthetic test case");
    std::string ph_spec, ph_out, ph_offset = "0,0";
    std::uint64_t ph_seed = 0;
    PhantomSpec spec;
    ph->add_option("--spec", ph_spec, "a (2D blobs) | b (3D subregions) | c (3D + time archetypes)")->required();
    ph->add_option("--seed", ph_seed, "Random seed");
    ph->add_option("--out-dir", ph_out, "Output directory")->required();
    ph->add_option("--size", spec.size, "Grid extent per axis (0 = default)");
    ph->add_option("--noise", spec.noise, "Noise sigma as a fraction of contrast (negative = default)");
    ph->add_option("--offset", ph_offset, "Content translation for spec a, dx,dy");
    ph->add_option("--frames", spec.frames, "Frames for spec c");
    ph->add_option("--archetypes", spec.archetypes, "Archetypes for spec c");

    // bench
    auto* bench = app.add_subcommand("bench", "Repeat timing of segment");
    std::string b_volume, b_mask, b_out;
    int repeats = 5;
    bool matched = false;
    SegmentFlags b_flags;
    bench->add_option("--volume", b_volume, "Feature volume")->required();
    bench->add_option("--mask", b_mask, "Mask volume")->required();
    bench->add_option("--repeats", repeats, "Timed runs; the median is reported");
    bench->add_flag("--matched", matched,
                    "Time naive1 at --n-regions and maskslic at the region count naive1 leaves in the mask");
    bench->add_option("--out", b_out, "Also write the report here");
    b_flags.add_to(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error[Usage]: " << msg << '\n';
        return 2;
    }

    try {
        if (threads >= 0) set_num_threads(threads);

        if (*seg) {
            const FeatureVolume raw = io::read_feature_volume(seg_volume);
            const Mask mask = io::read_mask(seg_mask);
            validate_pair(raw, mask);
            const FeatureVolume volume = seg_flags.standardize ? io::standardize_channels(raw, mask) : raw;
            SlicParams p = seg_flags.params();
            if (seg_flags.relative) p = with_relative_compactness(p, mask, volume.spacing());
            const Labeling labels = segment(volume, mask, p);
            io::write_volume(labels, seg_out);
            nlohmann::json j;
            j["backend"] = std::string(to_string(p.backend));
            j["n_regions"] = labels.num_regions();
            j["compactness"] = io::round_sig9(p.compactness);
            emit(j, "", out);
        } else if (*cs) {
            const Offset off = parse_offset(cs_offset);
            const Labeling a = io::read_labeling(cs_a);
            const Labeling b = io::read_labeling(cs_b);
            emit(io::to_json(consistency_score(a, b, off)), cs_out, out);
        } else if (*lc) {
            const Labeling labels = io::read_labeling(lc_labels);
            const LabelGrid truth = io::read_label_grid(lc_truth);
            const Mask mask = lc_mask.empty() ? foreground_of(labels) : io::read_mask(lc_mask);
            const LcAggregation agg = lc_aggregation_from_string(lc_agg);
            const ConsistencyReport report = label_consistency(labels, truth, mask, agg);
            nlohmann::json j = io::to_json(report);
            if (!lc_baseline.empty()) {
                const ConsistencyReport base = label_consistency(io::read_labeling(lc_baseline), truth, mask, agg);
                j["e_baseline"] = io::round_sig9(base.e);
                j["error_increase_pct"] = io::round_sig9(error_increase(base.e, report.e));
            }
            emit(j, lc_out, out);
        } else if (*cohort) {
            const auto series_paths = split_list(co_series);
            const auto mask_paths = split_list(co_masks);
            const auto feature_paths = split_list(co_features);
            if (mask_paths.size() != series_paths.size())
                throw UsageError("--mask must list one file per --series entry");
            if (!feature_paths.empty() && feature_paths.size() != series_paths.size())
                throw UsageError("--features must list one file per --series entry");
            co.mode = cohort_mode_from_string(co_mode);
            co.slic = co_flags.params();
            co.relative_compactness = co_flags.relative;
            co.standardize = !co_raw;
            std::vector<CohortCase> cases;
            for (std::size_t i = 0; i < series_paths.size(); ++i) {
                CohortCase c{fs::path(series_paths[i]).stem().string(), io::read_temporal_series(series_paths[i]),
                             io::read_mask(mask_paths[i]), std::nullopt};
                if (!feature_paths.empty()) c.features = io::read_feature_volume(feature_paths[i]);
                cases.push_back(std::move(c));
            }
            const CohortResult result = run_cohort(cases, co);
            fs::create_directories(co_out);
            for (std::size_t i = 0; i < cases.size(); ++i) {
                io::write_volume(result.maps[i], fs::path(co_out) / (cases[i].id + "_subregions.mslc"));
                if (co.mode == CohortMode::Supervoxel)
                    io::write_volume(result.supervoxels[i], fs::path(co_out) / (cases[i].id + "_supervoxels.mslc"));
            }
            if (co.mode == CohortMode::Supervoxel) {
                std::ofstream table(fs::path(co_out) / "descriptors.csv");
                if (!table) throw Error(ErrorCode::IoError, "cannot write descriptors.csv");
                std::vector<RegionDescriptor> rows;
                for (const auto& d : result.descriptors) rows.insert(rows.end(), d.begin(), d.end());
                io::write_descriptor_table(rows, table);
            }
            nlohmann::json j;
            j["mode"] = std::string(to_string(co.mode));
            j["k"] = result.clustering.k;
            j["items"] = result.clustering.assignment.size();
            j["iterations"] = result.clustering.iterations;
            j["inertia"] = io::round_sig9(result.clustering.inertia);
            emit(j, (fs::path(co_out) / "cohort.json").string(), out);
        } else if (*ph) {
            spec.kind = phantom_kind_from_string(ph_spec);
            spec.offset = parse_offset(ph_offset);
            const Phantom p = make_phantom(spec, ph_seed);
            fs::create_directories(ph_out);
            const fs::path dir(ph_out);
            io::write_volume(p.volume, dir / "volume.mslc");
            io::write_volume(p.mask, dir / "mask.mslc");
            io::write_volume(p.truth, dir / "truth.mslc");
            if (p.series) io::write_volume(*p.series, dir / "series.mslc");
            nlohmann::json j;
            j["spec"] = ph_spec;
            j["seed"] = ph_seed;
            j["dims"] = p.mask.shape().to_string();
            j["mask_voxels"] = p.mask.count();
            j["contrast"] = io::round_sig9(p.contrast);
            emit(j, "", out);
        } else if (*bench) {
            const FeatureVolume raw = io::read_feature_volume(b_volume);
            const Mask mask = io::read_mask(b_mask);
            validate_pair(raw, mask);
            const FeatureVolume volume = b_flags.standardize ? io::standardize_channels(raw, mask) : raw;
            nlohmann::json j;
            j["mask_fraction"] =
                io::round_sig9(static_cast<double>(mask.count()) / static_cast<double>(mask.shape().size()));
            j["threads"] = num_threads();
            auto& runs = j["timings"] = nlohmann::json::array();
            if (matched) {
                const auto timings = bench_matched(volume, mask, b_flags.params(), repeats, b_flags.relative);
                for (const auto& t : timings) runs.push_back(timing_json(t));
                j["masked_not_slower"] = timings[0].median_seconds <= timings[1].median_seconds;
            } else {
                SlicParams p = b_flags.params();
                if (b_flags.relative) p = with_relative_compactness(p, mask, volume.spacing());
                runs.push_back(timing_json(time_segment(volume, mask, p, repeats)));
            }
            emit(j, b_out, out);
        }
    } catch (const UsageError& e) {
        err << "error[Usage]: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error[" << to_string(e.code()) << "]: " << e.what() << '\n';
        return 1;
    } catch (const fs::filesystem_error& e) {
        err << "error[IoError]: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace maskslic
