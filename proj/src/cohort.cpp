#include "maskslic/cohort.hpp"

#include "maskslic/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace maskslic {

TemporalSeries::TemporalSeries(Shape shape, int frames, std::vector<double> values, Spacing spacing)
    : shape_(shape), frames_(frames), spacing_(checked_spacing(shape, spacing)), values_(std::move(values))
{
    if (frames_ < 2) throw Error(ErrorCode::InvalidArgument, "a temporal series needs at least two frames");
    if (values_.size() != shape_.size() * static_cast<std::size_t>(frames_))
        throw Error(ErrorCode::DimsMismatch, "series length does not match dims x frames");
    for (double v : values_)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "series contains NaN or Inf");
}

PcaResult temporal_pca_full(const TemporalSeries& series, const Mask& mask, int n_components)
{
    if (!(series.shape() == mask.shape())) throw Error(ErrorCode::DimsMismatch, "series and mask dims differ");
    const int t = series.frames();
    const std::size_t m = mask.count();
    if (m < 2) throw Error(ErrorCode::DegenerateData, "PCA needs at least two in-mask voxels");
    if (n_components < 1 || static_cast<std::size_t>(n_components) > std::min<std::size_t>(t, m))
        throw Error(ErrorCode::InvalidArgument, "n_components must lie in [1, min(frames, mask voxels)]");

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(t);
    double magnitude = 0.0;
    for (std::size_t i = 0; i < mask.shape().size(); ++i) {
        if (!mask[i]) continue;
        auto c = series.curve(i);
        for (int f = 0; f < t; ++f) {
            mean[f] += c[f];
            magnitude += c[f] * c[f];
        }
    }
    mean /= static_cast<double>(m);
    magnitude /= static_cast<double>(m);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(t, t);
    Eigen::VectorXd centred(t);
    for (std::size_t i = 0; i < mask.shape().size(); ++i) {
        if (!mask[i]) continue;
        auto c = series.curve(i);
        for (int f = 0; f < t; ++f) centred[f] = c[f] - mean[f];
        cov.selfadjointView<Eigen::Lower>().rankUpdate(centred);
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(m);

    // Rounding in the mean leaves ~1e-32 relative residue for identical curves.
    if (cov.trace() <= 1e-24 * std::max(magnitude, std::numeric_limits<double>::min()))
        throw Error(ErrorCode::DegenerateData, "all in-mask time curves are identical");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::DegenerateData, "eigendecomposition failed");

    PcaResult result;
    result.mean_curve.assign(mean.data(), mean.data() + t);
    for (int k = 0; k < t; ++k) result.eigenvalues.push_back(std::max(0.0, solver.eigenvalues()[t - 1 - k]));

    Eigen::MatrixXd basis(t, n_components);
    for (int k = 0; k < n_components; ++k) {
        Eigen::VectorXd v = solver.eigenvectors().col(t - 1 - k);
        Eigen::Index arg = 0;
        for (Eigen::Index f = 1; f < t; ++f)
            if (std::abs(v[f]) > std::abs(v[arg])) arg = f;
        if (v[arg] < 0) v = -v;
        basis.col(k) = v;
        result.components.emplace_back(v.data(), v.data() + t);
    }

    std::vector<double> scores(mask.shape().size() * n_components, 0.0);
    for (std::size_t i = 0; i < mask.shape().size(); ++i) {
        if (!mask[i]) continue;
        auto c = series.curve(i);
        for (int f = 0; f < t; ++f) centred[f] = c[f] - mean[f];
        for (int k = 0; k < n_components; ++k) scores[i * n_components + k] = basis.col(k).dot(centred);
    }
    result.scores = FeatureVolume(series.shape(), n_components, std::move(scores), series.spacing());
    return result;
}

FeatureVolume temporal_pca(const TemporalSeries& series, const Mask& mask, int n_components)
{
    return temporal_pca_full(series, mask, n_components).scores;
}

std::vector<RegionDescriptor> extract_descriptors(const FeatureVolume& volume, const Labeling& labeling,
                                                  const std::string& case_id)
{
    if (!(volume.shape() == labeling.shape()))
        throw Error(ErrorCode::DimsMismatch, "feature volume and labeling dims differ");
    const int c = volume.channels();
    std::vector<RegionDescriptor> out(labeling.num_regions());
    std::vector<std::vector<double>> sums(labeling.num_regions(), std::vector<double>(c, 0.0));
    for (std::size_t i = 0; i < volume.voxels(); ++i) {
        const std::int32_t l = labeling[i];
        if (l < 0) continue;
        auto f = volume.at(i);
        for (int j = 0; j < c; ++j) sums[l][j] += f[j];
        ++out[l].voxel_count;
    }
    for (std::size_t r = 0; r < out.size(); ++r) {
        out[r].case_id = case_id;
        out[r].region_id = static_cast<int>(r);
        out[r].feature_means.resize(c);
        for (int j = 0; j < c; ++j) out[r].feature_means[j] = sums[r][j] / static_cast<double>(out[r].voxel_count);
    }
    return out;
}

namespace {

double squared_gap(const std::vector<double>& a, const std::vector<double>& b)
{
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double t = a[j] - b[j];
        acc += t * t;
    }
    return acc;
}

}  // namespace

CohortClustering kmeans_cohort(const std::vector<std::vector<double>>& items, int k, const KMeansOptions& options)
{
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    if (items.size() < static_cast<std::size_t>(k))
        throw Error(ErrorCode::TooFewItems, "fewer items than clusters");
    const std::size_t n = items.size();
    const std::size_t dim = items.front().size();
    for (const auto& it : items) {
        if (it.size() != dim) throw Error(ErrorCode::DimsMismatch, "items have different feature counts");
        for (double v : it)
            if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "item contains NaN or Inf");
    }

    CohortClustering result;
    result.k = k;

    std::vector<double> mean(dim, 0.0);
    for (const auto& it : items)
        for (std::size_t j = 0; j < dim; ++j) mean[j] += it[j];
    for (double& v : mean) v /= static_cast<double>(n);

    std::vector<std::uint8_t> chosen(n, 0);
    std::size_t first = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = squared_gap(items[i], mean);
        if (d < best) {
            best = d;
            first = i;
        }
    }
    result.centroids.push_back(items[first]);
    chosen[first] = 1;
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_gap(items[i], items[first]);
    while (result.centroids.size() < static_cast<std::size_t>(k)) {
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (chosen[i]) continue;
            if (pick == n || nearest[i] > nearest[pick]) pick = i;
        }
        chosen[pick] = 1;
        result.centroids.push_back(items[pick]);
        for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], squared_gap(items[i], items[pick]));
    }

    std::vector<int> assignment(n, -1);
    std::vector<double> dist(n);
    for (int iter = 0; iter < options.max_iters; ++iter) {
        std::vector<int> next(n);
        parallel_chunks(n, 1024, [&](std::size_t, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                int arg = 0;
                double d_best = squared_gap(items[i], result.centroids[0]);
                for (int c = 1; c < k; ++c) {
                    const double d = squared_gap(items[i], result.centroids[c]);
                    if (d < d_best) {
                        d_best = d;
                        arg = c;
                    }
                }
                next[i] = arg;
                dist[i] = d_best;
            }
        });

        // Re-seed empty clusters with the worst-fitting item of a cluster
        // that can spare one.
        std::vector<std::size_t> counts(k, 0);
        for (int a : next) ++counts[a];
        for (int c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t worst = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[next[i]] <= 1) continue;
                if (worst == n || dist[i] > dist[worst]) worst = i;
            }
            --counts[next[worst]];
            next[worst] = c;
            dist[worst] = 0.0;
            counts[c] = 1;
            result.centroids[c] = items[worst];
        }

        double inertia = 0.0;
        for (double d : dist) inertia += d;
        result.inertia_trace.push_back(inertia);
        result.iterations = iter + 1;

        const bool stable = next == assignment;
        assignment = std::move(next);

        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < dim; ++j) sums[assignment[i]][j] += items[i][j];
        for (int c = 0; c < k; ++c)
            for (std::size_t j = 0; j < dim; ++j)
                result.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        if (stable) break;
    }

    result.assignment = std::move(assignment);
    result.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) result.inertia += squared_gap(items[i], result.centroids[result.assignment[i]]);
    return result;
}

void standardize(std::vector<std::vector<double>>& items)
{
    if (items.empty()) return;
    const std::size_t dim = items.front().size();
    const double n = static_cast<double>(items.size());
    for (std::size_t j = 0; j < dim; ++j) {
        double mean = 0.0;
        for (const auto& it : items) mean += it[j];
        mean /= n;
        double var = 0.0;
        for (const auto& it : items) var += (it[j] - mean) * (it[j] - mean);
        const double sd = std::sqrt(var / n);
        for (auto& it : items) it[j] = sd > 0.0 ? (it[j] - mean) / sd : it[j] - mean;
    }
}

LabelGrid propagate_labels(const CohortClustering& clustering, const Labeling& labeling,
                           const std::vector<RegionDescriptor>& descriptors, std::size_t first_item)
{
    if (descriptors.size() != static_cast<std::size_t>(labeling.num_regions()))
        throw Error(ErrorCode::DimsMismatch, "one descriptor per supervoxel is required");
    if (first_item + descriptors.size() > clustering.assignment.size())
        throw Error(ErrorCode::DimsMismatch, "clustering has fewer items than descriptors");
    std::vector<std::int32_t> cluster_of(labeling.num_regions(), -1);
    for (std::size_t d = 0; d < descriptors.size(); ++d) {
        const int r = descriptors[d].region_id;
        if (r < 0 || r >= labeling.num_regions())
            throw Error(ErrorCode::DimsMismatch, "descriptor refers to a missing supervoxel");
        cluster_of[r] = clustering.assignment[first_item + d];
    }
    LabelGrid out{labeling.shape(), std::vector<std::int32_t>(labeling.shape().size(), Labeling::kBackground)};
    for (std::size_t i = 0; i < out.labels.size(); ++i)
        if (labeling[i] >= 0) out.labels[i] = cluster_of[labeling[i]];
    return out;
}

}  // namespace maskslic
