#include "maskslic/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace maskslic {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double to_unit(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

std::uint64_t content_key(long i, long j, long k)
{
    // Signed content coordinates; the fold keeps nearby points distinct.
    return splitmix64(static_cast<std::uint64_t>(i) * 0x100000001b3ULL ^
                      splitmix64(static_cast<std::uint64_t>(j) * 0x9e3779b1ULL ^ static_cast<std::uint64_t>(k)));
}

struct Blob {
    double ci, cj, ck, sigma, amplitude;
};

Phantom blob_image(const PhantomSpec& spec, std::uint64_t seed)
{
    const int n = spec.size > 0 ? spec.size : 128;
    const double noise = spec.noise >= 0 ? spec.noise : 0.05;
    const double contrast = 100.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    // Mask outline in content coordinates.
    const double mi = 0.5 * n, mj = 0.34 * n, base_r = 0.16 * n;
    const double ph3 = 2 * std::numbers::pi * u(rng), ph5 = 2 * std::numbers::pi * u(rng);
    auto inside = [&](double i, double j) {
        const double di = i - mi, dj = j - mj;
        const double theta = std::atan2(di, dj);
        const double r = base_r * (1.0 + 0.22 * std::sin(3 * theta + ph3) + 0.1 * std::cos(5 * theta + ph5));
        return di * di + dj * dj <= r * r;
    };

    std::vector<Blob> blobs;
    for (int b = 0; b < 14; ++b) {
        const double sign = b % 3 == 0 ? -1.0 : 1.0;
        blobs.push_back({-0.2 * n + 1.4 * n * u(rng), -0.2 * n + 1.4 * n * u(rng), 0.0, 0.03 * n + 0.07 * n * u(rng),
                         sign * (0.6 + 0.6 * u(rng)) * contrast});
    }
    // A few blobs concentrated under the mask give it internal structure.
    for (int b = 0; b < 4; ++b)
        blobs.push_back({mi + base_r * (u(rng) - 0.5), mj + base_r * (u(rng) - 0.5), 0.0, 0.03 * n + 0.03 * n * u(rng),
                         (0.8 + 0.4 * u(rng)) * contrast});

    const Shape shape{n, n};
    std::vector<double> data(shape.size());
    std::vector<std::uint8_t> bits(shape.size());
    LabelGrid truth{shape, std::vector<std::int32_t>(shape.size(), 0)};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double ci = i - spec.offset[0], cj = j - spec.offset[1];
            double v = 100.0 + 20.0 * std::sin(0.11 * ci + 0.07 * cj);
            double positive = 0.0;
            for (const Blob& b : blobs) {
                const double d2 = (ci - b.ci) * (ci - b.ci) + (cj - b.cj) * (cj - b.cj);
                const double g = b.amplitude * std::exp(-d2 / (2 * b.sigma * b.sigma));
                v += g;
                if (g > 0) positive += g;
            }
            v += noise * contrast * hashed_gaussian(seed, 1, content_key(static_cast<long>(ci), static_cast<long>(cj), 0));
            const std::size_t idx = shape.index({i, j, 0});
            data[idx] = v;
            bits[idx] = inside(ci, cj);
            truth.labels[idx] = positive > 0.3 * contrast ? 1 : 0;
        }

    // Every mask voxel of the untranslated outline must survive the shift.
    std::size_t expected = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) expected += inside(i, j);
    Phantom p{FeatureVolume(shape, 1, std::move(data)), Mask(shape, std::move(bits)), std::move(truth), std::nullopt,
              contrast};
    if (p.mask.count() != expected) throw Error(ErrorCode::BadSpec, "offset moves the phantom mask off the grid");
    return p;
}

Phantom tumour_volume(const PhantomSpec& spec, std::uint64_t seed)
{
    const int n = spec.size > 0 ? spec.size : 48;
    const double noise = spec.noise >= 0 ? spec.noise : 0.2;
    // Adjacent subregion intensities are 40 apart.
    const double contrast = 40.0;
    const double level[5] = {0.0, 30.0, 70.0, 110.0, 150.0};  // by label; 0 unused
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto jitter = [&](double amount) { return amount * (2.0 * u(rng) - 1.0); };

    const double c0 = 0.5 * n + jitter(0.08 * n), c1 = 0.5 * n + jitter(0.08 * n), c2 = 0.5 * n + jitter(0.08 * n);
    const double radius = 0.27 * n;
    double harm[6];
    for (double& h : harm) h = jitter(0.12);

    // Necrotic core centre, rim thickness and the non-enhancing lobe plane.
    const double core_r = radius * (0.3 + 0.1 * u(rng));
    const double k0 = c0 + jitter(0.2 * radius), k1 = c1 + jitter(0.2 * radius), k2 = c2 + jitter(0.2 * radius);
    const double rim = 2.5 + 1.5 * u(rng);
    double pn[3] = {u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5};
    const double pl = std::sqrt(pn[0] * pn[0] + pn[1] * pn[1] + pn[2] * pn[2]);
    for (double& v : pn) v /= pl;
    const double plane_off = radius * (0.15 + 0.2 * u(rng));

    // Background texture spans the same intensity range as the tumour.
    double wave[3][4];
    for (auto& w : wave)
        for (double& x : w) x = u(rng);

    const Shape shape{n, n, n};
    std::vector<double> data(shape.size());
    std::vector<std::uint8_t> bits(shape.size());
    LabelGrid truth{shape, std::vector<std::int32_t>(shape.size(), 0)};
    for (std::size_t idx = 0; idx < shape.size(); ++idx) {
        const Index3 x = shape.coord(idx);
        const double d0 = x[0] - c0, d1 = x[1] - c1, d2 = x[2] - c2;
        const double r = std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
        const double s = r > 0 ? 1.0 / r : 0.0;
        const double a = d0 * s, b = d1 * s, c = d2 * s;
        const double bound = radius * (1.0 + harm[0] * a + harm[1] * b + harm[2] * c + harm[3] * a * b +
                                       harm[4] * b * c + harm[5] * (a * a - c * c));
        int label = 0;
        if (r <= bound) {
            const double e0 = x[0] - k0, e1 = x[1] - k1, e2 = x[2] - k2;
            const double rc = std::sqrt(e0 * e0 + e1 * e1 + e2 * e2);
            const double side = d0 * pn[0] + d1 * pn[1] + d2 * pn[2];
            if (rc <= core_r)
                label = 1;
            else if (rc <= core_r + rim)
                label = 4;
            else if (side > plane_off && r <= 0.8 * bound)
                label = 3;
            else
                label = 2;
        }
        double v;
        if (label > 0) {
            v = level[label];
        } else {
            v = 90.0;
            for (const auto& w : wave)
                v += 30.0 * std::sin(2 * std::numbers::pi * ((0.04 + 0.08 * w[0]) * x[0] + (0.04 + 0.08 * w[1]) * x[1] +
                                                              (0.04 + 0.08 * w[2]) * x[2] + w[3]));
        }
        v += noise * contrast * hashed_gaussian(seed, 2, idx);
        data[idx] = v;
        bits[idx] = label > 0;
        truth.labels[idx] = label;
    }
    return {FeatureVolume(shape, 1, std::move(data)), Mask(shape, std::move(bits)), std::move(truth), std::nullopt,
            contrast};
}

// Enhancement curve after a bolus at frame `onset`.
double enhancement(int t, int onset, double amplitude, double rise, double washout)
{
    if (t < onset) return 0.0;
    const double s = t - onset;
    return amplitude * (1.0 - std::exp(-s / rise)) * std::exp(-washout * s);
}

Phantom perfusion_series(const PhantomSpec& spec, std::uint64_t seed)
{
    const int n = spec.size > 0 ? spec.size : 24;
    const double noise = spec.noise >= 0 ? spec.noise : 0.3;
    const int frames = spec.frames;
    const int k = spec.archetypes;
    const int onset = std::min(5, frames / 4);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    // Kinetic parameters (amplitude, rise time, washout) per archetype; the
    // first three mimic washout, persistent and weak enhancement.
    struct Kinetics {
        double amplitude, rise, washout;
    };
    std::vector<Kinetics> kin = {{1.0, 1.5, 0.05}, {0.8, 8.0, 0.0}, {0.35, 4.0, 0.0}};
    while (static_cast<int>(kin.size()) < k) {
        const auto j = kin.size();
        kin.push_back({0.3 + 0.7 * (j % 4) / 3.0, 1.0 + 2.0 * static_cast<double>(j), 0.01 * static_cast<double>(j % 5)});
    }
    kin.resize(k);

    std::vector<std::vector<double>> curves(k, std::vector<double>(frames));
    for (int a = 0; a < k; ++a)
        for (int t = 0; t < frames; ++t) curves[a][t] = enhancement(t, onset, kin[a].amplitude, kin[a].rise, kin[a].washout);
    double contrast = 0.0;
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            for (int t = 0; t < frames; ++t) contrast = std::max(contrast, std::abs(curves[a][t] - curves[b][t]));
    if (contrast == 0.0) contrast = 1.0;

    // Parameter-map channels: amplitude, 1/rise, washout. Each channel's
    // noise is scaled to the spread of that parameter across archetypes.
    std::vector<std::array<double, 3>> params(k);
    std::array<double, 3> spread{};
    for (int a = 0; a < k; ++a) params[a] = {kin[a].amplitude, 1.0 / kin[a].rise, kin[a].washout};
    for (int j = 0; j < 3; ++j) {
        double lo = params[0][j], hi = params[0][j];
        for (const auto& p : params) {
            lo = std::min(lo, p[j]);
            hi = std::max(hi, p[j]);
        }
        spread[j] = hi > lo ? hi - lo : 1.0;
    }

    const double c0 = 0.5 * n + (u(rng) - 0.5) * 0.1 * n, c1 = 0.5 * n + (u(rng) - 0.5) * 0.1 * n,
                 c2 = 0.5 * n + (u(rng) - 0.5) * 0.1 * n;
    const double radius = 0.4 * n;
    // Archetype territories: nearest of k random anchors inside the sphere.
    std::vector<std::array<double, 3>> anchors(k);
    for (int a = 0; a < k; ++a) {
        const double th = 2 * std::numbers::pi * (a + 0.3 * u(rng)) / k;
        const double z = (u(rng) - 0.5) * radius;
        anchors[a] = {c0 + z, c1 + 0.55 * radius * std::cos(th), c2 + 0.55 * radius * std::sin(th)};
    }

    const Shape shape{n, n, n};
    const std::size_t v = shape.size();
    std::vector<double> values(v * frames);
    std::vector<double> maps(v * 3);
    std::vector<std::uint8_t> bits(v);
    LabelGrid truth{shape, std::vector<std::int32_t>(v, -1)};
    const double sigma = noise * contrast;
    for (std::size_t idx = 0; idx < v; ++idx) {
        const Index3 x = shape.coord(idx);
        const double d0 = x[0] - c0, d1 = x[1] - c1, d2 = x[2] - c2;
        const bool in = d0 * d0 + d1 * d1 + d2 * d2 <= radius * radius;
        int arche = -1;
        if (in) {
            double best = 1e300;
            for (int a = 0; a < k; ++a) {
                const double e0 = x[0] - anchors[a][0], e1 = x[1] - anchors[a][1], e2 = x[2] - anchors[a][2];
                const double d = e0 * e0 + e1 * e1 + e2 * e2;
                if (d < best) {
                    best = d;
                    arche = a;
                }
            }
        }
        for (int t = 0; t < frames; ++t) {
            const double clean = arche >= 0 ? curves[arche][t] : 0.1 * curves[k - 1][t];
            values[idx * frames + t] = clean + sigma * hashed_gaussian(seed, 3, idx * frames + t);
        }
        for (int j = 0; j < 3; ++j) {
            const double clean = arche >= 0 ? params[arche][j] : 0.0;
            maps[idx * 3 + j] = clean + noise * spread[j] * hashed_gaussian(seed, 4, idx * 3 + j);
        }
        bits[idx] = in;
        truth.labels[idx] = arche;
    }
    return {FeatureVolume(shape, 3, std::move(maps)), Mask(shape, std::move(bits)), std::move(truth),
            TemporalSeries(shape, frames, std::move(values)), contrast};
}

}  // namespace

void PhantomSpec::validate() const
{
    if (size < 0 || (size > 0 && size < 8)) throw Error(ErrorCode::BadSpec, "phantom size must be >= 8");
    if (!std::isfinite(noise)) throw Error(ErrorCode::BadSpec, "phantom noise must be finite");
    if (kind == PhantomKind::PerfusionSeries && (frames < 4 || archetypes < 1 || archetypes > 12))
        throw Error(ErrorCode::BadSpec, "series phantom needs >= 4 frames and 1..12 archetypes");
    if (kind != PhantomKind::BlobImage && offset != Offset{0, 0, 0})
        throw Error(ErrorCode::BadSpec, "only phantom a supports an offset");
    if (kind == PhantomKind::BlobImage && offset[2] != 0) throw Error(ErrorCode::BadSpec, "phantom a is 2D");
}

PhantomKind phantom_kind_from_string(const std::string& name)
{
    if (name == "a") return PhantomKind::BlobImage;
    if (name == "b") return PhantomKind::TumourVolume;
    if (name == "c") return PhantomKind::PerfusionSeries;
    throw Error(ErrorCode::BadSpec, "unknown phantom spec '" + name + "' (expected a, b or c)");
}

double hashed_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
{
    const std::uint64_t h = splitmix64(splitmix64(seed ^ (stream * 0xd1b54a32d192ed03ULL)) ^ index);
    const double u1 = to_unit(h);
    const double u2 = to_unit(splitmix64(h));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Phantom make_phantom(const PhantomSpec& spec, std::uint64_t seed)
{
    spec.validate();
    switch (spec.kind) {
    case PhantomKind::BlobImage: return blob_image(spec, seed);
    case PhantomKind::TumourVolume: return tumour_volume(spec, seed);
    case PhantomKind::PerfusionSeries: return perfusion_series(spec, seed);
    }
    throw Error(ErrorCode::BadSpec, "unknown phantom kind");
}

}  // namespace maskslic
