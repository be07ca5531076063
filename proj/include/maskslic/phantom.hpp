#pragma once

// Deterministic synthetic test data.
//
//  a: 2D blob image with an irregular mask. Image content and mask are
//     functions of (x - offset), so a non-zero offset translates both.
//  b: 3D volume with a tumour mask split into four labelled subregions
//     (necrotic core, enhancing rim, non-enhancing lobe, oedema) inside a
//     textured background, plus Gaussian noise.
//  c: 3D + time series whose in-mask voxels follow one of k planted
//     enhancement-curve archetypes, plus per-voxel kinetic parameter maps.

#include "maskslic/cohort.hpp"
#include "maskslic/volume.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace maskslic {

enum class PhantomKind { BlobImage, TumourVolume, PerfusionSeries };

struct PhantomSpec {
    PhantomKind kind = PhantomKind::BlobImage;
    int size = 0;        // grid extent per axis; 0 picks 128 / 48 / 24
    double noise = -1;   // noise sigma as a fraction of contrast; < 0 picks 0.05 / 0.2 / 0.3
    Offset offset{0, 0, 0};
    int frames = 30;
    int archetypes = 3;

    void validate() const;
};

/// Parses "a", "b" or "c"; throws BadSpec otherwise.
PhantomKind phantom_kind_from_string(const std::string& name);

struct Phantom {
    FeatureVolume volume;  // a, b: the image; c: kinetic parameter maps
    Mask mask;
    LabelGrid truth;       // a: blob membership; b: 1..4 in mask, 0 outside; c: archetype id, -1 outside
    std::optional<TemporalSeries> series;
    double contrast = 0.0;  // reference contrast the noise fraction refers to
};

Phantom make_phantom(const PhantomSpec& spec, std::uint64_t seed);

/// Zero-mean, unit-variance value determined by (seed, stream, index) alone.
double hashed_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace maskslic
