#pragma once

// Seeded generators for test rasters and the two-epoch coastal scene.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "coastal/labels.hpp"
#include "coastal/raster.hpp"
#include "coastal/scheme.hpp"

namespace synth {

using coastal::ClassId;
using coastal::ImageRaster;
using coastal::LabelRaster;

inline std::uint8_t clamp8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

inline ImageRaster random_image(std::size_t w, std::size_t h, std::size_t bands, std::mt19937_64& rng) {
    ImageRaster img(w, h, bands);
    std::uniform_int_distribution<int> d(0, 255);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t b = 0; b < bands; ++b) img.at(x, y, b) = static_cast<std::uint8_t>(d(rng));
    return img;
}

/// Labels drawn from [0,k), with roughly `masked_share` of pixels set to `masked`.
inline LabelRaster random_labels(std::size_t w, std::size_t h, int k, std::mt19937_64& rng, double masked_share = 0.0,
                                 ClassId masked = coastal::kDefaultMaskedId) {
    LabelRaster l(w, h);
    std::uniform_int_distribution<int> d(0, k - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) l.at(x, y) = u(rng) < masked_share ? masked : static_cast<ClassId>(d(rng));
    return l;
}

/// Palette colors plus per-channel Gaussian noise; masked pixels become transparent.
inline ImageRaster noisy_encode(const LabelRaster& labels, const coastal::ClassScheme& scheme, double sigma,
                                std::uint64_t seed) {
    ImageRaster img = coastal::encode_labels(labels, scheme);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, sigma);
    for (std::size_t y = 0; y < img.height(); ++y) {
        for (std::size_t x = 0; x < img.width(); ++x) {
            if (img.at(x, y, 3) == 0) continue;
            for (std::size_t b = 0; b < 3; ++b) img.at(x, y, b) = clamp8(img.at(x, y, b) + n(rng));
        }
    }
    return img;
}

// Class ids of the default scheme.
inline constexpr ClassId kSand = 0;
inline constexpr ClassId kDense = 1;
inline constexpr ClassId kSparse = 2;
inline constexpr ClassId kRaft = 3;
inline constexpr ClassId kDebris = 4;
inline constexpr ClassId kWater = 5;

struct Texture {
    double r, g, b, sigma;
};

// Surface appearance of each class in the generated imagery.
inline Texture texture_of(ClassId c) {
    switch (c) {
    case kSand: return {205, 180, 140, 4};
    case kDense: return {20, 80, 25, 20};
    case kSparse: return {110, 170, 100, 15};
    case kRaft: return {120, 70, 30, 5};
    case kDebris: return {230, 40, 40, 6};
    default: return {40, 70, 150, 4};
    }
}

struct Scene {
    LabelRaster truth;
    ImageRaster image;
};

inline constexpr std::size_t kSceneSize = 2048;
inline constexpr std::size_t kBlock = 1024;
inline constexpr std::size_t kBorder = 24;
inline constexpr double kPixelSize = 0.4;

struct Bands {
    long water_end, sand_end, dense_end;
    int rafts; // per block, out of 12 slots
    int debris; // per block, out of 5 slots
};

// Epoch 1 gains sand and debris and loses dense vegetation, sparse vegetation and rafts.
inline Bands bands_for(int epoch) {
    return epoch == 0 ? Bands{200, 450, 780, 12, 2} : Bands{230, 640, 830, 5, 5};
}

/**
 * Ground truth of one epoch: each 1024 block holds, top to bottom, water
 * with rectangular rafts, a sand field with debris patches, dense and then
 * sparse vegetation. Band edges wave gently and each block is shifted by a
 * seeded offset. A 24 px border is masked.
 */
inline LabelRaster scene_truth(int epoch, std::uint64_t seed = 2024, std::size_t size = kSceneSize) {
    const Bands b = bands_for(epoch);
    LabelRaster t(size, size, kWater,
                  coastal::GeoTransform(400000.0, 3300000.0, kPixelSize, kPixelSize));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> shift(-20, 20);
    const std::size_t blocks = (size + kBlock - 1) / kBlock;
    std::vector<int> offset(blocks * blocks);
    for (auto& o : offset) o = shift(rng);
    const double pi = std::acos(-1.0);
    for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
            const long by = long(y % kBlock);
            const long bx = long(x % kBlock);
            const int off = offset[(y / kBlock) * blocks + x / kBlock];
            const long wave = std::lround(12.0 * std::sin(2.0 * pi * double(bx) / 512.0));
            const long v = by - off - wave;
            ClassId c = v < b.water_end ? kWater : v < b.sand_end ? kSand : v < b.dense_end ? kDense : kSparse;
            // Rafts: two rows of six 96x32 slots inside the water band.
            if (by >= 50 && by < 82 + 70 && (by < 82 || by >= 120)) {
                const long slot_x = (bx - 40) / 160;
                const long in_x = (bx - 40) % 160;
                const long row = by < 82 ? 0 : 1;
                if (bx >= 40 && slot_x < 6 && in_x < 96 && row * 6 + slot_x < b.rafts) c = kRaft;
            }
            // Debris: 24x24 patches in the sand band, 2 in the first row and 3 lower.
            if (c == kSand) {
                const long dy = by - off;
                const long slot_x = (bx - 100) / 300;
                const long in_x = (bx - 100) % 300;
                if (bx >= 100 && in_x < 24 && slot_x < 3) {
                    if (dy >= 300 && dy < 324 && slot_x < std::min(b.debris, 2)) c = kDebris;
                    if (dy >= 500 && dy < 524 && slot_x < b.debris - 2) c = kDebris;
                }
            }
            if (x < kBorder || y < kBorder || x >= size - kBorder || y >= size - kBorder) c = coastal::kDefaultMaskedId;
            t.at(x, y) = c;
        }
    }
    return t;
}

/// Textured RGBA imagery of a truth map; masked pixels are transparent.
inline ImageRaster scene_image(const LabelRaster& truth, std::uint64_t seed) {
    ImageRaster img(truth.width(), truth.height(), 4, truth.geo());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::size_t y = 0; y < truth.height(); ++y) {
        for (std::size_t x = 0; x < truth.width(); ++x) {
            const ClassId c = truth.at(x, y);
            if (c == coastal::kDefaultMaskedId) continue;
            const Texture t = texture_of(c);
            img.at(x, y, 0) = clamp8(t.r + t.sigma * n(rng));
            img.at(x, y, 1) = clamp8(t.g + t.sigma * n(rng));
            img.at(x, y, 2) = clamp8(t.b + t.sigma * n(rng));
            img.at(x, y, 3) = 255;
        }
    }
    return img;
}

inline Scene make_scene(int epoch, std::size_t size = kSceneSize) {
    Scene s;
    s.truth = scene_truth(epoch, 2024, size);
    s.image = scene_image(s.truth, 7000 + static_cast<std::uint64_t>(epoch));
    return s;
}

} // namespace synth
