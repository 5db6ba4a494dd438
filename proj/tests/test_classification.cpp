#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "coastal/classification.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace coastal;

namespace {

ImageRaster constant_image(std::size_t w, std::size_t h, Rgb c) {
    ImageRaster img(w, h, 3);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            img.at(x, y, 0) = c.r;
            img.at(x, y, 1) = c.g;
            img.at(x, y, 2) = c.b;
        }
    return img;
}

// Vertical stripes 128 px wide alternating a flat and a rough texture of the same mean color.
struct TextureFixture {
    ImageRaster image;
    LabelRaster truth;
};

TextureFixture two_texture_fixture(std::size_t size, std::uint64_t seed) {
    TextureFixture f{ImageRaster(size, size, 3), LabelRaster(size, size)};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
            const ClassId c = (x / 128) % 2 == 0 ? 1 : 2;
            const double sigma = c == 1 ? 4.0 : 30.0;
            f.truth.at(x, y) = c;
            f.image.at(x, y, 0) = synth::clamp8(90 + sigma * n(rng));
            f.image.at(x, y, 1) = synth::clamp8(140 + sigma * n(rng));
            f.image.at(x, y, 2) = synth::clamp8(80 + sigma * n(rng));
        }
    }
    return f;
}

std::vector<TilePair> pairs_of(const ImageRaster& img, const LabelRaster& l, std::size_t ts = 64) {
    return pair_tiles(tile_raster(img, ts), tile_raster(l, ts));
}

} // namespace

TEST(Train, AllMaskedIsError) {
    EXPECT_THROW(train_baseline(pairs_of(ImageRaster(64, 64, 3), LabelRaster(64, 64, kDefaultMaskedId))),
                 InvalidArgument);
}

TEST(Train, WindowMustBeOdd) {
    const auto pairs = pairs_of(ImageRaster(8, 8, 3), LabelRaster(8, 8), 8);
    EXPECT_THROW(train_baseline(pairs, 4), InvalidArgument);
    EXPECT_THROW(train_baseline(pairs, 0), InvalidArgument);
}

TEST(Train, ConstantSandCentroid) {
    const auto model = train_baseline(pairs_of(constant_image(100, 70, {210, 180, 140}), LabelRaster(100, 70)));
    ASSERT_EQ(model.classes.size(), 1u);
    const auto& c = model.classes[0];
    EXPECT_EQ(c.id, 0);
    EXPECT_EQ(c.samples, 7000u);
    const double want[3] = {210, 180, 140};
    for (std::size_t b = 0; b < 3; ++b) {
        EXPECT_DOUBLE_EQ(c.centroid[b], want[b]);
        EXPECT_DOUBLE_EQ(c.centroid[3 + b], want[b]);
        EXPECT_DOUBLE_EQ(c.centroid[6 + b], 0.0);
    }
    for (double s : c.spread) EXPECT_EQ(s, kSpreadFloor);
}

TEST(Train, TexturesSeparateInStddevFeatures) {
    const TextureFixture f = two_texture_fixture(256, 3);
    const auto model = train_baseline(pairs_of(f.image, f.truth));
    ASSERT_EQ(model.classes.size(), 2u);
    for (std::size_t b = 0; b < 3; ++b) {
        const auto& flat = model.classes[0];
        const auto& rough = model.classes[1];
        EXPECT_GT(rough.centroid[6 + b] - flat.centroid[6 + b], 3 * (flat.spread[6 + b] + rough.spread[6 + b]) / 2);
    }
}

TEST(Features, MatchDirectWindowScan) {
    std::mt19937_64 rng(4);
    ImageRaster img = synth::random_image(200, 150, 4, rng);
    for (std::size_t y = 0; y < 150; ++y)
        for (std::size_t x = 0; x < 200; ++x) img.at(x, y, 3) = (x * 7 + y) % 11 == 0 ? 0 : 255;
    for (const auto& tile : tile_raster(img, 64)) {
        const TileFeatures tf = compute_features(tile, 5);
        for (std::size_t y = 0; y < 64; y += 3) {
            for (std::size_t x = 0; x < 64; x += 5) {
                const bool valid = !tile.is_padding(x, y) && tile.payload.opaque(x, y);
                ASSERT_EQ(bool(tf.valid[y * 64 + x]), valid);
                if (!valid) continue;
                for (std::size_t b = 0; b < 3; ++b) {
                    const auto [mean, sd] =
                        oracle::window_moments(tile.payload, tile.valid_width(), tile.valid_height(), x, y, b, 5);
                    EXPECT_NEAR(tf.features[y * 64 + x][3 + b], mean, 1e-9);
                    EXPECT_NEAR(tf.features[y * 64 + x][6 + b], sd, 1e-9);
                }
            }
        }
    }
}

TEST(Predict, UntrainedIsError) {
    const auto tiles = tile_raster(ImageRaster(8, 8, 3));
    EXPECT_THROW(predict_tile(BaselineModel{}, tiles[0]), InvalidArgument);
}

TEST(Predict, CentroidPixelWins) {
    std::vector<TilePair> pairs = pairs_of(constant_image(64, 64, {210, 180, 140}), LabelRaster(64, 64, ClassId{0}));
    auto more = pairs_of(constant_image(64, 64, {0, 100, 0}), LabelRaster(64, 64, ClassId{1}));
    pairs.push_back(more[0]);
    pairs.back().image.grid_col = pairs.back().label.grid_col = 1;
    const auto model = train_baseline(pairs);
    const auto tiles = tile_raster(constant_image(16, 16, {210, 180, 140}), 16);
    const ScoreMap sm = predict_tile(model, tiles[0]);
    EXPECT_GT(sm.at(3, 3)[0], sm.at(3, 3)[1]);
}

TEST(Predict, ScoresNormalizedAndMatchNearestCentroidOracle) {
    const TextureFixture f = two_texture_fixture(256, 5);
    const auto model = train_baseline(pairs_of(f.image, f.truth), 7);
    const TextureFixture test = two_texture_fixture(200, 6);
    for (const auto& tile : tile_raster(test.image, 128)) {
        const ScoreMap sm = predict_tile(model, tile);
        for (std::size_t y = 0; y < 128; ++y) {
            for (std::size_t x = 0; x < 128; ++x) {
                const auto s = sm.at(x, y);
                double total = 0;
                for (double v : s) {
                    ASSERT_GE(v, 0.0);
                    total += v;
                }
                ASSERT_NEAR(total, 1.0, 1e-9);
                if (tile.is_padding(x, y)) {
                    ASSERT_TRUE(sm.masked(x, y));
                    continue;
                }
                // Oracle: features by direct scan, then the smallest normalized distance.
                FeatureVector fv{};
                for (std::size_t b = 0; b < 3; ++b) {
                    const auto [mean, sd] =
                        oracle::window_moments(tile.payload, tile.valid_width(), tile.valid_height(), x, y, b, 7);
                    fv[b] = tile.payload.at(x, y, b);
                    fv[3 + b] = mean;
                    fv[6 + b] = sd;
                }
                std::vector<double> d;
                for (const auto& c : model.classes) {
                    double acc = 0;
                    for (std::size_t k = 0; k < kFeatureCount; ++k)
                        acc += std::pow((fv[k] - c.centroid[k]) / c.spread[k], 2);
                    d.push_back(acc);
                }
                if (std::abs(d[0] - d[1]) < 1e-9 * (1 + d[0])) continue;
                const std::size_t want = d[0] <= d[1] ? 0 : 1;
                const std::size_t got = s[0] >= s[1] ? 0 : 1;
                ASSERT_EQ(got, want) << "pixel " << x << "," << y;
            }
        }
    }
}

TEST(ScoresToLabels, FloorBehaviour) {
    ScoreMap sm{1, 1, {0, 1, 2}, {0.4, 0.35, 0.25, 0.0}};
    const ClassScheme s = default_scheme();
    EXPECT_EQ(scores_to_labels(sm, s, 0.0).at(0, 0), 0);
    EXPECT_EQ(scores_to_labels(sm, s, 0.5).at(0, 0), *s.unclassified_id());
    EXPECT_THROW(scores_to_labels(sm, s, 1.0), InvalidArgument);
    const ClassScheme no_unclassified({{0, "a", {1, 1, 1}}, {1, "b", {2, 2, 2}}, {2, "c", {3, 3, 3}}});
    EXPECT_THROW(scores_to_labels(sm, no_unclassified, 0.5), InvalidArgument);
    ScoreMap bad{1, 1, {0, 1, 2}, {0.5, 0.5}};
    EXPECT_THROW(scores_to_labels(bad, s), InvalidArgument);
}

TEST(ScoresToLabels, RandomMapsMatchArgmaxOracle) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ClassScheme s = default_scheme();
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + trial % 5;
        ScoreMap sm{13, 9, {}, {}};
        for (std::size_t c = 0; c < k; ++c) sm.classes.push_back(static_cast<ClassId>(c));
        for (std::size_t p = 0; p < 13 * 9; ++p) {
            std::vector<double> v(k);
            double t = 0;
            for (auto& x : v) t += (x = std::floor(u(rng) * 4)); // coarse values force ties
            if (t == 0) v[0] = t = 1;
            for (auto x : v) sm.scores.push_back(x / t);
            sm.scores.push_back(0.0);
        }
        const LabelRaster l = scores_to_labels(sm, s);
        for (std::size_t p = 0; p < 13 * 9; ++p) {
            std::size_t best = 0;
            for (std::size_t c = 0; c < k; ++c)
                if (sm.scores[p * (k + 1) + c] > sm.scores[p * (k + 1) + best]) best = c;
            ASSERT_EQ(l.labels()[p], best);
        }
    }
}

TEST(ClassifyRaster, EqualsComposition) {
    const TextureFixture f = two_texture_fixture(256, 8);
    const auto model = train_baseline(pairs_of(f.image, f.truth));
    const TextureFixture test = two_texture_fixture(300, 9);
    const ClassScheme s = default_scheme();
    std::vector<LabelTile> labeled;
    for (const auto& t : tile_raster(test.image, 128)) {
        labeled.push_back({t.grid_col, t.grid_row, t.pixel_origin, t.tile_size, t.parent_width, t.parent_height,
                           scores_to_labels(predict_tile(model, t), s)});
    }
    const LabelRaster composed = mosaic_tiles(labeled, 300, 300);
    for (unsigned threads : {1u, 3u}) {
        const LabelRaster direct = classify_raster(model, test.image, s, nullptr, {128, 0.0, threads});
        EXPECT_EQ(oracle::values(direct.labels()), oracle::values(composed.labels()));
    }
}

TEST(ClassifyRaster, DimensionsAndMasking) {
    const TextureFixture f = two_texture_fixture(256, 10);
    const auto model = train_baseline(pairs_of(f.image, f.truth));
    const ClassScheme s = default_scheme();
    const LabelRaster out = classify_raster(model, ImageRaster(600, 600, 3), s);
    EXPECT_EQ(out.width(), 600u);
    EXPECT_EQ(out.height(), 600u);
    for (auto l : out.labels()) ASSERT_NE(l, kDefaultMaskedId);

    const MaskRaster none(50, 40, false);
    const LabelRaster masked = classify_raster(model, ImageRaster(50, 40, 3), s, &none);
    for (auto l : masked.labels()) ASSERT_EQ(l, kDefaultMaskedId);
    const LabelRaster transparent = classify_raster(model, ImageRaster(50, 40, 4), s);
    for (auto l : transparent.labels()) ASSERT_EQ(l, kDefaultMaskedId);
}

TEST(ClassifyRaster, TwoTextureHeldOutAccuracy) {
    const TextureFixture f = two_texture_fixture(512, 11);
    const Region train_half{0, 0, 512, 256};
    const Region test_half{0, 256, 512, 256};
    const auto model = train_baseline(pairs_of(crop(f.image, train_half), crop(f.truth, train_half), 256));
    const LabelRaster pred = classify_raster(model, crop(f.image, test_half), default_scheme());
    const LabelRaster truth = crop(f.truth, test_half);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < pred.pixel_count(); ++i) agree += pred.labels()[i] == truth.labels()[i];
    EXPECT_GE(double(agree) / double(pred.pixel_count()), 0.95);
}

TEST(MajorityFilter, UniformUnchangedAndDissenterAbsorbed) {
    LabelRaster l(9, 9, ClassId{2});
    EXPECT_EQ(oracle::values(majority_filter(l).labels()), oracle::values(l.labels()));
    l.at(4, 4) = 0;
    const LabelRaster out = majority_filter(l);
    EXPECT_EQ(out.at(4, 4), 2);
}

TEST(MajorityFilter, MatchesWindowedModeOracle) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 40; ++trial) {
        const LabelRaster l = synth::random_labels(3 + trial % 17, 2 + trial % 13, 2 + trial % 4, rng, 0.15);
        const std::size_t r = 1 + trial % 3;
        const LabelRaster want = oracle::windowed_mode(l, kDefaultMaskedId, r);
        EXPECT_EQ(oracle::values(majority_filter(l, kDefaultMaskedId, r, 1, 1 + trial % 3).labels()),
                  oracle::values(want.labels()));
        EXPECT_EQ(oracle::values(majority_filter(l, kDefaultMaskedId, r, 2).labels()),
                  oracle::values(oracle::windowed_mode(want, kDefaultMaskedId, r).labels()));
    }
}

TEST(MajorityFilter, IdempotentWithoutIsolatedPixelsAndNoNewClasses) {
    LabelRaster l(40, 30, ClassId{0});
    for (std::size_t y = 0; y < 30; ++y)
        for (std::size_t x = 0; x < 40; ++x) l.at(x, y) = x < 20 ? 0 : (y < 15 ? 1 : 3);
    const LabelRaster once = majority_filter(l);
    EXPECT_EQ(oracle::values(majority_filter(once).labels()), oracle::values(once.labels()));

    std::mt19937_64 rng(13);
    const LabelRaster noisy = synth::random_labels(30, 30, 3, rng, 0.1);
    const std::set<ClassId> in(noisy.labels().begin(), noisy.labels().end());
    const LabelRaster filtered = majority_filter(noisy, kDefaultMaskedId, 2, 3);
    for (auto v : filtered.labels()) EXPECT_TRUE(in.count(v));
}

TEST(ModelFile, RoundTripIsExact) {
    const TextureFixture f = two_texture_fixture(256, 14);
    const auto model = train_baseline(pairs_of(f.image, f.truth));
    std::istringstream in(format_model(model));
    EXPECT_EQ(parse_model(in), model);
    std::istringstream bad("baseline-model v2\n");
    EXPECT_THROW(parse_model(bad), InvalidArgument);
    std::istringstream truncated("baseline-model v1\nwindow 9\nclasses 1\n0 5 1 2 3\n");
    EXPECT_THROW(parse_model(truncated), InvalidArgument);
}
