#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "coastal/labels.hpp"
#include "coastal/raster.hpp"
#include "coastal/scheme.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace coastal;

namespace {

std::vector<oracle::PaletteEntry> palette_of(const ClassScheme& s) {
    std::vector<oracle::PaletteEntry> p;
    for (const auto& c : s.classes()) p.push_back({c.id, c.color.r, c.color.g, c.color.b});
    return p;
}

ImageRaster single_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return ImageRaster(1, 1, 3, {r, g, b});
}

} // namespace

TEST(GeoTransform, PixelCenterRoundTrip) {
    const GeoTransform g(500000.0, 4200000.0, 0.4, 0.4);
    for (std::size_t row : {0u, 1u, 17u, 2047u}) {
        for (std::size_t col : {0u, 3u, 999u}) {
            const MapPoint p = g.pixel_center(col, row);
            EXPECT_EQ(p.x, 500000.0 + (col + 0.5) * 0.4);
            EXPECT_EQ(p.y, 4200000.0 - (row + 0.5) * 0.4);
            EXPECT_EQ(g.map_to_pixel(p), (PixelIndex{col, row}));
        }
    }
}

TEST(GeoTransform, RejectsDegenerateSizes) {
    EXPECT_THROW(GeoTransform(0, 0, 0.0, 1.0), InvalidArgument);
    EXPECT_THROW(GeoTransform(0, 0, 1.0, -1.0), InvalidArgument);
}

TEST(GeoTransform, OffsetMovesOrigin) {
    const GeoTransform g(10.0, 20.0, 2.0, 0.5);
    const GeoTransform o = g.offset(3, 4);
    EXPECT_EQ(o.origin_x(), 16.0);
    EXPECT_EQ(o.origin_y(), 18.0);
    EXPECT_EQ(o.pixel_center(0, 0).x, g.pixel_center(3, 4).x);
}

TEST(Rasters, ConstructionChecksSizes) {
    EXPECT_THROW(ImageRaster(2, 2, 2), InvalidArgument);
    EXPECT_THROW(ImageRaster(2, 2, 3, std::vector<std::uint8_t>(5)), InvalidArgument);
    EXPECT_THROW(LabelRaster(2, 2, std::vector<ClassId>(3)), InvalidArgument);
    MaskRaster m(3, 2, std::vector<std::uint8_t>{0, 7, 1, 0, 0, 255});
    EXPECT_EQ(m.valid_count(), 3u);
}

TEST(Rasters, CropCopiesRegion) {
    LabelRaster l(4, 3, std::vector<ClassId>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},
                  GeoTransform(0, 10, 1, 1));
    const LabelRaster c = crop(l, Region{1, 1, 2, 2});
    EXPECT_EQ(oracle::values(c.labels()), (std::vector<ClassId>{5, 6, 9, 10}));
    EXPECT_EQ(c.geo(), l.geo().offset(1, 1));
    EXPECT_THROW(crop(l, Region{3, 0, 2, 1}), InvalidArgument);
}

TEST(Scheme, DefaultPalette) {
    const ClassScheme s = default_scheme();
    ASSERT_EQ(s.size(), 6u);
    EXPECT_EQ(s.at(0).color, (Rgb{210, 180, 140}));
    EXPECT_EQ(s.at(1).color, (Rgb{0, 100, 0}));
    EXPECT_EQ(s.at(2).color, (Rgb{144, 238, 144}));
    EXPECT_EQ(s.at(3).color, (Rgb{139, 69, 19}));
    EXPECT_EQ(s.at(4).color, (Rgb{255, 0, 0}));
    EXPECT_EQ(s.at(5).color, (Rgb{0, 0, 255}));
    EXPECT_EQ(s.unclassified_id(), ClassId{5});
    ASSERT_NE(s.find_group("total_vegetation"), nullptr);
    EXPECT_EQ(s.find_group("total_vegetation")->members, (std::vector<ClassId>{1, 2}));
}

TEST(Scheme, ParseAndFormatRoundTrip) {
    std::istringstream in("# coastal\n1,grass,0,200,0\n0,beach,250,240,200\nmerge,green,1\nmasked,9\n");
    const ClassScheme s = parse_scheme(in);
    EXPECT_EQ(s.at(0).name, "beach");
    EXPECT_EQ(s.masked_id(), 9);
    std::istringstream again(format_scheme(s));
    EXPECT_EQ(parse_scheme(again), s);
}

TEST(Scheme, ParseErrorsNameTheSource) {
    std::istringstream bad("0,sand,300,0,0\n");
    try {
        parse_scheme(bad, "my.scheme");
        FAIL();
    } catch (const IoError& e) {
        EXPECT_EQ(e.path(), "my.scheme");
    }
    std::istringstream gap("0,a,1,1,1\n2,b,2,2,2\n");
    EXPECT_THROW(parse_scheme(gap), IoError);
    std::istringstream dup_color("0,a,1,1,1\n1,b,1,1,1\n");
    EXPECT_THROW(parse_scheme(dup_color), IoError);
    std::istringstream bad_group("0,a,1,1,1\nmerge,g,4\n");
    EXPECT_THROW(parse_scheme(bad_group), IoError);
}

TEST(Decode, ExactPaletteHit) {
    const LabelRaster l = decode_labels(single_pixel(210, 180, 140), default_scheme());
    EXPECT_EQ(l.at(0, 0), 0);
}

TEST(Decode, EquidistantPicksLowestId) {
    // Classes 1 and 3 sit at equal distance from (50,50,50); class 0 and 2 are far away.
    const ClassScheme s({{0, "a", {255, 255, 255}},
                         {1, "b", {40, 50, 50}},
                         {2, "c", {255, 0, 255}},
                         {3, "d", {60, 50, 50}}});
    EXPECT_EQ(squared_distance({50, 50, 50}, {40, 50, 50}), squared_distance({50, 50, 50}, {60, 50, 50}));
    EXPECT_EQ(decode_labels(single_pixel(50, 50, 50), s).at(0, 0), 1);
}

TEST(Decode, DarkGreenIsDenseVegetation) {
    const ClassScheme s = default_scheme();
    const ClassId expected = oracle::nearest_color(palette_of(s), 20, 110, 15);
    EXPECT_EQ(expected, 1);
    EXPECT_EQ(decode_labels(single_pixel(20, 110, 15), s).at(0, 0), expected);
}

TEST(Decode, Errors) {
    EXPECT_THROW(decode_labels(single_pixel(0, 0, 0), ClassScheme{}), InvalidArgument);
    EXPECT_THROW(decode_labels(ImageRaster(0, 0, 3), default_scheme()), InvalidArgument);
}

TEST(Decode, TransparentAndMaskedPixelsBecomeMasked) {
    ImageRaster img(2, 1, 4, {210, 180, 140, 255, 210, 180, 140, 0});
    LabelRaster l = decode_labels(img, default_scheme());
    EXPECT_EQ(l.at(0, 0), 0);
    EXPECT_EQ(l.at(1, 0), kDefaultMaskedId);
    MaskRaster m(2, 1);
    m.set(0, 0, false);
    l = decode_labels(img, default_scheme(), &m);
    EXPECT_EQ(l.at(0, 0), kDefaultMaskedId);
}

TEST(Decode, MatchesBruteForceOnRandomColors) {
    const ClassScheme s = default_scheme();
    const auto pal = palette_of(s);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const ImageRaster img = synth::random_image(40, 30, 3, rng);
        const LabelRaster l = decode_labels(img, s, nullptr, 1 + trial % 3);
        for (std::size_t y = 0; y < img.height(); ++y)
            for (std::size_t x = 0; x < img.width(); ++x)
                ASSERT_EQ(l.at(x, y), oracle::nearest_color(pal, img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)));
    }
}

TEST(Encode, UniformSand) {
    const ImageRaster img = encode_labels(LabelRaster(3, 2, ClassId{0}), default_scheme());
    for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 3; ++x) {
            EXPECT_EQ(img.at(x, y, 0), 210);
            EXPECT_EQ(img.at(x, y, 1), 180);
            EXPECT_EQ(img.at(x, y, 2), 140);
            EXPECT_EQ(img.at(x, y, 3), 255);
        }
}

TEST(Encode, TwoByTwoLookup) {
    const ClassScheme s = default_scheme();
    const LabelRaster l(2, 2, std::vector<ClassId>{0, 1, kDefaultMaskedId, 4});
    const ImageRaster img = encode_labels(l, s);
    for (std::size_t i = 0; i < 4; ++i) {
        const std::size_t x = i % 2, y = i / 2;
        const ClassId id = l.at(x, y);
        if (id == kDefaultMaskedId) {
            EXPECT_EQ(img.at(x, y, 3), 0);
        } else {
            const Rgb c = s.at(id).color;
            EXPECT_EQ((Rgb{img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)}), c);
            EXPECT_EQ(img.at(x, y, 3), 255);
        }
    }
}

TEST(Encode, RejectsUnknownLabel) {
    EXPECT_THROW(encode_labels(LabelRaster(1, 1, ClassId{9}), default_scheme()), InvalidArgument);
}

TEST(Encode, DecodeIsInverse) {
    const ClassScheme s = default_scheme();
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const LabelRaster l = synth::random_labels(1 + trial * 7, 1 + trial * 3, 6, rng, 0.1);
        EXPECT_EQ(oracle::values(decode_labels(encode_labels(l, s), s).labels()), oracle::values(l.labels()));
    }
}
