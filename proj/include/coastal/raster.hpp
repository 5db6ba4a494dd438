#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coastal/error.hpp"

namespace coastal {

using ClassId = std::uint8_t;

/// Sentinel label for pixels that are outside the assessed area.
inline constexpr ClassId kDefaultMaskedId = 255;

struct PixelIndex {
    std::size_t col = 0;
    std::size_t row = 0;

    friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
    friend auto operator<=>(const PixelIndex& a, const PixelIndex& b) {
        if (auto c = a.row <=> b.row; c != 0) return c;
        return a.col <=> b.col;
    }
};

struct MapPoint {
    double x = 0.0;
    double y = 0.0;
};

/**
 * Axis-aligned affine transform from pixel space to map units (metres).
 *
 * The origin is the outer corner of the upper-left pixel. Rows advance
 * southward, so the stored pixel_size_y is positive and subtracted.
 */
class GeoTransform {
public:
    GeoTransform() = default;

    GeoTransform(double origin_x, double origin_y, double pixel_size_x, double pixel_size_y)
        : origin_x_(origin_x), origin_y_(origin_y), pixel_size_x_(pixel_size_x), pixel_size_y_(pixel_size_y) {
        if (!(pixel_size_x > 0.0) || !(pixel_size_y > 0.0) || !std::isfinite(pixel_size_x) ||
            !std::isfinite(pixel_size_y)) {
            throw InvalidArgument("GeoTransform: pixel sizes must be positive and finite");
        }
        if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) {
            throw InvalidArgument("GeoTransform: origin must be finite");
        }
    }

    double origin_x() const noexcept { return origin_x_; }
    double origin_y() const noexcept { return origin_y_; }
    double pixel_size_x() const noexcept { return pixel_size_x_; }
    double pixel_size_y() const noexcept { return pixel_size_y_; }
    double pixel_area_m2() const noexcept { return pixel_size_x_ * pixel_size_y_; }

    MapPoint pixel_center(std::size_t col, std::size_t row) const noexcept {
        return {origin_x_ + (static_cast<double>(col) + 0.5) * pixel_size_x_,
                origin_y_ - (static_cast<double>(row) + 0.5) * pixel_size_y_};
    }

    /// Pixel containing the map point. Exact inverse of pixel_center().
    PixelIndex map_to_pixel(MapPoint p) const {
        const double c = std::floor((p.x - origin_x_) / pixel_size_x_);
        const double r = std::floor((origin_y_ - p.y) / pixel_size_y_);
        if (c < 0.0 || r < 0.0) throw InvalidArgument("map point lies before the raster origin");
        return {static_cast<std::size_t>(c), static_cast<std::size_t>(r)};
    }

    /// Transform of a sub-grid whose upper-left pixel is (col,row) of this grid.
    GeoTransform offset(std::size_t col, std::size_t row) const {
        return {origin_x_ + static_cast<double>(col) * pixel_size_x_,
                origin_y_ - static_cast<double>(row) * pixel_size_y_, pixel_size_x_, pixel_size_y_};
    }

    GeoTransform with_pixel_size(double size_x, double size_y) const {
        return {origin_x_, origin_y_, size_x, size_y};
    }

    friend bool operator==(const GeoTransform&, const GeoTransform&) = default;

private:
    double origin_x_ = 0.0;
    double origin_y_ = 0.0;
    double pixel_size_x_ = 1.0;
    double pixel_size_y_ = 1.0;
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Rgba {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    std::uint8_t a = 0;

    friend bool operator==(const Rgba&, const Rgba&) = default;
};

/// Pixel-interleaved 8-bit image with 1, 3 (RGB) or 4 (RGBA) bands.
class ImageRaster {
public:
    ImageRaster() = default;

    ImageRaster(std::size_t width, std::size_t height, std::size_t bands, GeoTransform geo = {})
        : width_(width), height_(height), bands_(bands), samples_(width * height * bands, 0), geo_(geo) {
        check_bands(bands);
    }

    ImageRaster(std::size_t width, std::size_t height, std::size_t bands, std::vector<std::uint8_t> samples,
                GeoTransform geo = {})
        : width_(width), height_(height), bands_(bands), samples_(std::move(samples)), geo_(geo) {
        check_bands(bands);
        if (samples_.size() != width * height * bands) {
            throw InvalidArgument("ImageRaster: sample count does not match width*height*bands");
        }
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t bands() const noexcept { return bands_; }
    std::size_t pixel_count() const noexcept { return width_ * height_; }
    bool empty() const noexcept { return width_ == 0 || height_ == 0; }
    bool has_alpha() const noexcept { return bands_ == 4; }
    const GeoTransform& geo() const noexcept { return geo_; }
    void set_geo(const GeoTransform& geo) noexcept { geo_ = geo; }

    std::uint8_t at(std::size_t col, std::size_t row, std::size_t band) const noexcept {
        return samples_[(row * width_ + col) * bands_ + band];
    }
    std::uint8_t& at(std::size_t col, std::size_t row, std::size_t band) noexcept {
        return samples_[(row * width_ + col) * bands_ + band];
    }

    std::span<const std::uint8_t> pixel(std::size_t col, std::size_t row) const noexcept {
        return {samples_.data() + (row * width_ + col) * bands_, bands_};
    }
    std::span<std::uint8_t> pixel(std::size_t col, std::size_t row) noexcept {
        return {samples_.data() + (row * width_ + col) * bands_, bands_};
    }

    /// Opaque unless the image carries an alpha band with value 0 here.
    bool opaque(std::size_t col, std::size_t row) const noexcept {
        return bands_ != 4 || at(col, row, 3) != 0;
    }

    std::span<const std::uint8_t> samples() const noexcept { return samples_; }
    std::span<std::uint8_t> samples() noexcept { return samples_; }

    friend bool operator==(const ImageRaster&, const ImageRaster&) = default;

private:
    static void check_bands(std::size_t bands) {
        if (bands != 1 && bands != 3 && bands != 4) {
            throw InvalidArgument("ImageRaster: band count must be 1, 3 or 4");
        }
    }

    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::size_t bands_ = 3;
    std::vector<std::uint8_t> samples_;
    GeoTransform geo_;
};

/// One class id (or the masked sentinel) per pixel, row-major.
class LabelRaster {
public:
    LabelRaster() = default;

    LabelRaster(std::size_t width, std::size_t height, ClassId fill = 0, GeoTransform geo = {})
        : width_(width), height_(height), labels_(width * height, fill), geo_(geo) {}

    LabelRaster(std::size_t width, std::size_t height, std::vector<ClassId> labels, GeoTransform geo = {})
        : width_(width), height_(height), labels_(std::move(labels)), geo_(geo) {
        if (labels_.size() != width * height) {
            throw InvalidArgument("LabelRaster: label count does not match width*height");
        }
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return width_ == 0 || height_ == 0; }
    const GeoTransform& geo() const noexcept { return geo_; }
    void set_geo(const GeoTransform& geo) noexcept { geo_ = geo; }

    ClassId at(std::size_t col, std::size_t row) const noexcept { return labels_[row * width_ + col]; }
    ClassId& at(std::size_t col, std::size_t row) noexcept { return labels_[row * width_ + col]; }

    std::span<const ClassId> labels() const noexcept { return labels_; }
    std::span<ClassId> labels() noexcept { return labels_; }

    friend bool operator==(const LabelRaster&, const LabelRaster&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<ClassId> labels_;
    GeoTransform geo_;
};

/// Per-pixel validity flags.
class MaskRaster {
public:
    MaskRaster() = default;

    MaskRaster(std::size_t width, std::size_t height, bool valid = true)
        : width_(width), height_(height), valid_(width * height, valid ? 1 : 0) {}

    MaskRaster(std::size_t width, std::size_t height, std::vector<std::uint8_t> valid)
        : width_(width), height_(height), valid_(std::move(valid)) {
        if (valid_.size() != width * height) {
            throw InvalidArgument("MaskRaster: flag count does not match width*height");
        }
        for (auto& v : valid_) v = v ? 1 : 0;
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return valid_.size(); }

    bool valid(std::size_t col, std::size_t row) const noexcept { return valid_[row * width_ + col] != 0; }
    void set(std::size_t col, std::size_t row, bool v) noexcept { valid_[row * width_ + col] = v ? 1 : 0; }

    std::size_t valid_count() const noexcept {
        std::size_t n = 0;
        for (auto v : valid_) n += v;
        return n;
    }

    std::span<const std::uint8_t> flags() const noexcept { return valid_; }

    friend bool operator==(const MaskRaster&, const MaskRaster&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<std::uint8_t> valid_;
};

template <typename A, typename B>
bool same_grid(const A& a, const B& b) noexcept {
    return a.width() == b.width() && a.height() == b.height();
}

/// Pixel rectangle inside a raster.
struct Region {
    std::size_t col = 0;
    std::size_t row = 0;
    std::size_t width = 0;
    std::size_t height = 0;
};

namespace detail {
inline void check_region(const Region& r, std::size_t width, std::size_t height) {
    if (r.width == 0 || r.height == 0 || r.col + r.width > width || r.row + r.height > height) {
        throw InvalidArgument("region lies outside the raster");
    }
}
} // namespace detail

inline ImageRaster crop(const ImageRaster& img, const Region& r) {
    detail::check_region(r, img.width(), img.height());
    ImageRaster out(r.width, r.height, img.bands(), img.geo().offset(r.col, r.row));
    for (std::size_t y = 0; y < r.height; ++y) {
        for (std::size_t x = 0; x < r.width; ++x) {
            auto src = img.pixel(r.col + x, r.row + y);
            auto dst = out.pixel(x, y);
            std::copy(src.begin(), src.end(), dst.begin());
        }
    }
    return out;
}

inline LabelRaster crop(const LabelRaster& labels, const Region& r) {
    detail::check_region(r, labels.width(), labels.height());
    LabelRaster out(r.width, r.height, ClassId{0}, labels.geo().offset(r.col, r.row));
    for (std::size_t y = 0; y < r.height; ++y) {
        for (std::size_t x = 0; x < r.width; ++x) out.at(x, y) = labels.at(r.col + x, r.row + y);
    }
    return out;
}

inline MaskRaster crop(const MaskRaster& mask, const Region& r) {
    detail::check_region(r, mask.width(), mask.height());
    MaskRaster out(r.width, r.height);
    for (std::size_t y = 0; y < r.height; ++y) {
        for (std::size_t x = 0; x < r.width; ++x) out.set(x, y, mask.valid(r.col + x, r.row + y));
    }
    return out;
}

} // namespace coastal
